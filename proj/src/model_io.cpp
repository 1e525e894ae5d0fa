#include "tvsvm/model_io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tvsvm/error.hpp"

namespace tvsvm {
namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::Ref<const RowMatrix>& m) {
  json values = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) values.push_back(m(i, j));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"values", std::move(values)}};
}

RowMatrix matrix_from_json(const json& j, const char* what) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& values = j.at("values");
  if (rows < 0 || cols < 0 || static_cast<Eigen::Index>(values.size()) != rows * cols)
    throw DataError(std::string("model field '") + what + "' has inconsistent shape");
  RowMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows * cols; ++i) m.data()[i] = values[static_cast<std::size_t>(i)].get<double>();
  return m;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vector vector_from_json(const json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

}  // namespace

std::string model_to_json(const TvSvmModel& model) {
  model.validate();
  json doc;
  doc["format"] = "tvsvm-model";
  doc["version"] = kModelFormatVersion;
  json kernels = json::array();
  for (const auto& k : model.kernels) kernels.push_back(k.to_record());
  doc["kernels"] = std::move(kernels);

  json net;
  net["layer_sizes"] = model.net.layer_sizes();
  net["leak_slope"] = model.net.leak_slope();
  net["activation"] = std::string(activation_name(model.net.activation()));
  json raw = json::array();
  for (const auto& w : model.net.raw_weights()) raw.push_back(matrix_to_json(w));
  net["raw_weights"] = std::move(raw);
  doc["net"] = std::move(net);

  doc["support"] = matrix_to_json(model.support);
  doc["alpha"] = matrix_to_json(model.alpha);
  doc["bias"] = vector_to_json(model.bias);
  doc["frozen_support"] = model.frozen_support;
  doc["classes"] = model.classes;

  json transform;
  transform["mode"] = std::string(normalize_mode_name(model.input_transform.mode));
  transform["lower"] = vector_to_json(model.input_transform.lower);
  transform["range"] = vector_to_json(model.input_transform.range);
  doc["input_transform"] = std::move(transform);
  return doc.dump(1) + "\n";
}

TvSvmModel model_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != "tvsvm-model") throw DataError("not a tvsvm model file");
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion)
      throw DataError("unsupported model format version " + std::to_string(version));

    TvSvmModel m;
    for (const auto& k : doc.at("kernels")) m.kernels.push_back(KernelSpec::from_record(k.get<std::string>()));
    const auto& net = doc.at("net");
    m.net = DeepKernelNet(net.at("layer_sizes").get<std::vector<int>>(), net.at("leak_slope").get<double>(),
                          parse_activation(net.at("activation").get<std::string>()));
    std::vector<Eigen::MatrixXd> raw;
    for (const auto& w : net.at("raw_weights")) raw.emplace_back(matrix_from_json(w, "net.raw_weights"));
    m.net.set_raw_weights(std::move(raw));

    m.support = matrix_from_json(doc.at("support"), "support");
    m.alpha = matrix_from_json(doc.at("alpha"), "alpha");
    m.bias = vector_from_json(doc.at("bias"));
    m.frozen_support = doc.at("frozen_support").get<bool>();
    m.classes = doc.at("classes").get<std::vector<int>>();
    const auto& t = doc.at("input_transform");
    m.input_transform.mode = parse_normalize_mode(t.at("mode").get<std::string>());
    m.input_transform.lower = vector_from_json(t.at("lower"));
    m.input_transform.range = vector_from_json(t.at("range"));
    m.validate();
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model file: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("invalid model file: ") + e.what());
  }
}

void save_model(const TvSvmModel& model, const std::filesystem::path& path) {
  const std::string text = model_to_json(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
}

TvSvmModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace tvsvm
