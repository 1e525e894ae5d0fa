#include "commands.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "tvsvm/cpd.hpp"
#include "tvsvm/error.hpp"
#include "tvsvm/gradcheck.hpp"
#include "tvsvm/model_io.hpp"
#include "tvsvm/numeric_text.hpp"

#ifndef TVSVM_VERSION
#define TVSVM_VERSION "0.0.0"
#endif

namespace tvsvm::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw DataError("cannot write '" + path.string() + "'");
}

std::optional<std::uint64_t> seed_from_env() {
  const char* raw = std::getenv("TVSVM_SEED");
  if (!raw || !*raw) return std::nullopt;
  const std::string_view text(raw);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw InvalidArgument("TVSVM_SEED must be a non-negative integer, got '" + std::string(text) + "'");
  return v;
}

// "L" or "L:H": combining layers, optionally with the hidden layer width.
void apply_mkl_spec(const std::string& spec, TrainConfig& config) {
  const auto colon = spec.find(':');
  auto parse_int = [&](std::string_view s) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
      throw InvalidArgument("bad --mkl-layers value '" + spec + "' (expected L or L:H)");
    return v;
  };
  config.mkl_layers = parse_int(std::string_view(spec).substr(0, colon));
  if (colon != std::string::npos) config.hidden_units = parse_int(std::string_view(spec).substr(colon + 1));
}

ordered_json manifest_header(const std::string& command) {
  ordered_json m;
  m["tool"] = "tvsvm";
  m["version"] = TVSVM_VERSION;
  m["command"] = command;
  return m;
}

ordered_json input_record(const std::string& path) {
  ordered_json r;
  r["path"] = path;
  r["sha256"] = sha256_file(path);
  return r;
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string data, config, validation, out;
  std::uint64_t seed = 0;
  std::string kernels, mkl, init, activation, normalize;
  int n_svs = 0, epochs = 0, batch_size = 0, hidden = 0;
  double c = 0, lr0 = 0, jitter = 0, leak = 0;
  bool freeze = false, verbose = false;
};

int cmd_train(CLI::App& sub, const TrainArgs& a, std::ostream& out, std::ostream& err) {
  TrainConfig config;
  std::string data_path = a.data;
  std::optional<std::string> expected_digest;
  bool seed_set = false;
  if (sub.count("--config")) {
    const json doc = json::parse(read_file(a.config), nullptr, false);
    if (doc.is_discarded()) throw InvalidArgument("config file '" + a.config + "' is not valid JSON");
    const json& section = doc.contains("config") ? doc.at("config") : doc;
    config = config_from_json(section.dump());
    seed_set = section.contains("seed");
    // A manifest also names the data it was produced from.
    if (doc.contains("inputs") && doc["inputs"].contains("data") && data_path.empty()) {
      data_path = doc["inputs"]["data"].value("path", "");
      if (doc["inputs"]["data"].contains("sha256")) expected_digest = doc["inputs"]["data"]["sha256"].get<std::string>();
    }
  }
  if (data_path.empty()) throw InvalidArgument("--data is required (or a manifest naming its input)");

  if (sub.count("--seed")) {
    config.seed = a.seed;
  } else if (!seed_set) {
    if (auto s = seed_from_env()) config.seed = *s;
  }
  if (sub.count("--freeze-svs")) config.freeze_support = true;
  if (sub.count("--kernels")) config.kernels = parse_kernel_list(a.kernels);
  if (sub.count("--mkl-layers")) apply_mkl_spec(a.mkl, config);
  if (sub.count("--hidden-units")) config.hidden_units = a.hidden;
  if (sub.count("--n-svs")) config.num_support = a.n_svs;
  if (sub.count("--epochs")) config.epochs = a.epochs;
  if (sub.count("--batch-size")) config.batch_size = a.batch_size;
  if (sub.count("--c")) config.C = a.c;
  if (sub.count("--lr0")) config.lr0 = a.lr0;
  if (sub.count("--init")) config.init = parse_init_strategy(a.init);
  if (sub.count("--jitter")) config.jitter_scale = a.jitter;
  if (sub.count("--activation")) config.activation = parse_activation(a.activation);
  if (sub.count("--leak-slope")) config.leak_slope = a.leak;
  if (sub.count("--normalize")) config.normalize = parse_normalize_mode(a.normalize);
  config.jitter_scale = config.resolved_jitter_scale();
  config.validate();

  ordered_json inputs;
  inputs["data"] = input_record(data_path);
  if (expected_digest && *expected_digest != inputs["data"]["sha256"])
    throw DataError("'" + data_path + "' does not match the digest recorded in the manifest");
  const Dataset data = load_csv(data_path);
  std::optional<Dataset> validation;
  if (sub.count("--validation")) {
    inputs["validation"] = input_record(a.validation);
    validation = load_csv(a.validation);
    if (validation->dim() != data.dim()) throw DataError("validation data has a different number of features");
  }

  const TrainReport report = train(data, config, validation ? &*validation : nullptr);
  const fs::path dir(a.out);
  fs::create_directories(dir);

  std::ostringstream csv;
  write_report_csv(report, csv);
  write_file(dir / "report.csv", csv.str());
  if (!report.diverged) save_model(report.model, dir / "model.json");

  ordered_json manifest = manifest_header("train");
  manifest["seed"] = config.seed;
  manifest["config"] = ordered_json::parse(config_to_json(config));
  manifest["inputs"] = inputs;
  ordered_json outputs;
  outputs["report"] = "report.csv";
  if (!report.diverged) outputs["model"] = "model.json";
  manifest["outputs"] = outputs;
  ordered_json result;
  result["epochs_completed"] = report.epochs.size();
  result["diverged"] = report.diverged;
  if (report.diverged) result["failure"] = report.failure;
  if (!report.epochs.empty()) {
    result["final_objective"] = report.epochs.back().objective.total;
    result["final_train_accuracy"] = report.epochs.back().train_accuracy;
    if (report.epochs.back().validation_accuracy)
      result["final_validation_accuracy"] = *report.epochs.back().validation_accuracy;
  }
  manifest["result"] = result;
  write_file(dir / "manifest.json", dump(manifest));

  if (a.verbose)
    for (const auto& r : report.epochs)
      out << "epoch " << r.epoch << " J " << format_double(r.objective.total) << " lr " << format_double(r.lr)
          << " train_acc " << format_double(r.train_accuracy) << "\n";
  err << "training time " << std::fixed << std::setprecision(2) << report.seconds << " s\n";
  if (report.diverged) {
    err << "error: training diverged at " << report.failure << "\n";
    return kNumericalFailure;
  }
  const auto& last = report.epochs.back();
  out << "epochs " << report.epochs.size() << "\n";
  out << "objective " << format_double(last.objective.total) << "\n";
  out << "train_accuracy " << format_double(last.train_accuracy) << "\n";
  if (last.validation_accuracy) out << "validation_accuracy " << format_double(*last.validation_accuracy) << "\n";
  out << "wrote " << (dir / "model.json").string() << "\n";
  return kSuccess;
}

// ---------------------------------------------------------------- eval

int cmd_eval(const std::string& model_path, const std::string& data_path, std::ostream& out) {
  const TvSvmModel model = load_model(model_path);
  const Dataset data = load_csv(data_path);
  if (data.dim() != model.dim())
    throw DataError("data has " + std::to_string(data.dim()) + " features, model expects " +
                    std::to_string(model.dim()));
  const RowMatrix X = model.input_transform.apply(data.X);

  std::set<int> label_set(model.classes.begin(), model.classes.end());
  if (model.classes.empty()) label_set = {-1, 1};
  for (Eigen::Index i = 0; i < data.y.size(); ++i) label_set.insert(data.y[i]);
  const std::vector<int> labels(label_set.begin(), label_set.end());
  std::map<int, std::size_t> index;
  for (std::size_t k = 0; k < labels.size(); ++k) index[labels[k]] = k;

  std::vector<std::vector<int>> confusion(labels.size(), std::vector<int>(labels.size(), 0));
  int correct = 0;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const int predicted = predict_label(model, row_span(X, i));
    ++confusion[index[data.y[i]]][index[predicted]];
    correct += predicted == data.y[i];
  }

  double macro = 0.0;
  int present = 0;
  std::ostringstream per_class;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    int count = 0;
    for (int c : confusion[k]) count += c;
    if (count == 0) continue;
    const double acc = static_cast<double>(confusion[k][k]) / count;
    macro += acc;
    ++present;
    per_class << "class " << labels[k] << " accuracy " << format_double(acc) << " (" << confusion[k][k] << "/" << count
              << ")\n";
  }
  out << "samples " << X.rows() << "\n";
  out << "accuracy " << format_double(static_cast<double>(correct) / static_cast<double>(X.rows())) << "\n";
  out << "macro_accuracy " << format_double(macro / present) << "\n";
  out << per_class.str();
  out << "confusion (rows: true label, columns: predicted label)\n";
  out << "label";
  for (int l : labels) out << "," << l;
  out << "\n";
  for (std::size_t k = 0; k < labels.size(); ++k) {
    out << labels[k];
    for (int c : confusion[k]) out << "," << c;
    out << "\n";
  }
  return kSuccess;
}

// ---------------------------------------------------------------- gradcheck

struct GradcheckArgs {
  std::string kernels, layers = "1,2,3", mode = "smoothed", frozen = "both";
  int n_svs = 5, trials = 10, hidden = 4;
  double tol = 1e-5;
  std::uint64_t seed = 0;
  bool corrupt = false;
};

std::vector<int> parse_int_list(const std::string& text, const char* what) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size())
      throw InvalidArgument(std::string("bad ") + what + " list '" + text + "'");
    out.push_back(v);
  }
  if (out.empty()) throw InvalidArgument(std::string("empty ") + what + " list");
  return out;
}

int cmd_gradcheck(CLI::App& sub, const GradcheckArgs& a, std::ostream& out) {
  std::vector<KernelFamily> families;
  if (sub.count("--kernels")) {
    for (const auto& spec : parse_kernel_list(a.kernels)) families.push_back(spec.family());
  } else {
    families.assign(kAllFamilies.begin(), kAllFamilies.end());
  }
  const auto layers = parse_int_list(a.layers, "layer");
  for (int l : layers)
    if (l < 1 || l > 3) throw InvalidArgument("gradcheck layers must be 1 to 3");
  std::vector<bool> frozen_modes;
  if (a.frozen == "both") frozen_modes = {false, true};
  else if (a.frozen == "learned") frozen_modes = {false};
  else if (a.frozen == "frozen") frozen_modes = {true};
  else throw InvalidArgument("--frozen must be both, learned or frozen");
  if (a.trials < 1) throw InvalidArgument("--trials must be >= 1");
  if (a.n_svs < 1 || a.n_svs > 5) throw InvalidArgument("--n-svs must be 1 to 5");
  const Activation mode = parse_activation(a.mode);
  GradcheckOptions options;
  options.tolerance = a.tol;
  options.corrupt = a.corrupt;

  bool all_passed = true;
  int combos = 0;
  for (std::size_t f = 0; f < families.size(); ++f)
    for (int L : layers)
      for (bool frozen : frozen_modes) {
        double worst = 0.0;
        std::string where;
        for (int t = 0; t < a.trials; ++t) {
          std::seed_seq seq{static_cast<std::uint32_t>(a.seed), static_cast<std::uint32_t>(a.seed >> 32),
                            static_cast<std::uint32_t>(families[f]), static_cast<std::uint32_t>(L),
                            static_cast<std::uint32_t>(frozen), static_cast<std::uint32_t>(t)};
          std::mt19937_64 rng(seq);
          // Pair each family with a second one so the net mixes two inputs.
          const KernelFamily partner = kAllFamilies[(static_cast<std::size_t>(families[f]) + 1) % kAllFamilies.size()];
          const std::vector<KernelSpec> kernels{random_kernel_spec(families[f], rng()), random_kernel_spec(partner, rng())};
          GradcheckInstance inst = random_gradcheck_instance(kernels, L, frozen, mode, rng(), a.hidden);
          if (inst.model.num_support() > a.n_svs) {
            inst.model.support.conservativeResize(a.n_svs, Eigen::NoChange);
            inst.model.alpha.conservativeResize(Eigen::NoChange, a.n_svs);
          }
          const GradcheckResult r = check_gradients(inst.model, inst.X, inst.y, inst.C, options);
          if (!(r.max_error <= worst)) worst = r.max_error, where = r.worst_parameter;
        }
        const bool ok = worst <= a.tol;
        all_passed &= ok;
        ++combos;
        out << (ok ? "PASS " : "FAIL ") << family_name(families[f]) << " layers=" << L
            << (frozen ? " frozen" : " learned") << " trials=" << a.trials << " max_error=" << format_double(worst);
        if (!ok) out << " at " << where;
        out << "\n";
      }
  out << (all_passed ? "gradcheck passed" : "gradcheck FAILED") << " (" << combos << " configurations, tol "
      << format_double(a.tol) << ")\n";
  return all_passed ? kSuccess : kNumericalFailure;
}

// ---------------------------------------------------------------- kernelcheck

struct KernelcheckArgs {
  std::string kernels, format = "text";
  int points = 10, dim = 3, trials = 1000, compose = 0;
  double tol = -1.0;
  std::uint64_t seed = 0;
  bool advisory = false;
};

std::string join_coefficients(const Vector& c) {
  std::string s;
  for (Eigen::Index i = 0; i < c.size(); ++i) s += (i ? " " : "") + format_double(c[i]);
  return s;
}

void print_report(const std::string& name, const CpdReport& r, bool records, std::ostream& out) {
  if (records) {
    out << name << ',' << verdict_name(r.verdict) << ',' << r.trials << ',' << format_double(r.tolerance) << ','
        << format_double(r.min_normalized_form) << ',' << format_double(r.min_eig_after_berg) << ',';
    if (r.witness) out << format_double(r.witness->quadratic_form) << ',' << join_coefficients(r.witness->coefficients);
    else out << ',';
    out << '\n';
    return;
  }
  out << "kernel: " << name << "\n";
  out << "verdict: " << verdict_name(r.verdict) << "\n";
  out << "trials: " << r.trials << "\n";
  out << "tolerance: " << format_double(r.tolerance) << "\n";
  out << "min_normalized_form: " << format_double(r.min_normalized_form) << "\n";
  out << "min_eig_after_berg: " << format_double(r.min_eig_after_berg) << "\n";
  if (r.witness)
    out << "witness: quadratic_form=" << format_double(r.witness->quadratic_form) << " coefficients=["
        << join_coefficients(r.witness->coefficients) << "]\n";
  else
    out << "witness: none\n";
  out << "\n";
}

int cmd_kernelcheck(CLI::App& sub, const KernelcheckArgs& a, std::ostream& out) {
  std::vector<KernelSpec> kernels;
  if (sub.count("--kernels")) kernels = parse_kernel_list(a.kernels);
  else
    for (KernelFamily f : kAllFamilies) kernels.emplace_back(f);
  if (a.points < 2) throw InvalidArgument("--points must be >= 2");
  if (a.dim < 1) throw InvalidArgument("--dim must be >= 1");
  if (a.format != "text" && a.format != "records") throw InvalidArgument("--format must be text or records");
  const bool records = a.format == "records";

  std::mt19937_64 rng(a.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  RowMatrix points(a.points, a.dim);
  for (Eigen::Index i = 0; i < points.size(); ++i) points.data()[i] = unit(rng);
  CpdOptions options;
  options.trials = a.trials;
  options.seed = a.seed;
  if (a.tol >= 0.0) options.tolerance = a.tol;

  if (records) out << "kernel,verdict,trials,tolerance,min_normalized_form,min_eig_after_berg,witness_form,witness_coefficients\n";
  bool all_passed = true;
  for (const auto& k : kernels) {
    const CpdReport r = cpd_certified_check(gram_matrix(k, points), points, options);
    all_passed &= r.passed();
    print_report(k.to_record(), r, records, out);
  }
  if (sub.count("--compose")) {
    DeepKernelNet net = DeepKernelNet::with_layers(static_cast<int>(kernels.size()), a.compose, 8, 0.01,
                                                   Activation::SmoothedLeakyRelu);
    auto raw = net.raw_weights();
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& w : raw)
      for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = gauss(rng);
    net.set_raw_weights(std::move(raw));
    try {
      const CpdReport r = composition_closure_check(net, kernels, points, options);
      all_passed &= r.passed();
      print_report("composed(layers=" + std::to_string(a.compose) + ")", r, records, out);
    } catch (const CompositionPrecondition& e) {
      all_passed = false;
      if (records) out << "composed,PreconditionFailed,,,,,,\n";
      else out << "composed: precondition failed: " << e.what() << "\n";
    }
  }
  if (!records) out << (all_passed ? "all kernels passed" : "some kernels FAILED") << (a.advisory ? " (advisory)" : "") << "\n";
  return all_passed || a.advisory ? kSuccess : kNumericalFailure;
}

// ---------------------------------------------------------------- synth, featurize

int cmd_synth(CLI::App& sub, const std::string& generator, int n, double noise, std::uint64_t seed_flag,
              const std::string& out_path, std::ostream& out) {
  std::uint64_t seed = 0;
  if (sub.count("--seed")) seed = seed_flag;
  else if (auto s = seed_from_env()) seed = *s;
  Dataset data;
  if (generator == "two-moons") data = make_two_moons(n, noise, seed);
  else if (generator == "xor-gaussians") data = make_xor_gaussians(n, noise, seed);
  else throw InvalidArgument("unknown generator '" + generator + "' (expected two-moons or xor-gaussians)");
  save_csv(data, out_path);

  ordered_json manifest = manifest_header("synth");
  manifest["seed"] = seed;
  ordered_json params;
  params["generator"] = generator;
  params["n"] = n;
  params["noise"] = noise;
  manifest["config"] = params;
  manifest["outputs"] = ordered_json{{"data", fs::path(out_path).filename().string()}};
  write_file(out_path + ".manifest.json", dump(manifest));
  out << "wrote " << data.size() << " rows to " << out_path << "\n";
  return kSuccess;
}

int cmd_featurize(const std::string& skeletons, int chunks, const std::string& out_path, std::ostream& out) {
  const auto videos = load_skeletons(skeletons);
  const Dataset data = featurize(videos, chunks);
  save_csv(data, out_path);
  ordered_json manifest = manifest_header("featurize");
  manifest["config"] = ordered_json{{"chunks", chunks}};
  manifest["inputs"] = ordered_json{{"skeletons", input_record(skeletons)}};
  manifest["outputs"] = ordered_json{{"data", fs::path(out_path).filename().string()}};
  write_file(out_path + ".manifest.json", dump(manifest));
  out << "wrote " << data.size() << " descriptors of length " << data.dim() << " to " << out_path << "\n";
  return kSuccess;
}

}  // namespace

std::string sha256_file(const std::string& path) {
  const std::string bytes = read_file(path);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 computation failed");
  std::ostringstream hex;
  for (unsigned int i = 0; i < length; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

std::string config_to_json(const TrainConfig& c) {
  ordered_json j;
  j["C"] = c.C;
  j["num_support"] = c.num_support;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["lr0"] = c.lr0;
  j["lr_decay"] = c.lr_decay;
  j["lr_min"] = c.lr_min;
  j["lr_max"] = c.lr_max;
  j["seed"] = c.seed;
  j["init"] = std::string(init_strategy_name(c.init));
  j["jitter_scale"] = c.resolved_jitter_scale();
  j["freeze_support"] = c.freeze_support;
  j["kernels"] = json::array();
  for (const auto& k : c.kernels) j["kernels"].push_back(k.to_record());
  j["mkl_layers"] = c.mkl_layers;
  j["hidden_units"] = c.hidden_units;
  j["leak_slope"] = c.leak_slope;
  j["activation"] = std::string(activation_name(c.activation));
  j["normalize"] = std::string(normalize_mode_name(c.normalize));
  return j.dump(2);
}

TrainConfig config_from_json(const std::string& text, TrainConfig c) {
  const json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw InvalidArgument("config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "C") c.C = v.get<double>();
      else if (key == "num_support") c.num_support = v.get<int>();
      else if (key == "epochs") c.epochs = v.get<int>();
      else if (key == "batch_size") c.batch_size = v.get<int>();
      else if (key == "lr0") c.lr0 = v.get<double>();
      else if (key == "lr_decay") c.lr_decay = v.get<double>();
      else if (key == "lr_min") c.lr_min = v.get<double>();
      else if (key == "lr_max") c.lr_max = v.get<double>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "init") c.init = parse_init_strategy(v.get<std::string>());
      else if (key == "jitter_scale") c.jitter_scale = v.get<double>();
      else if (key == "freeze_support") c.freeze_support = v.get<bool>();
      else if (key == "kernels") {
        c.kernels.clear();
        if (v.is_string()) c.kernels = parse_kernel_list(v.get<std::string>());
        else
          for (const auto& k : v) c.kernels.push_back(KernelSpec::from_record(k.get<std::string>()));
      } else if (key == "mkl_layers") c.mkl_layers = v.get<int>();
      else if (key == "hidden_units") c.hidden_units = v.get<int>();
      else if (key == "leak_slope") c.leak_slope = v.get<double>();
      else if (key == "activation") c.activation = parse_activation(v.get<std::string>());
      else if (key == "normalize") c.normalize = parse_normalize_mode(v.get<std::string>());
      else throw InvalidArgument("unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config value has the wrong type: ") + e.what());
  }
  return c;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Total variation SVM: training, evaluation and kernel verification", "tvsvm"};
  app.set_version_flag("--version", TVSVM_VERSION);
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "Train a model and write model.json, report.csv, manifest.json");
  train_cmd->add_option("--data", ta.data, "Training CSV");
  train_cmd->add_option("--config", ta.config, "JSON config, or a manifest from an earlier run");
  train_cmd->add_option("--validation", ta.validation, "Validation CSV, scored every epoch");
  train_cmd->add_option("--out", ta.out, "Output directory")->required();
  train_cmd->add_option("--seed", ta.seed, "Random seed (falls back to TVSVM_SEED)");
  train_cmd->add_flag("--freeze-svs", ta.freeze, "Keep support vectors at their initial training rows");
  train_cmd->add_option("--kernels", ta.kernels, "Comma separated kernels, e.g. \"Gaussian beta=2,Linear\"");
  train_cmd->add_option("--mkl-layers", ta.mkl, "Combining layers L or L:H with H hidden units (0 = passthrough)");
  train_cmd->add_option("--hidden-units", ta.hidden, "Hidden units per combining layer");
  train_cmd->add_option("--n-svs", ta.n_svs, "Number of virtual support vectors");
  train_cmd->add_option("--epochs", ta.epochs, "Epochs");
  train_cmd->add_option("--batch-size", ta.batch_size, "Mini-batch size");
  train_cmd->add_option("--c", ta.c, "Loss weight C");
  train_cmd->add_option("--lr0", ta.lr0, "Initial learning rate");
  train_cmd->add_option("--init", ta.init, "Support vector init: subsample, kmeans or uniform");
  train_cmd->add_option("--jitter", ta.jitter, "Init jitter as a fraction of each feature's std");
  train_cmd->add_option("--activation", ta.activation, "Net activation: exact or smoothed");
  train_cmd->add_option("--leak-slope", ta.leak, "Leaky ReLU slope in (0, 0.5)");
  train_cmd->add_option("--normalize", ta.normalize, "Input normalization: none, minmax or unitsum");
  train_cmd->add_flag("--verbose", ta.verbose, "Print one line per epoch");

  std::string eval_model, eval_data;
  auto* eval_cmd = app.add_subcommand("eval", "Accuracy, per-class accuracy and confusion matrix");
  eval_cmd->add_option("--model", eval_model, "Model file")->required();
  eval_cmd->add_option("--data", eval_data, "CSV to evaluate")->required();

  GradcheckArgs ga;
  auto* grad_cmd = app.add_subcommand("gradcheck", "Compare analytic gradients with central differences");
  grad_cmd->add_option("--kernels", ga.kernels, "Families to check (default: all)");
  grad_cmd->add_option("--mkl-layers", ga.layers, "Comma separated layer counts");
  grad_cmd->add_option("--n-svs", ga.n_svs, "Maximum number of support vectors (1 to 5)");
  grad_cmd->add_option("--trials", ga.trials, "Random instances per configuration");
  grad_cmd->add_option("--mode", ga.mode, "Net activation: smoothed or exact");
  grad_cmd->add_option("--frozen", ga.frozen, "both, learned or frozen");
  grad_cmd->add_option("--hidden-units", ga.hidden, "Hidden units per combining layer");
  grad_cmd->add_option("--tol", ga.tol, "Error tolerance");
  grad_cmd->add_option("--seed", ga.seed, "Random seed");
  grad_cmd->add_flag("--corrupt", ga.corrupt, "Perturb the analytic gradient (negative control)")->group("");

  KernelcheckArgs ka;
  auto* kc_cmd = app.add_subcommand("kernelcheck", "Sampled conditional positive definiteness checks");
  kc_cmd->add_option("--kernels", ka.kernels, "Kernels to check (default: all families)");
  kc_cmd->add_option("--points", ka.points, "Number of random points in [0,1]^dim");
  kc_cmd->add_option("--dim", ka.dim, "Point dimension");
  kc_cmd->add_option("--trials", ka.trials, "Random coefficient vectors");
  kc_cmd->add_option("--tol", ka.tol, "Tolerance (default 1e-8 * points)");
  kc_cmd->add_option("--seed", ka.seed, "Random seed");
  kc_cmd->add_option("--compose", ka.compose, "Also check a random net with this many combining layers");
  kc_cmd->add_flag("--advisory", ka.advisory, "Report failures but exit 0");
  kc_cmd->add_option("--format", ka.format, "text or records");

  std::string generator = "two-moons", synth_out;
  int synth_n = 400;
  double synth_noise = 0.2;
  std::uint64_t synth_seed = 0;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic dataset as CSV");
  synth_cmd->add_option("--generator", generator, "two-moons or xor-gaussians");
  synth_cmd->add_option("--n", synth_n, "Number of rows");
  synth_cmd->add_option("--noise", synth_noise, "Noise std (two-moons) or blob spread (xor-gaussians)");
  synth_cmd->add_option("--seed", synth_seed, "Random seed (falls back to TVSVM_SEED)");
  synth_cmd->add_option("--out", synth_out, "Output CSV")->required();

  std::string skeletons, feat_out;
  int chunks = 4;
  auto* feat_cmd = app.add_subcommand("featurize", "Temporal chunking descriptors from skeleton JSON");
  feat_cmd->add_option("--skeletons", skeletons, "Skeleton JSON file")->required();
  feat_cmd->add_option("--chunks", chunks, "Temporal chunks per trajectory");
  feat_cmd->add_option("--out", feat_out, "Output CSV")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForVersion&) {
    out << TVSVM_VERSION << "\n";
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*train_cmd) return cmd_train(*train_cmd, ta, out, err);
    if (*eval_cmd) return cmd_eval(eval_model, eval_data, out);
    if (*grad_cmd) return cmd_gradcheck(*grad_cmd, ga, out);
    if (*kc_cmd) return cmd_kernelcheck(*kc_cmd, ka, out);
    if (*synth_cmd) return cmd_synth(*synth_cmd, generator, synth_n, synth_noise, synth_seed, synth_out, out);
    if (*feat_cmd) return cmd_featurize(skeletons, chunks, feat_out, out);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const Error& e) {
    // Remaining library errors describe bad input data.
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

}  // namespace tvsvm::cli
