#include "tvsvm/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tvsvm/error.hpp"
#include "tvsvm/numeric_text.hpp"

namespace tvsvm {
namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<int> shuffled_indices(std::vector<int> idx, std::mt19937_64& rng) {
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

}  // namespace

bool Dataset::is_binary() const {
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (y[i] != -1 && y[i] != 1) return false;
  return true;
}

std::vector<int> Dataset::classes() const {
  std::set<int> s(y.data(), y.data() + y.size());
  return {s.begin(), s.end()};
}

void Dataset::validate() const {
  if (X.rows() < 1) throw DataError("dataset is empty");
  if (X.cols() < 1) throw DataError("dataset has no feature columns");
  if (y.size() != X.rows()) throw DataError("dataset has mismatched feature and label counts");
  if (!X.allFinite()) throw DataError("dataset has non-finite features");
  if (!feature_names.empty() && static_cast<Eigen::Index>(feature_names.size()) != X.cols())
    throw DataError("dataset feature name count does not match its columns");
}

Dataset Dataset::subset(const std::vector<int>& rows) const {
  Dataset out;
  out.X.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.X.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
    out.y[static_cast<Eigen::Index>(i)] = y[rows[i]];
  }
  out.feature_names = feature_names;
  return out;
}

Dataset read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("CSV input is empty");
  const auto header = split_fields(line);
  int label_col = -1;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto name = trim(header[c]);
    if (name == "label") {
      if (label_col >= 0) throw DataError("CSV header has more than one label column");
      label_col = static_cast<int>(c);
    } else {
      names.emplace_back(name);
    }
  }
  if (label_col < 0) throw DataError("CSV header has no column named 'label'");
  if (names.empty()) throw DataError("CSV has no feature columns");

  std::vector<double> values;
  std::vector<int> labels;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size())
      throw DataError("CSV line " + std::to_string(line_no) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(header.size()));
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto cell = trim(fields[c]);
      if (static_cast<int>(c) == label_col) {
        int label = 0;
        auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), label);
        if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty())
          throw DataError("CSV line " + std::to_string(line_no) + ": label '" +
                          std::string(cell) + "' is not an integer");
        labels.push_back(label);
      } else {
        const auto v = parse_double(cell);
        if (!v || !std::isfinite(*v))
          throw DataError("CSV line " + std::to_string(line_no) + ": cell '" + std::string(cell) +
                          "' is not a finite number");
        values.push_back(*v);
      }
    }
  }
  if (labels.empty()) throw DataError("CSV has no data rows");

  Dataset d;
  const auto n = static_cast<Eigen::Index>(labels.size());
  const auto D = static_cast<Eigen::Index>(names.size());
  d.X = Eigen::Map<const RowMatrix>(values.data(), n, D);
  d.y = Eigen::Map<const Eigen::VectorXi>(labels.data(), n);
  d.feature_names = std::move(names);
  return d;
}

void write_csv(const Dataset& data, std::ostream& out) {
  data.validate();
  for (int c = 0; c < data.dim(); ++c) {
    out << (data.feature_names.empty() ? "x" + std::to_string(c) : data.feature_names[c]) << ',';
  }
  out << "label\n";
  for (int i = 0; i < data.size(); ++i) {
    for (int c = 0; c < data.dim(); ++c) out << format_double(data.X(i, c)) << ',';
    out << data.y[i] << '\n';
  }
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  try {
    return read_csv(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void save_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  write_csv(data, out);
}

std::vector<LabeledSkeleton> parse_skeletons(std::string_view json_text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("skeleton file is not valid JSON: ") + e.what());
  }
  if (!root.is_object() || !root.contains("videos") || !root["videos"].is_array())
    throw DataError("skeleton file must be an object with a 'videos' array");

  std::vector<LabeledSkeleton> out;
  int v = 0;
  for (const auto& video : root["videos"]) {
    const std::string where = "video " + std::to_string(v++);
    if (!video.is_object() || !video.contains("label") || !video["label"].is_number_integer())
      throw DataError(where + ": missing integer 'label'");
    if (!video.contains("frames") || !video["frames"].is_array() || video["frames"].empty())
      throw DataError(where + ": missing or empty 'frames'");
    LabeledSkeleton item;
    item.label = video["label"].get<int>();
    auto& seq = item.sequence;
    int t = 0;
    for (const auto& frame : video["frames"]) {
      const std::string fwhere = where + " frame " + std::to_string(t++);
      if (!frame.is_array() || frame.empty()) throw DataError(fwhere + ": expected a joint array");
      const int J = static_cast<int>(frame.size());
      if (seq.frames.empty()) {
        seq.joints = J;
        const auto& first = frame.front();
        seq.coords = first.is_array() ? static_cast<int>(first.size()) : 0;
        if (seq.coords != 2 && seq.coords != 3)
          throw DataError(fwhere + ": joints must have 2 or 3 coordinates");
      } else if (J != seq.joints) {
        throw DataError(fwhere + ": joint count changed from " + std::to_string(seq.joints) +
                        " to " + std::to_string(J));
      }
      RowMatrix m(J, seq.coords);
      for (int j = 0; j < J; ++j) {
        const auto& joint = frame[j];
        if (!joint.is_array() || static_cast<int>(joint.size()) != seq.coords)
          throw DataError(fwhere + " joint " + std::to_string(j) + ": expected " +
                          std::to_string(seq.coords) + " coordinates");
        for (int k = 0; k < seq.coords; ++k) {
          if (!joint[k].is_number()) throw DataError(fwhere + ": non-numeric coordinate");
          m(j, k) = joint[k].get<double>();
        }
      }
      seq.frames.push_back(std::move(m));
    }
    try {
      seq.validate();
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
    out.push_back(std::move(item));
  }
  if (out.empty()) throw DataError("skeleton file contains no videos");
  return out;
}

std::vector<LabeledSkeleton> load_skeletons(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_skeletons(buf.str());
}

Dataset featurize(const std::vector<LabeledSkeleton>& videos, int chunks) {
  if (videos.empty()) throw DataError("no videos to featurize");
  const int J = videos.front().sequence.joints;
  const int K = videos.front().sequence.coords;
  Dataset d;
  d.X.resize(static_cast<Eigen::Index>(videos.size()), static_cast<Eigen::Index>(J) * chunks * K);
  d.y.resize(static_cast<Eigen::Index>(videos.size()));
  for (std::size_t i = 0; i < videos.size(); ++i) {
    const auto& seq = videos[i].sequence;
    if (seq.joints != J || seq.coords != K)
      throw DataError("video " + std::to_string(i) + " has a different skeleton layout");
    d.X.row(static_cast<Eigen::Index>(i)) = video_descriptor(seq, chunks).transpose();
    d.y[static_cast<Eigen::Index>(i)] = videos[i].label;
  }
  static constexpr char kAxis[] = {'x', 'y', 'z'};
  for (int j = 0; j < J; ++j)
    for (int m = 0; m < chunks; ++m)
      for (int k = 0; k < K; ++k)
        d.feature_names.push_back("j" + std::to_string(j) + "_m" + std::to_string(m) + "_" + kAxis[k]);
  return d;
}

Dataset make_two_moons(int n, double noise, std::uint64_t seed) {
  if (n < 2) throw InvalidArgument("two-moons needs n >= 2");
  if (!(noise >= 0.0)) throw InvalidArgument("noise must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int n_upper = n / 2;
  const int n_lower = n - n_upper;
  RowMatrix X(n, 2);
  Eigen::VectorXi y(n);
  auto angle = [](int i, int count) {
    return count > 1 ? std::numbers::pi * i / (count - 1) : 0.0;
  };
  for (int i = 0; i < n_upper; ++i) {
    const double t = angle(i, n_upper);
    X(i, 0) = std::cos(t);
    X(i, 1) = std::sin(t);
    y[i] = -1;
  }
  for (int i = 0; i < n_lower; ++i) {
    const double t = angle(i, n_lower);
    X(n_upper + i, 0) = 1.0 - std::cos(t);
    X(n_upper + i, 1) = 0.5 - std::sin(t);
    y[n_upper + i] = 1;
  }
  if (noise > 0.0)
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < 2; ++c) X(i, c) += noise * gauss(rng);

  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  Dataset d{X, y, {"x0", "x1"}};
  return d.subset(shuffled_indices(std::move(idx), rng));
}

Dataset make_xor_gaussians(int n, double spread, std::uint64_t seed) {
  if (n < 4) throw InvalidArgument("xor-gaussians needs n >= 4");
  if (!(spread >= 0.0)) throw InvalidArgument("spread must be >= 0");
  static constexpr double kCenters[4][2] = {{1, 1}, {-1, -1}, {1, -1}, {-1, 1}};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  RowMatrix X(n, 2);
  Eigen::VectorXi y(n);
  for (int i = 0; i < n; ++i) {
    const auto& c = kCenters[i % 4];
    X(i, 0) = c[0] + spread * gauss(rng);
    X(i, 1) = c[1] + spread * gauss(rng);
    y[i] = c[0] * c[1] > 0 ? 1 : -1;
  }
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  Dataset d{X, y, {"x0", "x1"}};
  return d.subset(shuffled_indices(std::move(idx), rng));
}

std::pair<Dataset, Dataset> split(const Dataset& data, const SplitSpec& spec) {
  data.validate();
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw InvalidArgument("train fraction must lie in (0, 1)");
  std::mt19937_64 rng(spec.seed);
  std::vector<int> train, test;
  auto take = [&](std::vector<int> idx) {
    idx = shuffled_indices(std::move(idx), rng);
    const auto k = static_cast<std::size_t>(std::llround(spec.train_fraction * idx.size()));
    train.insert(train.end(), idx.begin(), idx.begin() + k);
    test.insert(test.end(), idx.begin() + k, idx.end());
  };
  if (spec.stratified) {
    for (int c : data.classes()) {
      std::vector<int> idx;
      for (int i = 0; i < data.size(); ++i)
        if (data.y[i] == c) idx.push_back(i);
      take(std::move(idx));
    }
  } else {
    std::vector<int> idx(data.size());
    for (int i = 0; i < data.size(); ++i) idx[i] = i;
    take(std::move(idx));
  }
  if (train.empty() || test.empty()) throw InvalidArgument("split leaves an empty side");
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {data.subset(train), data.subset(test)};
}

std::string_view normalize_mode_name(NormalizeMode mode) {
  switch (mode) {
    case NormalizeMode::None: return "none";
    case NormalizeMode::MinMaxPerDim: return "minmax";
    case NormalizeMode::UnitSumRows: return "unitsum";
  }
  return "none";
}

NormalizeMode parse_normalize_mode(std::string_view name) {
  if (name == "none") return NormalizeMode::None;
  if (name == "minmax") return NormalizeMode::MinMaxPerDim;
  if (name == "unitsum") return NormalizeMode::UnitSumRows;
  throw InvalidArgument("unknown normalization '" + std::string(name) +
                        "' (expected none, minmax or unitsum)");
}

FeatureTransform FeatureTransform::fit(NormalizeMode mode, const RowMatrix& X) {
  FeatureTransform t;
  t.mode = mode;
  if (mode == NormalizeMode::MinMaxPerDim) {
    if (X.rows() < 1) throw DataError("cannot fit a normalization on an empty matrix");
    t.lower = X.colwise().minCoeff().transpose();
    t.range = X.colwise().maxCoeff().transpose() - t.lower;
  }
  return t;
}

RowMatrix FeatureTransform::apply(const RowMatrix& X) const {
  switch (mode) {
    case NormalizeMode::None: return X;
    case NormalizeMode::MinMaxPerDim: {
      if (X.cols() != lower.size()) throw DimensionMismatch("normalization fitted on another dimension");
      RowMatrix out(X.rows(), X.cols());
      for (Eigen::Index c = 0; c < X.cols(); ++c) {
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
          out(i, c) = range[c] > 0.0 ? std::clamp((X(i, c) - lower[c]) / range[c], 0.0, 1.0) : 0.0;
        }
      }
      return out;
    }
    case NormalizeMode::UnitSumRows: {
      RowMatrix out = X;
      for (Eigen::Index i = 0; i < X.rows(); ++i) {
        if ((X.row(i).array() < 0.0).any())
          throw DomainError("unit-sum normalization needs nonnegative rows (row " + std::to_string(i) + ")");
        const double s = X.row(i).sum();
        if (!(s > 0.0)) throw DomainError("unit-sum normalization of a zero row (row " + std::to_string(i) + ")");
        out.row(i) /= s;
      }
      return out;
    }
  }
  return X;
}

bool FeatureTransform::operator==(const FeatureTransform& other) const {
  return mode == other.mode && lower.size() == other.lower.size() && range.size() == other.range.size() &&
         lower == other.lower && range == other.range;
}

std::pair<Dataset, FeatureTransform> normalize(const Dataset& data, NormalizeMode mode) {
  data.validate();
  auto t = FeatureTransform::fit(mode, data.X);
  Dataset out = data;
  out.X = t.apply(data.X);
  return {std::move(out), std::move(t)};
}

}  // namespace tvsvm
