#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tvsvm/skeleton.hpp"
#include "tvsvm/types.hpp"

namespace tvsvm {

// Feature rows with integer labels: {-1, +1} for binary problems, any
// other label set is treated as multiclass.
struct Dataset {
  RowMatrix X;
  Eigen::VectorXi y;
  std::vector<std::string> feature_names;

  int size() const { return static_cast<int>(X.rows()); }
  int dim() const { return static_cast<int>(X.cols()); }
  bool is_binary() const;
  // Sorted distinct labels.
  std::vector<int> classes() const;
  void validate() const;
  Dataset subset(const std::vector<int>& rows) const;
};

// CSV: header row, comma separated, one integer column named "label".
Dataset read_csv(std::istream& in);
void write_csv(const Dataset& data, std::ostream& out);
Dataset load_csv(const std::filesystem::path& path);
void save_csv(const Dataset& data, const std::filesystem::path& path);

struct LabeledSkeleton {
  int label = 0;
  SkeletonSequence sequence;
};

// {"videos": [{"label": int, "frames": [[[x, y(, z)] per joint] per frame]}]}
std::vector<LabeledSkeleton> parse_skeletons(std::string_view json_text);
std::vector<LabeledSkeleton> load_skeletons(const std::filesystem::path& path);

Dataset featurize(const std::vector<LabeledSkeleton>& videos, int chunks);

// Two interleaving unit half-circles, labels -1 (upper) and +1 (lower),
// with isotropic Gaussian noise of standard deviation `noise`.
Dataset make_two_moons(int n, double noise, std::uint64_t seed);

// Gaussian blobs at (+-1, +-1); label +1 where the blob centre has
// x0 * x1 > 0, else -1.
Dataset make_xor_gaussians(int n, double spread, std::uint64_t seed);

struct SplitSpec {
  double train_fraction = 0.5;
  std::uint64_t seed = 0;
  bool stratified = false;
};

std::pair<Dataset, Dataset> split(const Dataset& data, const SplitSpec& spec);

enum class NormalizeMode { None, MinMaxPerDim, UnitSumRows };

std::string_view normalize_mode_name(NormalizeMode mode);
NormalizeMode parse_normalize_mode(std::string_view name);

// Feature normalization fitted on training data.
//
// MinMaxPerDim maps the fitted range of each dimension onto [0, 1] and clamps
// anything outside it; constant dimensions map to 0. UnitSumRows rescales
// each row to sum to 1 and rejects rows with negative entries or zero sum.
struct FeatureTransform {
  NormalizeMode mode = NormalizeMode::None;
  Vector lower;
  Vector range;

  static FeatureTransform fit(NormalizeMode mode, const RowMatrix& X);
  RowMatrix apply(const RowMatrix& X) const;
  bool operator==(const FeatureTransform& other) const;
};

std::pair<Dataset, FeatureTransform> normalize(const Dataset& data, NormalizeMode mode);

}  // namespace tvsvm
