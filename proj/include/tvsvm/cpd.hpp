#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tvsvm/deep_kernel_net.hpp"
#include "tvsvm/error.hpp"
#include "tvsvm/kernel.hpp"
#include "tvsvm/types.hpp"

namespace tvsvm {

using KernelEvaluator = std::function<double(std::span<const double>, std::span<const double>)>;

// Symmetric matrix of pairwise kernel values, tagged with where it came from.
struct GramMatrix {
  Eigen::MatrixXd values;
  std::string provenance;

  Eigen::Index size() const { return values.rows(); }
  // Square and finite, symmetric within 1e-10 (relative to its largest entry
  // when that exceeds 1).
  void validate() const;
};

GramMatrix gram_matrix(const KernelEvaluator& kernel, const RowMatrix& points, std::string provenance = {});
GramMatrix gram_matrix(const KernelSpec& spec, const RowMatrix& points);

enum class CpdVerdict { PassedSampled, FailedWithWitness };
std::string_view verdict_name(CpdVerdict v);

// A zero-sum coefficient vector whose quadratic form is negative. Unlike a
// pass, this is a proof that the kernel is not c.p.d.
struct CpdWitness {
  RowMatrix points;
  Vector coefficients;
  double quadratic_form = 0.0;
};

struct CpdReport {
  CpdVerdict verdict = CpdVerdict::PassedSampled;
  int trials = 0;
  double tolerance = 0.0;
  // Smallest sampled quadratic form, normalized by |c|^2.
  double min_normalized_form = 0.0;
  double min_eig_after_berg = 0.0;
  std::optional<CpdWitness> witness;

  bool passed() const { return verdict == CpdVerdict::PassedSampled; }
};

struct CpdOptions {
  int trials = 1000;
  // Defaults to 1e-8 * n.
  std::optional<double> tolerance;
  std::uint64_t seed = 0;
};

// Draws `trials` coefficient vectors c ~ N(0, I), centred to zero sum, and
// checks c' K c >= -tol for each. Trial t uses its own generator seeded
// from (seed, t), so results do not depend on evaluation order.
CpdReport cpd_sampled_check(const GramMatrix& gram, const RowMatrix& points, const CpdOptions& options = {});
CpdReport cpd_sampled_check(const KernelEvaluator& kernel, const RowMatrix& points,
                            const CpdOptions& options = {});

// The sampled check, then the Berg eigen test: a sampled pass whose Berg
// transform has an eigenvalue below -tol is overturned, with the offending
// eigenvector (extended to zero sum) as the witness.
CpdReport cpd_certified_check(const GramMatrix& gram, const RowMatrix& points, const CpdOptions& options = {});

// K^_ij = K_ij - K_in - K_nj + K_nn over the first n - 1 points, anchored
// at the last point n.
GramMatrix berg_transform(const GramMatrix& gram);

struct PdResult {
  bool passed = false;
  double min_eigenvalue = 0.0;
};

// Smallest eigenvalue by a symmetric eigensolver; passes iff >= -tol.
PdResult pd_check(const GramMatrix& gram, double tol);

// An elementary kernel failed its own c.p.d. check, so the composition
// check has nothing to say.
class CompositionPrecondition : public Error {
 public:
  using Error::Error;
};

// Builds the net's Gram matrix over `points` from the closed-form elementary
// kernels, then requires both the sampled check and a positive semidefinite
// Berg transform. A failed eigen test is turned into a witness built from
// the offending eigenvector.
CpdReport composition_closure_check(const DeepKernelNet& net, const std::vector<KernelSpec>& kernels,
                                    const RowMatrix& points, const CpdOptions& options = {});

}  // namespace tvsvm
