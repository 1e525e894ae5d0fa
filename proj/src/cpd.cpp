#include "tvsvm/cpd.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

namespace tvsvm {
namespace {

double default_tolerance(Eigen::Index n) { return 1e-8 * static_cast<double>(n); }

std::mt19937_64 trial_rng(std::uint64_t seed, int trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial)};
  return std::mt19937_64(seq);
}

// min_{v} v'Kv / v'v over the Berg transform, plus a zero-sum witness built
// from the minimizing eigenvector: c = (v, -sum v) gives c'Kc = v'K^v.
struct BergEigen {
  double min_eigenvalue = 0.0;
  Vector coefficients;
};

BergEigen berg_eigen(const GramMatrix& gram) {
  const GramMatrix b = berg_transform(gram);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(b.values);
  if (solver.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
  BergEigen out;
  out.min_eigenvalue = solver.eigenvalues()[0];
  const Vector v = solver.eigenvectors().col(0);
  out.coefficients.resize(gram.size());
  out.coefficients.head(v.size()) = v;
  out.coefficients[gram.size() - 1] = -v.sum();
  return out;
}

}  // namespace

void GramMatrix::validate() const {
  if (values.rows() != values.cols()) throw DimensionMismatch("Gram matrix must be square");
  if (!values.allFinite()) throw NumericalError("Gram matrix has non-finite entries");
  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  if ((values - values.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw InvalidArgument("Gram matrix is not symmetric");
}

GramMatrix gram_matrix(const KernelEvaluator& kernel, const RowMatrix& points, std::string provenance) {
  const Eigen::Index n = points.rows();
  GramMatrix g{Eigen::MatrixXd(n, n), std::move(provenance)};
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) g.values(i, j) = kernel(row_span(points, i), row_span(points, j));
  return g;
}

GramMatrix gram_matrix(const KernelSpec& spec, const RowMatrix& points) {
  return gram_matrix([&](auto x, auto z) { return kernel_forward(spec, x, z); }, points, spec.to_record());
}

std::string_view verdict_name(CpdVerdict v) {
  return v == CpdVerdict::PassedSampled ? "PassedSampled" : "FailedWithWitness";
}

CpdReport cpd_sampled_check(const GramMatrix& gram, const RowMatrix& points, const CpdOptions& options) {
  gram.validate();
  const Eigen::Index n = gram.size();
  if (n < 2) throw InvalidArgument("c.p.d. check needs at least two points");
  if (points.rows() != n) throw DimensionMismatch("Gram matrix and point set sizes differ");
  if (options.trials < 1) throw InvalidArgument("c.p.d. check needs at least one trial");

  CpdReport report;
  report.trials = options.trials;
  report.tolerance = options.tolerance.value_or(default_tolerance(n));
  report.min_normalized_form = std::numeric_limits<double>::infinity();
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector c(n);
  for (int t = 0; t < options.trials; ++t) {
    auto rng = trial_rng(options.seed, t);
    for (Eigen::Index i = 0; i < n; ++i) c[i] = gauss(rng);
    c.array() -= c.mean();
    const double form = c.dot(gram.values * c);
    report.min_normalized_form = std::min(report.min_normalized_form, form / c.squaredNorm());
    if (form < -report.tolerance && !report.witness) {
      report.verdict = CpdVerdict::FailedWithWitness;
      report.witness = CpdWitness{points, c, form};
    }
  }
  report.min_eig_after_berg = berg_eigen(gram).min_eigenvalue;
  return report;
}

CpdReport cpd_sampled_check(const KernelEvaluator& kernel, const RowMatrix& points, const CpdOptions& options) {
  return cpd_sampled_check(gram_matrix(kernel, points), points, options);
}

GramMatrix berg_transform(const GramMatrix& gram) {
  gram.validate();
  const Eigen::Index n = gram.size();
  if (n < 2) throw InvalidArgument("Berg transform needs at least two points");
  const Eigen::Index m = n - 1;
  const auto& K = gram.values;
  GramMatrix out{Eigen::MatrixXd(m, m), gram.provenance};
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) out.values(i, j) = K(i, j) - K(i, m) - K(m, j) + K(m, m);
  return out;
}

PdResult pd_check(const GramMatrix& gram, double tol) {
  gram.validate();
  if (gram.size() < 1) throw InvalidArgument("pd check needs a non-empty matrix");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram.values, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
  const double lo = solver.eigenvalues()[0];
  return {lo >= -tol, lo};
}

CpdReport cpd_certified_check(const GramMatrix& gram, const RowMatrix& points, const CpdOptions& options) {
  CpdReport report = cpd_sampled_check(gram, points, options);
  if (report.passed() && report.min_eig_after_berg < -report.tolerance) {
    const BergEigen e = berg_eigen(gram);
    report.verdict = CpdVerdict::FailedWithWitness;
    report.witness = CpdWitness{points, e.coefficients, e.coefficients.dot(gram.values * e.coefficients)};
  }
  return report;
}

CpdReport composition_closure_check(const DeepKernelNet& net, const std::vector<KernelSpec>& kernels,
                                    const RowMatrix& points, const CpdOptions& options) {
  if (static_cast<int>(kernels.size()) != net.input_size())
    throw DimensionMismatch("net expects " + std::to_string(net.input_size()) + " kernels, got " +
                            std::to_string(kernels.size()));
  std::vector<GramMatrix> grams;
  for (const auto& k : kernels) {
    grams.push_back(gram_matrix(k, points));
    const CpdReport r = cpd_certified_check(grams.back(), points, options);
    if (!r.passed())
      throw CompositionPrecondition("elementary kernel '" + k.to_record() + "' is not c.p.d. on these points");
  }
  const Eigen::Index n = points.rows();
  GramMatrix composed{Eigen::MatrixXd(n, n), "composed"};
  std::vector<double> kv(kernels.size());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      for (std::size_t q = 0; q < kernels.size(); ++q) kv[q] = grams[q].values(i, j);
      composed.values(i, j) = mkl_output(net, kv);
    }

  return cpd_certified_check(composed, points, options);
}

}  // namespace tvsvm
