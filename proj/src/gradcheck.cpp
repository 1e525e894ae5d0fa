#include "tvsvm/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "tvsvm/error.hpp"

namespace tvsvm {
namespace {

constexpr double kMinSeparation = 0.05;

double component_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({1.0, std::abs(analytic), std::abs(numeric)});
}

}  // namespace

GradcheckResult check_gradients(const TvSvmModel& model, const RowMatrix& X, const Eigen::VectorXi& y, double C,
                                const GradcheckOptions& options) {
  ModelGradient g = gradients(model, X, y, C);
  if (options.corrupt) g.alpha(0, 0) += 1e-2;
  const double h = options.step;
  GradcheckResult r;

  auto record = [&](double analytic, double numeric, const std::string& name) {
    ++r.parameters;
    const double e = component_error(analytic, numeric);
    if (!(e <= r.max_error)) {  // also catches NaN
      r.max_error = std::isnan(e) ? std::numeric_limits<double>::infinity() : e;
      r.worst_parameter = name;
    }
  };
  auto central = [&](auto&& perturb) {
    TvSvmModel m = model;
    perturb(m, h);
    const double up = objective(m, X, y, C).total;
    m = model;
    perturb(m, -h);
    const double down = objective(m, X, y, C).total;
    return (up - down) / (2.0 * h);
  };

  for (Eigen::Index k = 0; k < model.alpha.rows(); ++k)
    for (Eigen::Index j = 0; j < model.alpha.cols(); ++j)
      record(g.alpha(k, j), central([&](TvSvmModel& m, double d) { m.alpha(k, j) += d; }),
             "alpha[" + std::to_string(k) + "," + std::to_string(j) + "]");
  for (Eigen::Index k = 0; k < model.bias.size(); ++k)
    record(g.bias[k], central([&](TvSvmModel& m, double d) { m.bias[k] += d; }), "bias[" + std::to_string(k) + "]");
  for (Eigen::Index j = 0; j < model.support.rows(); ++j)
    for (Eigen::Index d = 0; d < model.support.cols(); ++d) {
      const std::string name = "support[" + std::to_string(j) + "," + std::to_string(d) + "]";
      if (model.frozen_support) {
        record(g.support(j, d), 0.0, name);
        if (g.support(j, d) != 0.0) r.max_error = std::numeric_limits<double>::infinity(), r.worst_parameter = name;
      } else {
        record(g.support(j, d), central([&](TvSvmModel& m, double s) { m.support(j, d) += s; }), name);
      }
    }
  for (std::size_t l = 0; l < model.net.raw_weights().size(); ++l) {
    const auto& w = model.net.raw_weights()[l];
    for (Eigen::Index q = 0; q < w.rows(); ++q)
      for (Eigen::Index p = 0; p < w.cols(); ++p)
        record(g.raw_weights[l](q, p),
               central([&](TvSvmModel& m, double s) {
                 auto raw = m.net.raw_weights();
                 raw[l](q, p) += s;
                 m.net.set_raw_weights(std::move(raw));
               }),
               "net[" + std::to_string(l) + "](" + std::to_string(q) + "," + std::to_string(p) + ")");
  }
  r.passed = r.max_error <= options.tolerance;
  return r;
}

KernelSpec random_kernel_spec(KernelFamily family, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  switch (family) {
    case KernelFamily::Linear: return KernelSpec(family);
    case KernelFamily::Polynomial: return KernelSpec(family, {{"p", static_cast<double>(1 + rng() % 3)}});
    case KernelFamily::Sigmoid: return KernelSpec(family, {{"beta", u(0.5, 2.0)}});
    case KernelFamily::Tanh: return KernelSpec(family, {{"a", u(0.5, 1.5)}, {"b", u(-1.0, 1.0)}});
    case KernelFamily::Gaussian:
    case KernelFamily::Laplacian: return KernelSpec(family, {{"beta", u(0.5, 2.0)}});
    case KernelFamily::Power:
    case KernelFamily::Log: return KernelSpec(family, {{"p", u(0.5, 3.0)}});
    case KernelFamily::MultiQuadratic:
    case KernelFamily::InverseMultiQuadratic: return KernelSpec(family, {{"b", u(0.5, 2.0)}});
    case KernelFamily::Cauchy: return KernelSpec(family, {{"sigma", u(0.5, 2.0)}});
    case KernelFamily::HistogramIntersection: return KernelSpec(family, {{"hi_beta", u(10.0, 100.0)}});
  }
  throw InvalidArgument("unknown kernel family");
}

GradcheckInstance random_gradcheck_instance(const std::vector<KernelSpec>& kernels, int mkl_layers, bool frozen,
                                            Activation activation, std::uint64_t seed, int hidden_units) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick_n(1, 5), pick_d(1, 4), pick_samples(1, 10);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const bool histogram = std::any_of(kernels.begin(), kernels.end(), [](const KernelSpec& k) {
    return k.family() == KernelFamily::HistogramIntersection;
  });
  auto coordinate = [&] { return histogram ? unit(rng) : 0.7 * gauss(rng); };

  const int N = pick_n(rng), D = pick_d(rng), n = pick_samples(rng);
  const bool multiclass = rng() % 4 == 0;
  GradcheckInstance inst;
  auto& m = inst.model;
  m.kernels = kernels;
  m.net = DeepKernelNet::with_layers(static_cast<int>(kernels.size()), mkl_layers, hidden_units, 0.01, activation);
  auto raw = m.net.raw_weights();
  for (auto& w : raw)
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = gauss(rng);
  m.net.set_raw_weights(std::move(raw));
  m.frozen_support = frozen;
  if (multiclass) m.classes = {0, 1, 2};
  const int heads = multiclass ? 3 : 1;
  // Distance cusps sit at r = 0; a point a hair away from another makes central
  // differences ill-conditioned there, so keep every sampled pair apart.
  std::vector<Eigen::VectorXd> placed;
  auto separated_row = [&] {
    Eigen::VectorXd row(D);
    for (int attempt = 0;; ++attempt) {
      for (int j = 0; j < D; ++j) row[j] = coordinate();
      const bool clear = std::none_of(placed.begin(), placed.end(),
                                      [&](const Eigen::VectorXd& p) { return (p - row).norm() < kMinSeparation; });
      if (clear || attempt == 100) break;
    }
    placed.push_back(row);
    return row;
  };
  m.support.resize(N, D);
  for (int i = 0; i < N; ++i) m.support.row(i) = separated_row().transpose();
  m.alpha.resize(heads, N);
  for (Eigen::Index i = 0; i < m.alpha.size(); ++i) m.alpha.data()[i] = gauss(rng);
  m.bias.resize(heads);
  for (int k = 0; k < heads; ++k) m.bias[k] = 0.5 * gauss(rng);

  inst.X.resize(n, D);
  for (int i = 0; i < n; ++i) inst.X.row(i) = separated_row().transpose();
  inst.y.resize(n);
  for (int i = 0; i < n; ++i) inst.y[i] = multiclass ? static_cast<int>(rng() % 3) : (rng() % 2 ? 1 : -1);
  inst.C = 0.5 + 1.5 * unit(rng);
  m.validate();
  return inst;
}

}  // namespace tvsvm
