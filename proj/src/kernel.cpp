#include "tvsvm/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tvsvm/error.hpp"
#include "tvsvm/numeric_text.hpp"

namespace tvsvm {
namespace {

constexpr double kMinProduct = 1e-300;
constexpr double kMaxProduct = 1e300;

constexpr std::array<std::string_view, 12> kFamilyNames = {
    "Linear",   "Polynomial",     "Sigmoid", "Tanh",
    "Gaussian", "Laplacian",      "Power",   "MultiQuadratic",
    "InverseMultiQuadratic", "Log", "Cauchy", "HistogramIntersection",
};

void check_dims(std::span<const double> x, std::span<const double> z) {
  if (x.size() != z.size())
    throw DimensionMismatch("kernel arguments have dimensions " + std::to_string(x.size()) +
                            " and " + std::to_string(z.size()));
  if (x.empty()) throw DimensionMismatch("kernel arguments must have dimension >= 1");
}

void check_finite(std::span<const double> v) {
  for (double e : v)
    if (!std::isfinite(e)) throw DomainError("kernel argument has a non-finite entry");
}

void check_unit_interval(std::span<const double> v) {
  for (double e : v)
    if (e < 0.0 || e > 1.0)
      throw DomainError("HistogramIntersection inputs must lie in [0, 1], got " +
                        format_double(e));
}

void check_arguments(const KernelSpec& spec, std::span<const double> x,
                     std::span<const double> z) {
  check_dims(x, z);
  check_finite(x);
  check_finite(z);
  if (spec.family() == KernelFamily::HistogramIntersection) {
    check_unit_interval(x);
    check_unit_interval(z);
  }
}

double finite_or_throw(double value, const char* what) {
  if (!std::isfinite(value)) throw NumericalError(std::string(what) + " is not finite");
  return value;
}

double dot(std::span<const double> x, std::span<const double> z) {
  double s = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) s += x[d] * z[d];
  return s;
}

double squared_distance(std::span<const double> x, std::span<const double> z) {
  double s = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) {
    const double diff = x[d] - z[d];
    s += diff * diff;
  }
  return s;
}

double logistic(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

double log_sum_exp(double u, double v) {
  const double m = std::max(u, v);
  return m + std::log1p(std::exp(-std::abs(u - v)));
}

// sigma3 and its derivative. The argument is the pooled sum over dimensions:
// <x, z> for inner-product families, ||x - z||^2 for distance families.
double outer(const KernelSpec& s, double t) {
  switch (s.family()) {
    case KernelFamily::Linear: return t;
    case KernelFamily::Polynomial: return std::pow(t, s.p());
    case KernelFamily::Sigmoid: return logistic(s.beta() * t);
    case KernelFamily::Tanh: return std::tanh(s.a() * t + s.b());
    case KernelFamily::Gaussian: return std::exp(-s.beta() * t);
    case KernelFamily::Laplacian: return std::exp(-s.beta() * std::sqrt(t));
    case KernelFamily::Power: return -std::pow(t, 0.5 * s.p());
    case KernelFamily::MultiQuadratic: return std::sqrt(t + s.b() * s.b());
    case KernelFamily::InverseMultiQuadratic: return 1.0 / std::sqrt(t + s.b() * s.b());
    case KernelFamily::Log: return -std::log(std::pow(t, 0.5 * s.p()) + 1.0);
    case KernelFamily::Cauchy: return 1.0 / (1.0 + t / (s.sigma() * s.sigma()));
    case KernelFamily::HistogramIntersection: return t;
  }
  return t;
}

double outer_derivative(const KernelSpec& s, double t) {
  switch (s.family()) {
    case KernelFamily::Linear: return 1.0;
    case KernelFamily::Polynomial: return s.p() * std::pow(t, s.p() - 1.0);
    case KernelFamily::Sigmoid: {
      const double g = logistic(s.beta() * t);
      return s.beta() * g * (1.0 - g);
    }
    case KernelFamily::Tanh: {
      const double th = std::tanh(s.a() * t + s.b());
      return s.a() * (1.0 - th * th);
    }
    case KernelFamily::Gaussian: return -s.beta() * std::exp(-s.beta() * t);
    case KernelFamily::Laplacian: {
      const double r = std::sqrt(t);
      return -s.beta() * std::exp(-s.beta() * r) / (2.0 * r);
    }
    case KernelFamily::Power: return -0.5 * s.p() * std::pow(t, 0.5 * s.p() - 1.0);
    case KernelFamily::MultiQuadratic: return 0.5 / std::sqrt(t + s.b() * s.b());
    case KernelFamily::InverseMultiQuadratic: return -0.5 * std::pow(t + s.b() * s.b(), -1.5);
    case KernelFamily::Log: {
      const double q = std::pow(t, 0.5 * s.p());
      return -0.5 * s.p() * std::pow(t, 0.5 * s.p() - 1.0) / (q + 1.0);
    }
    case KernelFamily::Cauchy: {
      const double s2 = s.sigma() * s.sigma();
      const double k = 1.0 / (1.0 + t / s2);
      return -k * k / s2;
    }
    case KernelFamily::HistogramIntersection: return 1.0;
  }
  return 1.0;
}

}  // namespace

std::string_view family_name(KernelFamily family) {
  return kFamilyNames[static_cast<std::size_t>(family)];
}

KernelFamily parse_family(std::string_view name) {
  for (std::size_t i = 0; i < kFamilyNames.size(); ++i)
    if (kFamilyNames[i] == name) return static_cast<KernelFamily>(i);
  throw InvalidArgument("unknown kernel family '" + std::string(name) + "'");
}

bool is_distance_based(KernelFamily family) {
  switch (family) {
    case KernelFamily::Gaussian:
    case KernelFamily::Laplacian:
    case KernelFamily::Power:
    case KernelFamily::MultiQuadratic:
    case KernelFamily::InverseMultiQuadratic:
    case KernelFamily::Log:
    case KernelFamily::Cauchy: return true;
    default: return false;
  }
}

bool is_inner_product_based(KernelFamily family) {
  switch (family) {
    case KernelFamily::Linear:
    case KernelFamily::Polynomial:
    case KernelFamily::Sigmoid:
    case KernelFamily::Tanh: return true;
    default: return false;
  }
}

std::vector<std::string> family_parameters(KernelFamily family) {
  switch (family) {
    case KernelFamily::Linear: return {};
    case KernelFamily::Polynomial: return {"p"};
    case KernelFamily::Sigmoid: return {"beta"};
    case KernelFamily::Tanh: return {"a", "b"};
    case KernelFamily::Gaussian: return {"beta"};
    case KernelFamily::Laplacian: return {"beta"};
    case KernelFamily::Power: return {"p"};
    case KernelFamily::MultiQuadratic: return {"b"};
    case KernelFamily::InverseMultiQuadratic: return {"b"};
    case KernelFamily::Log: return {"p"};
    case KernelFamily::Cauchy: return {"sigma"};
    case KernelFamily::HistogramIntersection: return {"hi_beta"};
  }
  return {};
}

KernelSpec::KernelSpec(KernelFamily family, std::map<std::string, double> params)
    : family_(family) {
  const auto allowed = family_parameters(family);
  for (const auto& [name, value] : params) {
    if (std::find(allowed.begin(), allowed.end(), name) == allowed.end())
      throw InvalidArgument("kernel " + std::string(family_name(family)) +
                            " has no parameter '" + name + "'");
    if (!std::isfinite(value)) throw InvalidArgument("kernel parameter '" + name + "' is not finite");
  }
  const std::map<std::string, double> defaults = {{"p", 2.0},     {"beta", 1.0}, {"a", 1.0},
                                                  {"b", 1.0},     {"sigma", 1.0},
                                                  {"hi_beta", 100.0}};
  for (const auto& name : allowed) {
    auto it = params.find(name);
    params_[name] = it != params.end() ? it->second : defaults.at(name);
  }
  auto get = [&](const char* name, double fallback) {
    auto it = params_.find(name);
    return it != params_.end() ? it->second : fallback;
  };
  p_ = get("p", 2.0);
  beta_ = get("beta", 1.0);
  a_ = get("a", 1.0);
  b_ = get("b", 1.0);
  sigma_ = get("sigma", 1.0);
  hi_beta_ = get("hi_beta", 100.0);

  for (const char* positive : {"p", "beta", "sigma", "hi_beta"}) {
    auto it = params_.find(positive);
    if (it != params_.end() && !(it->second > 0.0))
      throw InvalidArgument("kernel parameter '" + std::string(positive) + "' must be > 0");
  }
  if (family_ == KernelFamily::Polynomial && p_ != std::floor(p_))
    throw InvalidArgument("Polynomial exponent p must be an integer");
}

double KernelSpec::param(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end())
    throw InvalidArgument("kernel " + std::string(family_name(family_)) + " has no parameter '" +
                          name + "'");
  return it->second;
}

KernelSpec KernelSpec::from_record(std::string_view record) {
  std::istringstream in{std::string(record)};
  std::string token;
  if (!(in >> token)) throw InvalidArgument("empty kernel record");
  const KernelFamily family = parse_family(token);
  std::map<std::string, double> params;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos || eq == 0)
      throw InvalidArgument("malformed kernel parameter '" + token + "'");
    const auto value = parse_double(std::string_view(token).substr(eq + 1));
    if (!value) throw InvalidArgument("malformed kernel parameter value in '" + token + "'");
    if (!params.emplace(token.substr(0, eq), *value).second)
      throw InvalidArgument("duplicate kernel parameter in '" + token + "'");
  }
  return KernelSpec(family, std::move(params));
}

std::string KernelSpec::to_record() const {
  std::string out(family_name(family_));
  for (const auto& [name, value] : params_) out += " " + name + "=" + format_double(value);
  return out;
}

std::vector<KernelSpec> parse_kernel_list(std::string_view list) {
  std::vector<KernelSpec> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    auto end = list.find(',', start);
    if (end == std::string_view::npos) end = list.size();
    auto item = list.substr(start, end - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (item.empty()) throw InvalidArgument("empty entry in kernel list");
    out.push_back(KernelSpec::from_record(item));
    start = end + 1;
  }
  return out;
}

std::string format_kernel_list(const std::vector<KernelSpec>& kernels) {
  std::string out;
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    if (i) out += ",";
    out += kernels[i].to_record();
  }
  return out;
}

ActivationQuad activation_quad(const KernelSpec& spec) {
  const ScalarActivation identity{[](double t) { return t; }, [](double) { return 1.0; }};
  ActivationQuad q;
  if (is_inner_product_based(spec.family())) {
    q.sigma1 = identity;
    q.sigma2 = identity;
    q.sigma4 = identity;
    q.sigma3 = {[spec](double t) { return outer(spec, t); },
                [spec](double t) { return outer_derivative(spec, t); }};
  } else if (is_distance_based(spec.family())) {
    q.sigma1 = {[](double t) { return std::exp(t); }, [](double t) { return std::exp(t); }};
    q.sigma2 = {[](double t) {
                  const double l = std::log(t);
                  return l * l;
                },
                [](double t) { return 2.0 * std::log(t) / t; }};
    q.sigma3 = {[spec](double t) { return outer(spec, t); },
                [spec](double t) { return outer_derivative(spec, t); }};
    q.sigma4 = {[](double t) { return std::exp(-t); }, [](double t) { return -std::exp(-t); }};
  } else {
    const double hb = spec.hi_beta();
    q.sigma1 = {[hb](double t) { return std::exp(std::exp(hb * (1.0 - t))); },
                [hb](double t) {
                  const double inner = std::exp(hb * (1.0 - t));
                  return -hb * inner * std::exp(inner);
                }};
    q.sigma2 = {[hb](double t) { return 1.0 - std::log(std::log(t)) / hb; },
                [hb](double t) { return -1.0 / (hb * t * std::log(t)); }};
    q.sigma3 = identity;
    q.sigma4 = q.sigma1;
  }
  return q;
}

double kernel_forward(const KernelSpec& spec, std::span<const double> x,
                      std::span<const double> z) {
  check_arguments(spec, x, z);
  double k = 0.0;
  switch (spec.family()) {
    case KernelFamily::Linear: k = dot(x, z); break;
    case KernelFamily::Polynomial: k = std::pow(dot(x, z), spec.p()); break;
    case KernelFamily::Sigmoid: k = 1.0 / (1.0 + std::exp(-spec.beta() * dot(x, z))); break;
    case KernelFamily::Tanh: k = std::tanh(spec.a() * dot(x, z) + spec.b()); break;
    case KernelFamily::Gaussian: k = std::exp(-spec.beta() * squared_distance(x, z)); break;
    case KernelFamily::Laplacian:
      k = std::exp(-spec.beta() * std::sqrt(squared_distance(x, z)));
      break;
    case KernelFamily::Power: k = -std::pow(std::sqrt(squared_distance(x, z)), spec.p()); break;
    case KernelFamily::MultiQuadratic:
      k = std::sqrt(squared_distance(x, z) + spec.b() * spec.b());
      break;
    case KernelFamily::InverseMultiQuadratic:
      k = 1.0 / std::sqrt(squared_distance(x, z) + spec.b() * spec.b());
      break;
    case KernelFamily::Log:
      k = -std::log(std::pow(std::sqrt(squared_distance(x, z)), spec.p()) + 1.0);
      break;
    case KernelFamily::Cauchy:
      k = 1.0 / (1.0 + squared_distance(x, z) / (spec.sigma() * spec.sigma()));
      break;
    case KernelFamily::HistogramIntersection:
      for (std::size_t d = 0; d < x.size(); ++d) k += std::min(x[d], z[d]);
      break;
  }
  return finite_or_throw(k, "kernel value");
}

KernelGradient kernel_backward(const KernelSpec& spec, std::span<const double> x,
                               std::span<const double> z, double upstream) {
  check_arguments(spec, x, z);
  const auto D = static_cast<Eigen::Index>(x.size());
  KernelGradient g{Vector::Zero(D), Vector::Zero(D)};
  if (upstream == 0.0) return g;
  const Eigen::Map<const Vector> xv(x.data(), D), zv(z.data(), D);

  if (is_inner_product_based(spec.family())) {
    const double ip = dot(x, z);
    double scale = 0.0;
    switch (spec.family()) {
      case KernelFamily::Linear: scale = 1.0; break;
      case KernelFamily::Polynomial: scale = spec.p() * std::pow(ip, spec.p() - 1.0); break;
      case KernelFamily::Sigmoid: {
        const double s = 1.0 / (1.0 + std::exp(-spec.beta() * ip));
        scale = spec.beta() * s * (1.0 - s);
        break;
      }
      case KernelFamily::Tanh: {
        const double th = std::tanh(spec.a() * ip + spec.b());
        scale = spec.a() * (1.0 - th * th);
        break;
      }
      default: break;
    }
    g.grad_x = upstream * scale * zv;
    g.grad_z = upstream * scale * xv;
  } else if (is_distance_based(spec.family())) {
    const Vector diff = xv - zv;
    const double t = diff.squaredNorm();
    const double r = std::sqrt(t);
    // Gradient w.r.t. x is coef * (x - z).
    double coef = 0.0;
    switch (spec.family()) {
      case KernelFamily::Gaussian: coef = -2.0 * spec.beta() * std::exp(-spec.beta() * t); break;
      case KernelFamily::Laplacian:
        if (r == 0.0) throw NonDifferentiable("Laplacian kernel at x == z");
        coef = -spec.beta() * std::exp(-spec.beta() * r) / r;
        break;
      case KernelFamily::Power:
        if (r == 0.0) {
          if (spec.p() < 2.0) throw NonDifferentiable("Power kernel with p < 2 at x == z");
          coef = spec.p() == 2.0 ? -2.0 : 0.0;
        } else {
          coef = -spec.p() * std::pow(r, spec.p() - 2.0);
        }
        break;
      case KernelFamily::MultiQuadratic: coef = 1.0 / std::sqrt(t + spec.b() * spec.b()); break;
      case KernelFamily::InverseMultiQuadratic:
        coef = -std::pow(t + spec.b() * spec.b(), -1.5);
        break;
      case KernelFamily::Log:
        if (r == 0.0) {
          if (spec.p() < 2.0) throw NonDifferentiable("Log kernel with p < 2 at x == z");
          coef = spec.p() == 2.0 ? -2.0 : 0.0;
        } else {
          coef = -spec.p() * std::pow(r, spec.p() - 2.0) / (std::pow(r, spec.p()) + 1.0);
        }
        break;
      case KernelFamily::Cauchy: {
        const double s2 = spec.sigma() * spec.sigma();
        const double k = 1.0 / (1.0 + t / s2);
        coef = -2.0 * k * k / s2;
        break;
      }
      default: break;
    }
    g.grad_x = upstream * coef * diff;
    g.grad_z = -g.grad_x;
  } else {
    for (Eigen::Index d = 0; d < D; ++d) {
      if (x[d] <= z[d])
        g.grad_x[d] = upstream;
      else
        g.grad_z[d] = upstream;
    }
  }
  return g;
}

SupportWeights encode_support(const KernelSpec& spec, std::span<const double> z) {
  if (z.empty()) throw DimensionMismatch("support vector must have dimension >= 1");
  check_finite(z);
  if (spec.family() == KernelFamily::HistogramIntersection) check_unit_interval(z);
  return detail::encode_support_unchecked(spec, z);
}

Vector decode_support(const KernelSpec& spec, const SupportWeights& w) {
  if (w.family != spec.family())
    throw InvalidArgument("support weights were encoded for a different kernel family");
  const Vector& o = w.omega;
  if (is_inner_product_based(spec.family())) return o;
  if (is_distance_based(spec.family())) {
    if ((o.array() <= 0.0).any()) throw DomainError("distance-kernel weights must be positive");
    return -o.array().log();
  }
  return (1.0 - o.array() / spec.hi_beta()).matrix();
}

double neural_forward(const KernelSpec& spec, std::span<const double> x,
                      const SupportWeights& w) {
  if (w.family != spec.family())
    throw InvalidArgument("support weights were encoded for a different kernel family");
  if (static_cast<Eigen::Index>(x.size()) != w.omega.size())
    throw DimensionMismatch("input and support weights differ in dimension");
  if (x.empty()) throw DimensionMismatch("kernel arguments must have dimension >= 1");
  check_finite(x);
  if (spec.family() == KernelFamily::HistogramIntersection) check_unit_interval(x);
  return detail::neural_forward_unchecked(spec, x, w);
}

NeuralGradient neural_backward(const KernelSpec& spec, std::span<const double> x,
                               const SupportWeights& w, double upstream, CuspPolicy policy) {
  neural_forward(spec, x, w);  // argument validation
  const auto D = static_cast<Eigen::Index>(x.size());
  NeuralGradient g{Vector::Zero(D), Vector::Zero(D)};
  detail::neural_backward_accumulate(spec, x, w, upstream, policy, {g.grad_x.data(), x.size()},
                                     {g.grad_omega.data(), x.size()});
  return g;
}

Vector support_backward(const KernelSpec& spec, std::span<const double> z,
                        const Vector& grad_omega) {
  const Eigen::Map<const Vector> zv(z.data(), static_cast<Eigen::Index>(z.size()));
  if (grad_omega.size() != zv.size())
    throw DimensionMismatch("gradient and support vector differ in dimension");
  if (is_inner_product_based(spec.family())) return grad_omega;
  if (is_distance_based(spec.family()))
    return (-grad_omega.array() * (-zv.array()).exp()).matrix();
  return -spec.hi_beta() * grad_omega;
}

namespace detail {

SupportWeights encode_support_unchecked(const KernelSpec& spec, std::span<const double> z) {
  const auto D = static_cast<Eigen::Index>(z.size());
  SupportWeights w{spec.family(), Vector(D)};
  for (Eigen::Index d = 0; d < D; ++d) {
    if (is_inner_product_based(spec.family()))
      w.omega[d] = z[d];
    else if (is_distance_based(spec.family()))
      w.omega[d] = std::exp(-z[d]);
    else
      w.omega[d] = spec.hi_beta() * (1.0 - z[d]);
  }
  return w;
}

double neural_forward_unchecked(const KernelSpec& spec, std::span<const double> x,
                                const SupportWeights& w) {
  const double* omega = w.omega.data();
  double t = 0.0;
  if (is_inner_product_based(spec.family())) {
    for (std::size_t d = 0; d < x.size(); ++d) t += x[d] * omega[d];
  } else if (is_distance_based(spec.family())) {
    for (std::size_t d = 0; d < x.size(); ++d) {
      double u = std::exp(x[d]) * omega[d];
      if (std::isnan(u)) throw NumericalError("non-finite intermediate in neural kernel path");
      u = std::clamp(u, kMinProduct, kMaxProduct);
      const double l = std::log(u);
      t += l * l;
    }
  } else {
    // sigma2(sigma1(x) * omega) = 1 - log(e^{hb(1-x)} + e^{hb(1-z)}) / hb, with
    // omega held as hb(1-z).
    const double hb = spec.hi_beta();
    for (std::size_t d = 0; d < x.size(); ++d)
      t += 1.0 - log_sum_exp(hb * (1.0 - x[d]), omega[d]) / hb;
  }
  return finite_or_throw(outer(spec, t), "neural kernel value");
}

void neural_backward_accumulate(const KernelSpec& spec, std::span<const double> x,
                                const SupportWeights& w, double upstream, CuspPolicy policy,
                                std::span<double> grad_x, std::span<double> grad_omega) {
  if (upstream == 0.0) return;
  const double* omega = w.omega.data();
  const std::size_t D = x.size();

  if (is_inner_product_based(spec.family())) {
    double t = 0.0;
    for (std::size_t d = 0; d < D; ++d) t += x[d] * omega[d];
    const double s = finite_or_throw(upstream * outer_derivative(spec, t), "kernel derivative");
    for (std::size_t d = 0; d < D; ++d) {
      grad_x[d] += s * omega[d];
      grad_omega[d] += s * x[d];
    }
    return;
  }

  if (is_distance_based(spec.family())) {
    // d/dx sigma2(e^x w) = 2 log(u); d/dw sigma2(e^x w) = 2 log(u) / w.
    double logs[64];
    std::vector<double> heap;
    double* l = logs;
    if (D > 64) {
      heap.resize(D);
      l = heap.data();
    }
    double t = 0.0;
    for (std::size_t d = 0; d < D; ++d) {
      double u = std::exp(x[d]) * omega[d];
      if (std::isnan(u)) throw NumericalError("non-finite intermediate in neural kernel path");
      const bool clamped = u < kMinProduct || u > kMaxProduct;
      u = std::clamp(u, kMinProduct, kMaxProduct);
      const double lu = std::log(u);
      t += lu * lu;
      l[d] = clamped ? 0.0 : lu;
    }
    const double d3 = outer_derivative(spec, t);
    if (!std::isfinite(d3)) {
      if (t == 0.0) {
        if (policy == CuspPolicy::ZeroSubgradient) return;
        throw NonDifferentiable(std::string(family_name(spec.family())) +
                                " kernel is not differentiable at x == z");
      }
      throw NumericalError("kernel derivative is not finite");
    }
    const double s = upstream * d3;
    for (std::size_t d = 0; d < D; ++d) {
      if (l[d] == 0.0) continue;
      grad_x[d] += s * 2.0 * l[d];
      grad_omega[d] += s * 2.0 * l[d] / omega[d];
    }
    return;
  }

  const double hb = spec.hi_beta();
  for (std::size_t d = 0; d < D; ++d) {
    const double share_x = logistic(hb * (1.0 - x[d]) - omega[d]);
    grad_x[d] += upstream * share_x;
    grad_omega[d] += -upstream * (1.0 - share_x) / hb;
  }
}

}  // namespace detail
}  // namespace tvsvm
