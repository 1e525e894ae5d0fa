#pragma once

#include <array>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tvsvm/types.hpp"

namespace tvsvm {

enum class KernelFamily {
  Linear,
  Polynomial,
  Sigmoid,
  Tanh,
  Gaussian,
  Laplacian,
  Power,
  MultiQuadratic,
  InverseMultiQuadratic,
  Log,
  Cauchy,
  HistogramIntersection,
};

inline constexpr std::array<KernelFamily, 12> kAllFamilies = {
    KernelFamily::Linear,         KernelFamily::Polynomial,
    KernelFamily::Sigmoid,        KernelFamily::Tanh,
    KernelFamily::Gaussian,       KernelFamily::Laplacian,
    KernelFamily::Power,          KernelFamily::MultiQuadratic,
    KernelFamily::InverseMultiQuadratic, KernelFamily::Log,
    KernelFamily::Cauchy,         KernelFamily::HistogramIntersection,
};

std::string_view family_name(KernelFamily family);
KernelFamily parse_family(std::string_view name);

// True for the shift-invariant families evaluated through ||x - z||^2.
bool is_distance_based(KernelFamily family);
bool is_inner_product_based(KernelFamily family);

// Names of the hyperparameters a family accepts.
std::vector<std::string> family_parameters(KernelFamily family);

// An elementary kernel: a family plus its hyperparameters.
//
// Missing hyperparameters take their defaults (p=2, beta=1, a=1, b=1,
// sigma=1, hi_beta=100). Parameters the family does not use are rejected, as
// are non-positive values of p, beta, sigma and hi_beta. Polynomial requires
// an integral p so that negative inner products stay real.
//
// The text record is the family name followed by space separated key=value
// pairs, e.g. "Gaussian beta=0.5". to_record() always writes every
// parameter of the family.
class KernelSpec {
 public:
  explicit KernelSpec(KernelFamily family, std::map<std::string, double> params = {});

  static KernelSpec from_record(std::string_view record);
  std::string to_record() const;

  KernelFamily family() const { return family_; }
  const std::map<std::string, double>& params() const { return params_; }
  double param(const std::string& name) const;

  double p() const { return p_; }
  double beta() const { return beta_; }
  double a() const { return a_; }
  double b() const { return b_; }
  double sigma() const { return sigma_; }
  double hi_beta() const { return hi_beta_; }

  bool operator==(const KernelSpec& other) const {
    return family_ == other.family_ && params_ == other.params_;
  }

 private:
  KernelFamily family_;
  std::map<std::string, double> params_;
  double p_ = 2.0, beta_ = 1.0, a_ = 1.0, b_ = 1.0, sigma_ = 1.0, hi_beta_ = 100.0;
};

// Parses a comma separated list of kernel records.
std::vector<KernelSpec> parse_kernel_list(std::string_view list);
std::string format_kernel_list(const std::vector<KernelSpec>& kernels);

struct ScalarActivation {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
};

// The four scalar activations that factor a kernel as
// k(x, z) = sigma3(sum_d sigma2(sigma1(x_d) * sigma4(z_d))).
//
// For HistogramIntersection the signs are arranged so the composition is a
// soft minimum: sigma1(t) = exp(exp(hi_beta (1 - t))), sigma2(t) = 1 -
// log(log t) / hi_beta. These overflow for hi_beta beyond ~7; the evaluation
// routines below use an equivalent log-domain form instead.
struct ActivationQuad {
  ScalarActivation sigma1, sigma2, sigma3, sigma4;
};

ActivationQuad activation_quad(const KernelSpec& spec);

// Per-dimension weights omega_d = sigma4(z_d) for one support vector.
//
// HistogramIntersection stores log(log(sigma4(z_d))) = hi_beta (1 - z_d)
// rather than sigma4 itself, which is not representable in double precision.
struct SupportWeights {
  KernelFamily family = KernelFamily::Linear;
  Vector omega;
};

// Closed-form kernel value.
double kernel_forward(const KernelSpec& spec, std::span<const double> x, std::span<const double> z);

struct KernelGradient {
  Vector grad_x;
  Vector grad_z;
};

// Upstream-scaled gradient of the closed form. HistogramIntersection uses
// the subgradient that assigns ties to x.
KernelGradient kernel_backward(const KernelSpec& spec, std::span<const double> x,
                               std::span<const double> z, double upstream);

SupportWeights encode_support(const KernelSpec& spec, std::span<const double> z);
Vector decode_support(const KernelSpec& spec, const SupportWeights& weights);

// Kernel value through the activation decomposition.
double neural_forward(const KernelSpec& spec, std::span<const double> x, const SupportWeights& w);

enum class CuspPolicy {
  // Throw NonDifferentiable where the kernel has no derivative.
  Strict,
  // Return the zero subgradient at x == z for kernels with a cusp there.
  ZeroSubgradient,
};

struct NeuralGradient {
  Vector grad_x;
  Vector grad_omega;
};

NeuralGradient neural_backward(const KernelSpec& spec, std::span<const double> x,
                               const SupportWeights& w, double upstream,
                               CuspPolicy policy = CuspPolicy::Strict);

// Maps a gradient w.r.t. omega back to the support vector z.
Vector support_backward(const KernelSpec& spec, std::span<const double> z,
                        const Vector& grad_omega);

namespace detail {

// Unchecked variants used on learned support vectors, which may leave the
// [0, 1] histogram domain during training.
SupportWeights encode_support_unchecked(const KernelSpec& spec, std::span<const double> z);
double neural_forward_unchecked(const KernelSpec& spec, std::span<const double> x,
                                const SupportWeights& w);
void neural_backward_accumulate(const KernelSpec& spec, std::span<const double> x,
                                const SupportWeights& w, double upstream, CuspPolicy policy,
                                std::span<double> grad_x, std::span<double> grad_omega);

}  // namespace detail

}  // namespace tvsvm
