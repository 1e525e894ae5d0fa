#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "tvsvm/types.hpp"

namespace tvsvm::testing {

inline std::vector<double> random_vector(std::mt19937_64& rng, int n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(static_cast<std::size_t>(n));
  for (auto& e : v) e = u(rng);
  return v;
}

inline RowMatrix random_matrix(std::mt19937_64& rng, int rows, int cols, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  RowMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = u(rng);
  return m;
}

// Error measure shared by every gradient test: relative once the values
// exceed 1, absolute below.
inline double rel_error(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

inline std::span<const double> span_of(const std::vector<double>& v) { return {v.data(), v.size()}; }

}  // namespace tvsvm::testing
