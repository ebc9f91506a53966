// Shared test fixtures.

#ifndef NLSQI_TESTS_HELPERS_HPP
#define NLSQI_TESTS_HELPERS_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "nlsqi/state.hpp"

namespace testing_util {

using nlsqi::cplx;
using nlsqi::FourierState;

/// Random coefficients with |u_k| ~ amplitude / (1+|k|)^decay, seeded
/// independently of the library's generator.
inline FourierState random_state(int m, unsigned seed, double amplitude = 1.0, double decay = 1.0) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  FourierState u(m);
  for (int k = -m; k <= m; ++k) u[k] = amplitude / std::pow(1.0 + std::abs(k), decay) * cplx{nd(gen), nd(gen)};
  return u;
}

inline std::vector<cplx> centred(const FourierState& u, int n) {
  std::vector<cplx> w(static_cast<std::size_t>(2 * n + 1));
  for (int k = -n; k <= n; ++k) w[static_cast<std::size_t>(k + n)] = u.coeff(k);
  return w;
}

inline double max_abs_diff(const FourierState& a, const FourierState& b) {
  double e = 0.0;
  const int m = std::max(a.m_ambient(), b.m_ambient());
  for (int k = -m; k <= m; ++k) e = std::max(e, std::abs(a.coeff(k) - b.coeff(k)));
  return e;
}

inline double rel_err(cplx a, cplx b) { return std::abs(a - b) / std::max(1e-300, std::max(std::abs(a), std::abs(b))); }

}  // namespace testing_util

#endif  // NLSQI_TESTS_HELPERS_HPP
