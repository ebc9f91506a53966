// nlsqi: spectral and Monte Carlo tools for the truncated quintic NLS on the torus.
//
// Normal-form quantities of the truncated flow:
//
//   R_{s,N}(u) = 1/6 Re sum_{Omega != 0} (psi/Omega) w1 w2* w3 w4* w5 w6*
//   E_{s,N}(u) = 1/2 |||Pi_N u|||^2 + R_{s,N}(u)
//   Q_{s,N}(u) = Im(-1/6 q0 + 1/2 q1 - 1/2 q2) = d/dt E_{s,N}(Pi_N Phi_N(t) u) at t = 0
//
// with w = Pi_N u, sums over k1-k2+k3-k4+k5-k6 = 0, |k_j| <= N, and
//   q0 = sum_{Omega = 0} psi w1 w2* ... w6*
//   q1 = sum_{Omega != 0} (psi/Omega) v1 w2* w3 w4* w5 w6*
//   q2 = sum_{Omega != 0} (psi/Omega) w1 v2* w3 w4* w5 w6*
// where v = Pi_N(|w|^4 w) collapses the inner five-fold sums.
//
// Two evaluation routes give the same sums: direct enumeration of the
// constrained tuples (five free indices) and a space-time route that groups
// tuples by Omega through an FFT in an auxiliary time variable.

#ifndef NLSQI_MODIFIED_ENERGY_HPP
#define NLSQI_MODIFIED_ENERGY_HPP

#include <array>
#include <complex>
#include <vector>

#include "nlsqi/parallel.hpp"
#include "nlsqi/resonance.hpp"
#include "nlsqi/spectral.hpp"

namespace nlsqi {

enum class SumStrategy { Auto, Enumerate, SpaceTime };

struct EnergyParams {
  static constexpr int kAmbient = -1;  ///< n_cut sentinel: use the state's M

  int n_cut = kAmbient;
  WeightFamily family{};
  SumStrategy strategy = SumStrategy::Auto;

  static EnergyParams ambient(const WeightFamily& family) { return {kAmbient, family}; }

  int resolve(const FourierState& u) const {
    if (n_cut == kAmbient) return u.m_ambient();
    if (n_cut < 0) throw Error("EnergyParams: negative truncation");
    if (n_cut > u.m_ambient()) throw TruncationExceedsAmbient(n_cut, u.m_ambient());
    return n_cut;
  }

  /// Enumeration up to N = 5 (where it is faster), the space-time route above.
  SumStrategy resolve_strategy(int n) const {
    if (strategy != SumStrategy::Auto) return strategy;
    return n <= 5 ? SumStrategy::Enumerate : SumStrategy::SpaceTime;
  }
};

struct QComponents {
  cplx q0{};
  cplx q1{};
  cplx q2{};
};

/// Raw complex sums behind R and Q, before taking Re/Im.
struct NormalFormSums {
  cplx r_form{};  ///< sum_{Omega != 0} (psi/Omega) w1 w2* ... w6*
  QComponents q{};
};

namespace detail {

inline std::vector<double> weight_table(const WeightFamily& family, int n) {
  std::vector<double> m(static_cast<std::size_t>(2 * n + 1));
  for (int k = -n; k <= n; ++k) m[static_cast<std::size_t>(k + n)] = family(k);
  return m;
}

/// Enumeration over (k1..k5) with k6 solved; parallel over k1 with a fixed
/// reduction order. `v` may be empty when only r_form is wanted.
inline NormalFormSums enumerate_sums(const std::vector<cplx>& w, const std::vector<cplx>& v,
                                     const std::vector<double>& m, int n) {
  const bool with_q = !v.empty();
  const std::size_t width = static_cast<std::size_t>(2 * n + 1);
  std::vector<cplx> wc(width), vc(with_q ? width : 0);
  std::vector<long long> sq(width);
  for (std::size_t i = 0; i < width; ++i) {
    wc[i] = std::conj(w[i]);
    if (with_q) vc[i] = std::conj(v[i]);
    const long long k = static_cast<long long>(i) - n;
    sq[i] = k * k;
  }
  std::vector<std::array<cplx, 4>> partial(width);
  parallel_for(width, [&](std::size_t i1) {
    cplx r{}, q0{}, q1{}, q2{};
    const int k1 = static_cast<int>(i1) - n;
    for (int k2 = -n; k2 <= n; ++k2) {
      const std::size_t i2 = static_cast<std::size_t>(k2 + n);
      for (int k3 = -n; k3 <= n; ++k3) {
        const std::size_t i3 = static_cast<std::size_t>(k3 + n);
        for (int k4 = -n; k4 <= n; ++k4) {
          const std::size_t i4 = static_cast<std::size_t>(k4 + n);
          const int partial_sum = k1 - k2 + k3 - k4;
          const cplx a34 = w[i3] * wc[i4];
          const long long om4 = sq[i1] - sq[i2] + sq[i3] - sq[i4];
          const double ps4 = m[i1] - m[i2] + m[i3] - m[i4];
          const int k5_lo = std::max(-n, -n - partial_sum);
          const int k5_hi = std::min(n, n - partial_sum);
          for (int k5 = k5_lo; k5 <= k5_hi; ++k5) {
            const std::size_t i5 = static_cast<std::size_t>(k5 + n);
            const std::size_t i6 = static_cast<std::size_t>(partial_sum + k5 + n);
            const long long om = om4 + sq[i5] - sq[i6];
            const double ps = ps4 + m[i5] - m[i6];
            const cplx tail = a34 * w[i5] * wc[i6];
            if (om == 0) {
              if (with_q) q0 += ps * (w[i1] * wc[i2] * tail);
            } else {
              const double c = ps / static_cast<double>(om);
              r += c * (w[i1] * wc[i2] * tail);
              if (with_q) {
                q1 += c * (v[i1] * wc[i2] * tail);
                q2 += c * (w[i1] * vc[i2] * tail);
              }
            }
          }
        }
      }
    }
    partial[i1] = {r, q0, q1, q2};
  });
  std::array<std::vector<cplx>, 4> cols;
  for (auto& c : cols) c.resize(width);
  for (std::size_t i = 0; i < width; ++i)
    for (std::size_t c = 0; c < 4; ++c) cols[c][i] = partial[i][c];
  NormalFormSums out;
  out.r_form = pairwise_sum(cols[0]);
  out.q = {pairwise_sum(cols[1]), pairwise_sum(cols[2]), pairwise_sum(cols[3])};
  return out;
}

inline std::vector<cplx> weighted(const std::vector<cplx>& a, const std::vector<double>& m) {
  std::vector<cplx> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = m[i] * a[i];
  return out;
}

inline NormalFormSums spacetime_sums(const std::vector<cplx>& w, const std::vector<cplx>& v,
                                     const std::vector<double>& m, int n) {
  const bool with_q = !v.empty();
  NormalFormSums out;
  if (!with_q) {
    const std::vector<std::vector<cplx>> arrays{w, weighted(w, m)};
    const std::array<int, 2> wmap{1, 1};
    const auto spec = psi_weighted_spectrum(arrays, n, {0, 0, 0, 0, 0, 0}, wmap);
    out.r_form = spec.sum_over_nonresonant_inverse();
    return out;
  }
  // arrays: 0 = w, 1 = m w, 2 = v, 3 = m v
  const std::vector<std::vector<cplx>> arrays{w, weighted(w, m), v, weighted(v, m)};
  const std::array<int, 4> wmap{1, 1, 3, 3};
  const auto s_plain = psi_weighted_spectrum(arrays, n, {0, 0, 0, 0, 0, 0}, wmap);
  const auto s_q1 = psi_weighted_spectrum(arrays, n, {2, 0, 0, 0, 0, 0}, wmap);
  const auto s_q2 = psi_weighted_spectrum(arrays, n, {0, 2, 0, 0, 0, 0}, wmap);
  out.r_form = s_plain.sum_over_nonresonant_inverse();
  out.q = {s_plain.at(0), s_q1.sum_over_nonresonant_inverse(), s_q2.sum_over_nonresonant_inverse()};
  return out;
}

inline NormalFormSums normal_form_sums(const FourierState& u, const EnergyParams& p, bool with_q,
                                       const GridSpec* grid) {
  const int n = p.resolve(u);
  const auto w = centred_low(u, n);
  const auto m = weight_table(p.family, n);
  std::vector<cplx> v;
  if (with_q) {
    grid->require_quintic(n);
    v.resize(w.size());
    QuinticEvaluator eval(n, *grid);
    eval.apply(w, v);
  }
  return p.resolve_strategy(n) == SumStrategy::Enumerate ? enumerate_sums(w, v, m, n)
                                                         : spacetime_sums(w, v, m, n);
}

}  // namespace detail

/// Complex multilinear form sum_{Omega != 0} (psi/Omega) w1 w2* ... w6*; R is 1/6 of its real part.
inline cplx r_form(const FourierState& u, const EnergyParams& p) {
  return detail::normal_form_sums(u, p, false, nullptr).r_form;
}

inline double r_correction(const FourierState& u, const EnergyParams& p) {
  return r_form(u, p).real() / 6.0;
}

inline double e_modified(const FourierState& u, const EnergyParams& p) {
  const int n = p.resolve(u);
  return 0.5 * sobolev_norm_sq(project_low(u, n), p.family) + r_correction(u, p);
}

inline QComponents q_components(const FourierState& u, const EnergyParams& p, const GridSpec& grid) {
  return detail::normal_form_sums(u, p, true, &grid).q;
}

inline double q_from_components(const QComponents& q) {
  return (-q.q0 / 6.0 + 0.5 * q.q1 - 0.5 * q.q2).imag();
}

inline double q_derivative(const FourierState& u, const EnergyParams& p, const GridSpec& grid) {
  return q_from_components(q_components(u, p, grid));
}

/// R and Q from one pass over the tuples.
struct EnergyPair {
  double r = 0.0;
  double q = 0.0;
};

inline EnergyPair r_and_q(const FourierState& u, const EnergyParams& p, const GridSpec& grid) {
  const auto sums = detail::normal_form_sums(u, p, true, &grid);
  return {sums.r_form.real() / 6.0, q_from_components(sums.q)};
}

}  // namespace nlsqi

#endif  // NLSQI_MODIFIED_ENERGY_HPP
