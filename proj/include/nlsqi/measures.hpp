// nlsqi: spectral and Monte Carlo tools for the truncated quintic NLS on the torus.
//
// The Gaussian measure mu_{s,M}: law of sum_{|k|<=M} g_k m(k)^{-1/2} e^{ikx}
// with i.i.d. standard complex Gaussians g_k (E|g_k|^2 = 1). Its density
// against Lebesgue measure on the coefficients is proportional to
// exp(-kPrecision * sum_k m(k)|u_k|^2) with kPrecision = 1; every density and
// weight below is written with that constant.
//
// Also: the H^1 cutoff 1{C(u) <= R}, the weighted-measure weight, partition
// constants and moment / L^p estimators.

#ifndef NLSQI_MEASURES_HPP
#define NLSQI_MEASURES_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nlsqi/modified_energy.hpp"
#include "nlsqi/parallel.hpp"
#include "nlsqi/report.hpp"
#include "nlsqi/rng.hpp"
#include "nlsqi/spectral.hpp"

namespace nlsqi {

/// Coefficient of sum_k m(k)|u_k|^2 in minus the log-density of mu_{s,M}.
inline constexpr double kPrecision = 1.0;

struct MeasureParams {
  WeightFamily family{};
  int m_ambient = 0;
  std::optional<double> cutoff_r;
  /// Truncation of the nonlinearity inside C(u); unset means the full C.
  /// Set it to N when the cutoff must be conserved by Phi_N.
  std::optional<int> cutoff_n_cut;

  double s() const noexcept { return family.s; }

  void validate() const {
    if (!(family.s > 1.5)) throw Error("MeasureParams: s must exceed 3/2");
    if (m_ambient < 0) throw Error("MeasureParams: negative ambient truncation");
    if (cutoff_r && !(*cutoff_r > 0.0)) throw Error("MeasureParams: cutoff radius must be positive");
  }

  /// Grid that integrates the cutoff's sextic term exactly.
  GridSpec cutoff_grid() const {
    return GridSpec::for_quintic(cutoff_n_cut ? std::min(*cutoff_n_cut, m_ambient) : m_ambient);
  }
};

/// u_k = g_k / sqrt(m(k)) for |k| <= M, drawn in the order k = -M..M.
inline FourierState sample_state(SeededRng& rng, const MeasureParams& p) {
  p.validate();
  FourierState u(p.m_ambient);
  for (int k = -p.m_ambient; k <= p.m_ambient; ++k) u[k] = rng.complex_gaussian() / std::sqrt(p.family(k));
  return u;
}

/// Sample `index` of a run seeded by `seed`.
inline FourierState sample_state(std::uint64_t seed, std::uint64_t index, const MeasureParams& p) {
  SeededRng rng(seed, index);
  return sample_state(rng, p);
}

/// 1 iff C(u) <= R (ties included).
inline int cutoff_indicator(const FourierState& u, const MeasureParams& p, const GridSpec& grid) {
  if (!p.cutoff_r) throw MissingCutoff();
  return conserved_c(u, grid, p.cutoff_n_cut) <= *p.cutoff_r ? 1 : 0;
}

inline int cutoff_indicator(const FourierState& u, const MeasureParams& p) {
  return cutoff_indicator(u, p, p.cutoff_grid());
}

/// Indicator that is identically 1 when the measure carries no cutoff.
inline int optional_cutoff(const FourierState& u, const MeasureParams& p) {
  return p.cutoff_r ? cutoff_indicator(u, p) : 1;
}

/// log of 1{C <= R} e^{-2 kPrecision R_{s,N}(u)}; -inf outside the cutoff. The
/// factor 2 kPrecision matches the weighted measure to the Gaussian
/// normalisation above (it is 1 under the e^{-1/2 |||u|||^2} convention).
inline double wgm_log_weight(const FourierState& u, const MeasureParams& p, const EnergyParams& energy) {
  if (!(energy.family == p.family)) throw Error("wgm_weight: energy and measure use different weight families");
  if (p.cutoff_r && cutoff_indicator(u, p) == 0) return -std::numeric_limits<double>::infinity();
  return -2.0 * kPrecision * r_correction(u, energy);
}

inline double wgm_weight(const FourierState& u, const MeasureParams& p, const EnergyParams& energy) {
  const double lw = wgm_log_weight(u, p, energy);
  if (lw > 700.0) throw BoundViolated("wgm_weight: log-weight " + std::to_string(lw) + " would overflow");
  return std::exp(lw);
}

/// Evaluates f on samples 0..n-1 of mu_{s,M} in parallel; slot i holds f(u_i).
template <class Fn>
std::vector<double> map_samples(const MeasureParams& p, std::size_t n, std::uint64_t seed, Fn&& f) {
  p.validate();
  std::vector<double> out(n);
  parallel_for(n, [&](std::size_t i) { out[i] = f(sample_state(seed, i, p)); });
  return out;
}

/// Z_{s,R,N} = E_mu[1{C <= R} e^{-2 kPrecision R_{s,N}}].
inline McReport partition_estimate(const MeasureParams& p, const EnergyParams& energy, std::size_t n,
                                   std::uint64_t seed) {
  if (n < 1000) throw Error("partition_estimate: need at least 1000 samples");
  const auto w = map_samples(p, n, seed, [&](const FourierState& u) { return wgm_weight(u, p, energy); });
  McReport r = mean_report(w, seed);
  if (!(r.estimate > 0.0) || !std::isfinite(r.estimate)) {
    throw BoundViolated("partition_estimate: estimate " + format_double(r.estimate) + " is not positive and finite");
  }
  return r;
}

/// (E|f|^p)^{1/p} with a delta-method standard error.
inline McReport lp_from_values(std::span<const double> values, double p_exp, std::uint64_t seed) {
  if (!(p_exp >= 1.0)) throw Error("lp_norm: exponent must be >= 1");
  std::vector<double> pw(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) pw[i] = std::pow(std::abs(values[i]), p_exp);
  const McReport m = mean_report(pw, seed);
  McReport r = m;
  r.estimate = std::pow(m.estimate, 1.0 / p_exp);
  r.stderr_ = m.estimate > 0.0 ? m.stderr_ * r.estimate / (p_exp * m.estimate) : 0.0;
  return r;
}

template <class Fn>
McReport lp_norm_mc(Fn&& f, double p_exp, const MeasureParams& measure, std::size_t n, std::uint64_t seed) {
  const auto vals = map_samples(measure, n, seed, std::forward<Fn>(f));
  return lp_from_values(vals, p_exp, seed);
}

struct MomentPoint {
  int m = 0;
  double estimate = 0.0;  ///< (E ||u||_{H^sigma}^m)^{1/m}
  double stderr_ = 0.0;
  double ratio = 0.0;     ///< estimate / sqrt(m)
};

/// Exact second moment (sum_{|k|<=M} <k>^{2 sigma} / m(k))^{1/2}.
inline double gaussian_second_moment(const MeasureParams& p, double sigma) {
  double acc = 0.0;
  for (int k = -p.m_ambient; k <= p.m_ambient; ++k) acc += std::pow(1.0 + double(k) * k, sigma) / p.family(k);
  return std::sqrt(acc);
}

inline std::vector<MomentPoint> moment_growth_mc(const MeasureParams& p, double sigma, int m_max, std::size_t n,
                                                 std::uint64_t seed) {
  if (!(sigma < p.s() - 0.5)) throw Error("moment_growth_mc: need sigma < s - 1/2");
  if (m_max < 2) throw Error("moment_growth_mc: m_max must be >= 2");
  const auto norms = map_samples(p, n, seed, [&](const FourierState& u) { return std::sqrt(sobolev_norm_sq(u, sigma)); });
  std::vector<MomentPoint> out;
  for (int m = 2; m <= m_max; m += 2) {
    const McReport r = lp_from_values(norms, m, seed);
    out.push_back({m, r.estimate, r.stderr_, r.estimate / std::sqrt(static_cast<double>(m))});
  }
  return out;
}

struct ModeMoment {
  int k = 0;
  McReport second;  ///< E|u_k|^2 against the target 1/m(k)
};

/// Per-mode E|u_k|^2 with z-scores against 1/m(k).
inline std::vector<ModeMoment> mode_variances(const MeasureParams& p, std::size_t n, std::uint64_t seed) {
  p.validate();
  const std::size_t width = static_cast<std::size_t>(2 * p.m_ambient + 1);
  std::vector<std::vector<double>> vals(width, std::vector<double>(n));
  parallel_for(n, [&](std::size_t i) {
    const auto u = sample_state(seed, i, p);
    for (std::size_t j = 0; j < width; ++j) vals[j][i] = std::norm(u.coeffs()[j]);
  });
  std::vector<ModeMoment> out;
  for (int k = -p.m_ambient; k <= p.m_ambient; ++k) {
    McReport r = mean_report(vals[static_cast<std::size_t>(k + p.m_ambient)], seed);
    r.against(1.0 / p.family(k));
    out.push_back({k, r});
  }
  return out;
}

}  // namespace nlsqi

#endif  // NLSQI_MEASURES_HPP
