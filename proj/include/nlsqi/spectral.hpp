// nlsqi: spectral and Monte Carlo tools for the truncated quintic NLS on the torus.
//
// Projectors, Sobolev norms, conserved quantities and the dealiased quintic
// nonlinearity Pi_N(|Pi_N u|^4 Pi_N u).
//
// Conventions: period 2*pi, Lebesgue measure dx, u_k = (1/2pi) int u e^{-ikx} dx.

#ifndef NLSQI_SPECTRAL_HPP
#define NLSQI_SPECTRAL_HPP

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nlsqi/fft.hpp"
#include "nlsqi/state.hpp"

namespace nlsqi {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Dirichlet projector: keeps |k| <= n_cut, ambient size unchanged.
inline FourierState project_low(const FourierState& u, int n_cut) {
  if (n_cut < 0) throw Error("project_low: negative cut");
  FourierState out(u.m_ambient());
  const int lim = std::min(n_cut, u.m_ambient());
  for (int k = -lim; k <= lim; ++k) out[k] = u[k];
  return out;
}

inline FourierState project_high(const FourierState& u, int n_cut) {
  return u - project_low(u, n_cut);
}

namespace detail {
/// u_k, |k| <= n, as a centred array of length 2n+1.
inline std::vector<cplx> centred_low(const FourierState& u, int n) {
  std::vector<cplx> w(static_cast<std::size_t>(2 * n + 1));
  for (int k = -n; k <= n; ++k) w[static_cast<std::size_t>(k + n)] = u[k];
  return w;
}
}  // namespace detail

/// sum_k m(k) |u_k|^2 for the family's multiplier.
inline double sobolev_norm_sq(const FourierState& u, const WeightFamily& family) {
  double acc = 0.0;
  const int m = u.m_ambient();
  for (int k = -m; k <= m; ++k) acc += family(k) * std::norm(u[k]);
  return acc;
}

/// sum_k <k>^{2 sigma} |u_k|^2.
inline double sobolev_norm_sq(const FourierState& u, double sigma) {
  return sobolev_norm_sq(u, WeightFamily::japanese(sigma));
}

/// ||u||_{L^2}^2 = 2 pi sum |u_k|^2.
inline double mass(const FourierState& u) {
  double acc = 0.0;
  for (const cplx& c : u.coeffs()) acc += std::norm(c);
  return kTwoPi * acc;
}

inline double wiener_norm(const FourierState& u) {
  double acc = 0.0;
  for (const cplx& c : u.coeffs()) acc += std::abs(c);
  return acc;
}

/// Values u(x_j), x_j = 2 pi j / G. Requires G >= 2M+1.
inline std::vector<cplx> grid_values(const FourierState& u, const GridSpec& grid) {
  const int need = 2 * u.m_ambient() + 1;
  if (grid.n_points < need) throw GridTooSmall(grid.n_points, need);
  const auto& plan = fft::plan(grid.n_points);
  std::vector<cplx> scratch(static_cast<std::size_t>(grid.n_points));
  std::vector<cplx> out(scratch.size());
  fft::synthesize(plan, u.coeffs(), scratch.data(), out.data());
  return out;
}

/// H(u) = 1/2 int |u_x|^2 + 1/6 int |v|^6 with v = u, or v = Pi_N u when
/// `nonlinear_cut` is set (the Hamiltonian of the truncated equation).
/// The sextic integral is exact on G >= 6n+2 points, n the bandwidth of v.
inline double hamiltonian(const FourierState& u, const GridSpec& grid,
                          std::optional<int> nonlinear_cut = std::nullopt) {
  const int m = u.m_ambient();
  double kinetic = 0.0;
  for (int k = -m; k <= m; ++k) kinetic += static_cast<double>(k) * k * std::norm(u[k]);
  kinetic *= 0.5 * kTwoPi;

  const int band = nonlinear_cut ? std::min(*nonlinear_cut, m) : m;
  const int need = GridSpec::min_points(5, band);
  if (grid.n_points < need) throw GridTooSmall(grid.n_points, need);
  const FourierState v = (band < m) ? project_low(u, band).resized(band) : u;
  const auto vals = grid_values(v, grid);
  double sextic = 0.0;
  for (const cplx& z : vals) {
    const double a = std::norm(z);
    sextic += a * a * a;
  }
  sextic *= kTwoPi / grid.n_points / 6.0;
  return kinetic + sextic;
}

/// C(u) = 1/2 ||u||_{L^2}^2 + H(u); conserved by the flow whose nonlinearity
/// matches `nonlinear_cut`.
inline double conserved_c(const FourierState& u, const GridSpec& grid,
                          std::optional<int> nonlinear_cut = std::nullopt) {
  return 0.5 * mass(u) + hamiltonian(u, grid, nonlinear_cut);
}

/// Reusable evaluator of Pi_n(|w|^4 w) for w supported in |k| <= n, and of its
/// real-linear derivative. Not thread-safe; create one per thread.
class QuinticEvaluator {
 public:
  QuinticEvaluator(int n, const GridSpec& grid)
      : n_(n),
        plan_(&fft::plan(grid.n_points)),
        scratch_(static_cast<std::size_t>(grid.n_points)),
        field_(scratch_.size()),
        work_(scratch_.size()),
        dvals_(scratch_.size()) {
    grid.require_quintic(n);
  }

  int band() const noexcept { return n_; }
  int grid_points() const noexcept { return plan_->size(); }

  /// out = Pi_n(|w|^4 w); both spans hold 2n+1 centred coefficients.
  void apply(std::span<const cplx> w, std::span<cplx> out) {
    fft::synthesize(*plan_, w, scratch_.data(), field_.data());
    for (cplx& z : field_) {
      const double a = std::norm(z);
      z *= a * a;
    }
    fft::analyze(*plan_, field_.data(), scratch_.data(), out);
  }

  /// Caches the grid values of the base point w for `apply_derivative`.
  void set_base(std::span<const cplx> w) { fft::synthesize(*plan_, w, scratch_.data(), field_.data()); }

  /// out = Pi_n(3|W|^4 d + 2|W|^2 W^2 conj(d)) at the base point set by set_base.
  void apply_derivative(std::span<const cplx> d, std::span<cplx> out) {
    fft::synthesize(*plan_, d, scratch_.data(), dvals_.data());
    for (std::size_t j = 0; j < work_.size(); ++j) {
      const cplx z = field_[j];
      const double a = std::norm(z);
      work_[j] = 3.0 * a * a * dvals_[j] + 2.0 * a * z * z * std::conj(dvals_[j]);
    }
    fft::analyze(*plan_, work_.data(), scratch_.data(), out);
  }

 private:
  int n_;
  const fft::Plan* plan_;
  std::vector<cplx> scratch_;
  std::vector<cplx> field_;
  std::vector<cplx> work_;
  std::vector<cplx> dvals_;
};

/// Pi_N(|Pi_N u|^4 Pi_N u) on u's ambient size.
inline FourierState quintic_nonlinearity(const FourierState& u, int n_cut, const GridSpec& grid) {
  if (n_cut < 0) throw Error("quintic_nonlinearity: negative cut");
  grid.require_quintic(n_cut);
  const int n = std::min(n_cut, u.m_ambient());
  QuinticEvaluator eval(n, grid);
  std::vector<cplx> w(static_cast<std::size_t>(2 * n + 1));
  for (int k = -n; k <= n; ++k) w[static_cast<std::size_t>(k + n)] = u[k];
  std::vector<cplx> out(w.size());
  eval.apply(w, out);
  FourierState res(u.m_ambient());
  for (int k = -n; k <= n; ++k) res[k] = out[static_cast<std::size_t>(k + n)];
  return res;
}

// --- snapshot files -------------------------------------------------------

/// {"m_ambient": M, "coeffs": [[re, im], ...]} ordered k = -M..M.
inline nlohmann::json to_json(const FourierState& u) {
  nlohmann::json coeffs = nlohmann::json::array();
  for (const cplx& c : u.coeffs()) coeffs.push_back({c.real(), c.imag()});
  return {{"m_ambient", u.m_ambient()}, {"coeffs", std::move(coeffs)}};
}

inline FourierState state_from_json(const nlohmann::json& j) {
  if (!j.contains("m_ambient") || !j.contains("coeffs")) {
    throw Error("state snapshot: missing 'm_ambient' or 'coeffs'");
  }
  const int m = j.at("m_ambient").get<int>();
  std::vector<cplx> coeffs;
  coeffs.reserve(j.at("coeffs").size());
  for (const auto& pair : j.at("coeffs")) {
    if (!pair.is_array() || pair.size() != 2) throw Error("state snapshot: coefficient is not [re, im]");
    coeffs.emplace_back(pair[0].get<double>(), pair[1].get<double>());
  }
  return FourierState(m, std::move(coeffs));
}

}  // namespace nlsqi

#endif  // NLSQI_SPECTRAL_HPP
