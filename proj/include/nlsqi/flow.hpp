// nlsqi: spectral and Monte Carlo tools for the truncated quintic NLS on the torus.
//
// The truncated flow Phi_N(t) of
//     i u_t + u_xx = Pi_N(|Pi_N u|^4 Pi_N u).
// Modes |k| > N evolve by the free phase e^{-ik^2 t}. Modes |k| <= N are
// integrated by Lawson RK4: classical RK4 on the gauged variable
// w = e^{i t k^2} u_k, whose vector field -i e^{itk^2} N(e^{-itk^2} w) carries
// no stiff linear part.

#ifndef NLSQI_FLOW_HPP
#define NLSQI_FLOW_HPP

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nlsqi/parallel.hpp"
#include "nlsqi/spectral.hpp"

namespace nlsqi {

struct FlowParams {
  int n_cut = 0;
  double step = 1e-3;
  GridSpec grid{};

  static FlowParams make(int n_cut, double step = 1e-3) { return {n_cut, step, GridSpec::for_quintic(n_cut)}; }

  void validate() const {
    if (n_cut < 0) throw Error("FlowParams: negative truncation");
    if (!(step > 0.0) || step > 0.1) throw Error("FlowParams: step must lie in (0, 0.1]");
    grid.require_quintic(n_cut);
  }
};

struct Trajectory {
  std::vector<double> times;
  std::vector<FourierState> states;
};

/// e^{it d_xx}: multiplies u_k by e^{-ik^2 t}.
inline FourierState linear_flow(const FourierState& u, double t) {
  FourierState out(u.m_ambient());
  const int m = u.m_ambient();
  for (int k = -m; k <= m; ++k) out[k] = u[k] * std::polar(1.0, -static_cast<double>(k) * k * t);
  return out;
}

namespace detail {

/// Lawson RK4 on the centred low-mode block |k| <= n.
class LawsonRk4 {
 public:
  LawsonRk4(int n, const GridSpec& grid)
      : n_(n), eval_(n, grid), width_(static_cast<std::size_t>(2 * n + 1)),
        stage_(4, std::vector<cplx>(width_)), tmp_(width_), out_(width_) {
    y_.resize(width_);
  }

  int band() const noexcept { return n_; }

  /// Twist: a_k *= e^{i tau k^2}.
  void twist(std::span<cplx> a, double tau) const {
    for (int k = -n_; k <= n_; ++k) a[static_cast<std::size_t>(k + n_)] *= std::polar(1.0, static_cast<double>(k) * k * tau);
  }

  /// out = -i e^{i tau L} N(e^{-i tau L} w)
  void field(double tau, std::span<const cplx> w, std::span<cplx> out) {
    std::copy(w.begin(), w.end(), tmp_.begin());
    twist(tmp_, -tau);
    eval_.apply(tmp_, out);
    twist(out, tau);
    for (cplx& z : out) z *= cplx{0.0, -1.0};
  }

  /// One step of size h from local time origin; `u` holds u(t_n) and is
  /// overwritten with u(t_n + h). With `tau0` != 0 the gauge is anchored at
  /// absolute time tau0 (global gauge) and `u` holds w(tau0) instead.
  void step_gauged(std::span<cplx> w, double tau0, double h) {
    std::vector<cplx> y(width_);
    field(tau0, w, stage_[0]);
    for (std::size_t i = 0; i < width_; ++i) y[i] = w[i] + 0.5 * h * stage_[0][i];
    field(tau0 + 0.5 * h, y, stage_[1]);
    for (std::size_t i = 0; i < width_; ++i) y[i] = w[i] + 0.5 * h * stage_[1][i];
    field(tau0 + 0.5 * h, y, stage_[2]);
    for (std::size_t i = 0; i < width_; ++i) y[i] = w[i] + h * stage_[2][i];
    field(tau0 + h, y, stage_[3]);
    for (std::size_t i = 0; i < width_; ++i) {
      w[i] += h / 6.0 * (stage_[0][i] + 2.0 * stage_[1][i] + 2.0 * stage_[2][i] + stage_[3][i]);
    }
  }

  /// u(t_n) -> u(t_n + h) with the gauge re-anchored at t_n. The stage
  /// twists e^{+-ik^2 h/2}, e^{+-ik^2 h} are tabulated once per step size.
  void step(std::span<cplx> u, double h) {
    if (h != table_h_) build_tables(h);
    std::vector<cplx>& y = y_;
    eval_.apply(u, stage_[0]);
    for (std::size_t i = 0; i < width_; ++i) {
      stage_[0][i] *= cplx{0.0, -1.0};
      y[i] = u[i] + 0.5 * h * stage_[0][i];
    }
    tabled_field(y, half_, stage_[1]);
    for (std::size_t i = 0; i < width_; ++i) y[i] = u[i] + 0.5 * h * stage_[1][i];
    tabled_field(y, half_, stage_[2]);
    for (std::size_t i = 0; i < width_; ++i) y[i] = u[i] + h * stage_[2][i];
    tabled_field(y, full_, stage_[3]);
    for (std::size_t i = 0; i < width_; ++i) {
      u[i] = (u[i] + h / 6.0 * (stage_[0][i] + 2.0 * stage_[1][i] + 2.0 * stage_[2][i] + stage_[3][i])) * std::conj(full_[i]);
    }
  }

  /// Same step applied jointly to the state and to tangent vectors (the
  /// variational equation), so the tangents evolve by the derivative of the
  /// discrete map.
  void step_with_tangents(std::span<cplx> u, std::vector<std::vector<cplx>>& tangents, double h) {
    const std::size_t nt = tangents.size();
    std::vector<std::vector<cplx>> ks(4, std::vector<cplx>(width_));
    std::vector<std::vector<std::vector<cplx>>> kt(4, std::vector<std::vector<cplx>>(nt, std::vector<cplx>(width_)));
    std::vector<cplx> y(width_);
    std::vector<std::vector<cplx>> yt(nt, std::vector<cplx>(width_));
    const double taus[4] = {0.0, 0.5 * h, 0.5 * h, h};
    const double coef[4] = {0.0, 0.5 * h, 0.5 * h, h};
    for (int s = 0; s < 4; ++s) {
      for (std::size_t i = 0; i < width_; ++i) y[i] = u[i] + (s ? coef[s] * ks[static_cast<std::size_t>(s - 1)][i] : cplx{});
      for (std::size_t c = 0; c < nt; ++c)
        for (std::size_t i = 0; i < width_; ++i)
          yt[c][i] = tangents[c][i] + (s ? coef[s] * kt[static_cast<std::size_t>(s - 1)][c][i] : cplx{});
      field(taus[s], y, ks[static_cast<std::size_t>(s)]);
      std::copy(y.begin(), y.end(), tmp_.begin());
      twist(tmp_, -taus[s]);
      eval_.set_base(tmp_);
      for (std::size_t c = 0; c < nt; ++c) {
        std::vector<cplx> d = yt[c];
        twist(d, -taus[s]);
        eval_.apply_derivative(d, out_);
        twist(out_, taus[s]);
        for (std::size_t i = 0; i < width_; ++i) kt[static_cast<std::size_t>(s)][c][i] = cplx{0.0, -1.0} * out_[i];
      }
    }
    for (std::size_t i = 0; i < width_; ++i) {
      u[i] += h / 6.0 * (ks[0][i] + 2.0 * ks[1][i] + 2.0 * ks[2][i] + ks[3][i]);
    }
    twist(u, -h);
    for (std::size_t c = 0; c < nt; ++c) {
      for (std::size_t i = 0; i < width_; ++i) {
        tangents[c][i] += h / 6.0 * (kt[0][c][i] + 2.0 * kt[1][c][i] + 2.0 * kt[2][c][i] + kt[3][c][i]);
      }
      twist(tangents[c], -h);
    }
  }

  QuinticEvaluator& evaluator() noexcept { return eval_; }

 private:
  void build_tables(double h) {
    half_.resize(width_);
    full_.resize(width_);
    for (int k = -n_; k <= n_; ++k) {
      const double kk = static_cast<double>(k) * k;
      half_[static_cast<std::size_t>(k + n_)] = std::polar(1.0, kk * 0.5 * h);
      full_[static_cast<std::size_t>(k + n_)] = std::polar(1.0, kk * h);
    }
    table_h_ = h;
  }

  /// out = -i E N(E^* w) with E = diag(phase)
  void tabled_field(std::span<const cplx> w, const std::vector<cplx>& phase, std::span<cplx> out) {
    for (std::size_t i = 0; i < width_; ++i) tmp_[i] = w[i] * std::conj(phase[i]);
    eval_.apply(tmp_, out);
    for (std::size_t i = 0; i < width_; ++i) out[i] *= cplx{0.0, -1.0} * phase[i];
  }

  double table_h_ = 0.0;
  std::vector<cplx> half_, full_;
  std::vector<cplx> y_;

  int n_;
  QuinticEvaluator eval_;
  std::size_t width_;
  std::vector<std::vector<cplx>> stage_;
  std::vector<cplx> tmp_;
  std::vector<cplx> out_;
};

/// Splits |t| into full steps of size h and a final fractional step.
struct StepPlan {
  long long full = 0;
  double last = 0.0;
  double sign = 1.0;
  double h = 0.0;
};

inline StepPlan plan_steps(double t, double h) {
  StepPlan p;
  p.sign = t < 0 ? -1.0 : 1.0;
  p.h = h;
  const double a = std::abs(t);
  p.full = static_cast<long long>(std::floor(a / h * (1.0 + 1e-12)));
  p.last = a - static_cast<double>(p.full) * h;
  if (p.last < 1e-12 * h) p.last = 0.0;
  if (p.last < 0.0) p.last = 0.0;
  return p;
}

}  // namespace detail

/// Phi_N(t) u0.
inline FourierState evolve(const FourierState& u0, double t, const FlowParams& p) {
  p.validate();
  if (t == 0.0) return u0;
  const int m = u0.m_ambient();
  const int n = std::min(p.n_cut, m);
  FourierState out = linear_flow(u0, t);
  std::vector<cplx> low = detail::centred_low(u0, n);
  detail::LawsonRk4 rk(n, p.grid);
  const auto plan = detail::plan_steps(t, p.step);
  for (long long i = 0; i < plan.full; ++i) rk.step(low, plan.sign * plan.h);
  if (plan.last > 0.0) rk.step(low, plan.sign * plan.last);
  for (int k = -n; k <= n; ++k) out[k] = low[static_cast<std::size_t>(k + n)];
  out.require_finite("evolve");
  return out;
}

/// Same flow with the gauge anchored once at t = 0 instead of at every step.
/// An independent code path used to cross-check `evolve`.
inline FourierState evolve_global_gauge(const FourierState& u0, double t, const FlowParams& p) {
  p.validate();
  if (t == 0.0) return u0;
  const int n = std::min(p.n_cut, u0.m_ambient());
  FourierState out = linear_flow(u0, t);
  std::vector<cplx> w = detail::centred_low(u0, n);
  detail::LawsonRk4 rk(n, p.grid);
  const auto plan = detail::plan_steps(t, p.step);
  double tau = 0.0;
  for (long long i = 0; i < plan.full; ++i) {
    rk.step_gauged(w, tau, plan.sign * plan.h);
    tau += plan.sign * plan.h;
  }
  if (plan.last > 0.0) {
    rk.step_gauged(w, tau, plan.sign * plan.last);
  }
  rk.twist(w, -t);
  for (int k = -n; k <= n; ++k) out[k] = w[static_cast<std::size_t>(k + n)];
  out.require_finite("evolve_global_gauge");
  return out;
}

/// Equispaced snapshots at t_final * j / (n_snapshots - 1), j = 0..n-1, each
/// produced by continuing the previous one.
inline Trajectory evolve_trajectory(const FourierState& u0, double t_final, const FlowParams& p, int n_snapshots) {
  if (n_snapshots < 2) throw Error("evolve_trajectory: need at least two snapshots");
  Trajectory traj;
  traj.times.reserve(static_cast<std::size_t>(n_snapshots));
  traj.states.reserve(static_cast<std::size_t>(n_snapshots));
  traj.times.push_back(0.0);
  traj.states.push_back(u0);
  const double dt = t_final / (n_snapshots - 1);
  for (int j = 1; j < n_snapshots; ++j) {
    traj.states.push_back(evolve(traj.states.back(), dt, p));
    traj.times.push_back(t_final * j / (n_snapshots - 1));
  }
  return traj;
}

// --- Picard iteration -------------------------------------------------------

struct PicardResult {
  FourierState state;
  std::vector<double> distances;  ///< sup-in-time Wiener distance between successive iterates
  std::vector<double> ratios;     ///< distances[j+1] / distances[j]
  double local_time = 0.0;
};

/// Lipschitz constant of u -> |u|^4 u on the Wiener-algebra ball of radius R is 5 R^4.
inline double picard_local_time(const FourierState& u0) {
  const double radius = 1.0 + 2.0 * wiener_norm(u0);
  return 1.0 / (3.0 * 5.0 * std::pow(radius, 4));
}

/// Duhamel fixed-point iteration for the low modes, in the gauged variable
/// w(tau) = u0 - i int_0^tau e^{i s L} N(e^{-i s L} w(s)) ds on `nodes`
/// equispaced nodes (odd), integrated by composite Simpson.
inline PicardResult picard_solve(const FourierState& u0, double t, const FlowParams& p, int n_iter, int nodes = 33) {
  p.validate();
  if (n_iter < 1) throw Error("picard_solve: n_iter must be >= 1");
  if (nodes < 3 || nodes % 2 == 0) throw Error("picard_solve: nodes must be odd and >= 3");
  PicardResult res;
  res.local_time = picard_local_time(u0);
  if (std::abs(t) > res.local_time) {
    throw ContractionRadiusExceeded("picard_solve: |t| = " + std::to_string(std::abs(t)) +
                                    " exceeds local time " + std::to_string(res.local_time));
  }
  const int n = std::min(p.n_cut, u0.m_ambient());
  const std::size_t width = static_cast<std::size_t>(2 * n + 1);
  const auto w0 = detail::centred_low(u0, n);
  detail::LawsonRk4 rk(n, p.grid);
  const double dt = t / (nodes - 1);
  std::vector<std::vector<cplx>> iter(static_cast<std::size_t>(nodes), w0);
  std::vector<std::vector<cplx>> g(static_cast<std::size_t>(nodes), std::vector<cplx>(width));
  for (int it = 0; it < n_iter; ++it) {
    for (int j = 0; j < nodes; ++j) rk.field(dt * j, iter[static_cast<std::size_t>(j)], g[static_cast<std::size_t>(j)]);
    std::vector<std::vector<cplx>> next(static_cast<std::size_t>(nodes), w0);
    std::vector<cplx> acc(width);
    for (int j = 1; j < nodes; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      if (j % 2 == 0) {
        // Simpson panel [j-2, j]
        for (std::size_t i = 0; i < width; ++i) acc[i] += dt / 3.0 * (g[uj - 2][i] + 4.0 * g[uj - 1][i] + g[uj][i]);
        for (std::size_t i = 0; i < width; ++i) next[uj][i] += acc[i];
      } else {
        // partial panel [j-1, j] from the quadratic through j-1, j, j+1
        for (std::size_t i = 0; i < width; ++i) {
          next[uj][i] += acc[i] + dt / 12.0 * (5.0 * g[uj - 1][i] + 8.0 * g[uj][i] - g[uj + 1][i]);
        }
      }
    }
    double dist = 0.0;
    for (std::size_t j = 0; j < next.size(); ++j) {
      double d = 0.0;
      for (std::size_t i = 0; i < width; ++i) d += std::abs(next[j][i] - iter[j][i]);
      dist = std::max(dist, d);
    }
    res.distances.push_back(dist);
    if (res.distances.size() >= 2 && res.distances[res.distances.size() - 2] > 0.0) {
      res.ratios.push_back(dist / res.distances[res.distances.size() - 2]);
    }
    iter = std::move(next);
  }
  FourierState out = linear_flow(u0, t);
  auto w_end = iter.back();
  rk.twist(w_end, -t);
  for (int k = -n; k <= n; ++k) out[k] = w_end[static_cast<std::size_t>(k + n)];
  res.state = std::move(out);
  return res;
}

// --- Liouville checks -------------------------------------------------------

/// Vector field of the low-mode system: du_k/dt = -i (k^2 u_k + N(u)_k).
inline std::vector<cplx> low_mode_field(std::span<const cplx> u, int n, QuinticEvaluator& eval) {
  std::vector<cplx> nl(u.size());
  eval.apply(u, nl);
  for (int k = -n; k <= n; ++k) {
    const auto i = static_cast<std::size_t>(k + n);
    nl[i] = cplx{0.0, -1.0} * (static_cast<double>(k) * k * u[i] + nl[i]);
  }
  return nl;
}

/// Trace of the Jacobian of the real-coordinate field at u, by central
/// differences over the 2(2N+1) real directions. Requires M == N.
inline double divergence_at(const FourierState& u, const FlowParams& p) {
  p.validate();
  if (u.m_ambient() != p.n_cut) throw Error("divergence_at: state must live on E_N (M == N)");
  const int n = p.n_cut;
  QuinticEvaluator eval(n, p.grid);
  std::vector<cplx> base(u.coeffs().begin(), u.coeffs().end());
  double norm = 0.0;
  for (const cplx& c : base) norm += std::norm(c);
  const double h = 1e-5 * (1.0 + std::sqrt(norm));
  std::vector<double> terms;
  for (std::size_t i = 0; i < base.size(); ++i) {
    for (const cplx dir : {cplx{1.0, 0.0}, cplx{0.0, 1.0}}) {
      auto plus = base;
      auto minus = base;
      plus[i] += h * dir;
      minus[i] -= h * dir;
      const auto fp = low_mode_field(plus, n, eval);
      const auto fm = low_mode_field(minus, n, eval);
      const cplx diff = (fp[i] - fm[i]) / (2.0 * h);
      terms.push_back(dir.real() != 0.0 ? diff.real() : diff.imag());
    }
  }
  return pairwise_sum(terms);
}

/// det D Phi~_N(t) at u0 (real coordinates), from RK4 on the variational
/// equations alongside the state. Requires M == N.
inline double jacobian_det(const FourierState& u0, double t, const FlowParams& p) {
  p.validate();
  if (u0.m_ambient() != p.n_cut) throw Error("jacobian_det: state must live on E_N (M == N)");
  const int n = p.n_cut;
  const std::size_t width = static_cast<std::size_t>(2 * n + 1);
  const std::size_t dim = 2 * width;
  std::vector<std::vector<cplx>> tangents(dim, std::vector<cplx>(width));
  for (std::size_t i = 0; i < width; ++i) {
    tangents[2 * i][i] = {1.0, 0.0};
    tangents[2 * i + 1][i] = {0.0, 1.0};
  }
  std::vector<cplx> u(u0.coeffs().begin(), u0.coeffs().end());
  if (t != 0.0) {
    detail::LawsonRk4 rk(n, p.grid);
    const auto plan = detail::plan_steps(t, p.step);
    for (long long i = 0; i < plan.full; ++i) rk.step_with_tangents(u, tangents, plan.sign * plan.h);
    if (plan.last > 0.0) rk.step_with_tangents(u, tangents, plan.sign * plan.last);
  }
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t c = 0; c < dim; ++c) {
    for (std::size_t i = 0; i < width; ++i) {
      if (!std::isfinite(tangents[c][i].real()) || !std::isfinite(tangents[c][i].imag())) {
        throw NonFiniteState("jacobian_det: non-finite tangent");
      }
      jac(static_cast<Eigen::Index>(2 * i), static_cast<Eigen::Index>(c)) = tangents[c][i].real();
      jac(static_cast<Eigen::Index>(2 * i + 1), static_cast<Eigen::Index>(c)) = tangents[c][i].imag();
    }
  }
  return jac.determinant();
}

// --- monitors -----------------------------------------------------------------

struct GrowthReport {
  double c0 = 0.0;                ///< exponential rate C_sigma (1 + ||u0||_{H^1})^12
  double max_bound_ratio = 0.0;   ///< max_t ||u(t)||_{H^sigma} / (||u0||_{H^sigma} e^{C0|t|})
  double mass_drift = 0.0;        ///< max relative deviation of the mass
  double conserved_drift = 0.0;   ///< max relative deviation of C_N
};

/// Pinned constant in the exponential growth bound.
inline constexpr double kGrowthConstant = 1.0;

/// Checks ||u(t)||_{H^sigma} <= ||u0||_{H^sigma} e^{C0 |t|} along the trajectory
/// and the drift of mass and C_N (the conserved energy of the truncated flow).
/// Throws BoundViolated if the bound fails or a drift exceeds `drift_tol`.
inline GrowthReport growth_monitor(const Trajectory& traj, double sigma, const FlowParams& p,
                                   double drift_tol = 1e-8) {
  if (traj.states.empty() || traj.states.size() != traj.times.size()) throw Error("growth_monitor: malformed trajectory");
  const FourierState& u0 = traj.states.front();
  GridSpec grid = GridSpec::for_quintic(std::min(p.n_cut, u0.m_ambient()));
  GrowthReport rep;
  rep.c0 = kGrowthConstant * std::pow(1.0 + std::sqrt(sobolev_norm_sq(u0, 1.0)), 12);
  const double h0 = std::sqrt(sobolev_norm_sq(u0, sigma));
  const double m0 = mass(u0);
  const double c0 = conserved_c(u0, grid, p.n_cut);
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const auto& u = traj.states[i];
    const double hs = std::sqrt(sobolev_norm_sq(u, sigma));
    const double allowed = h0 * std::exp(std::min(rep.c0 * std::abs(traj.times[i]), 700.0));
    if (allowed > 0.0) rep.max_bound_ratio = std::max(rep.max_bound_ratio, hs / allowed);
    else if (hs > 0.0) rep.max_bound_ratio = std::max(rep.max_bound_ratio, 1e300);
    if (m0 > 0.0) rep.mass_drift = std::max(rep.mass_drift, std::abs(mass(u) - m0) / m0);
    if (c0 > 0.0) rep.conserved_drift = std::max(rep.conserved_drift, std::abs(conserved_c(u, grid, p.n_cut) - c0) / c0);
  }
  if (rep.max_bound_ratio > 1.0 + 1e-12) {
    throw BoundViolated("growth_monitor: H^sigma growth exceeds the exponential bound");
  }
  if (rep.mass_drift > drift_tol || rep.conserved_drift > drift_tol) {
    throw BoundViolated("growth_monitor: conservation drift " + std::to_string(std::max(rep.mass_drift, rep.conserved_drift)) +
                        " exceeds " + std::to_string(drift_tol));
  }
  return rep;
}

/// max_k |Phi_N(t)u0 - (Phi~_N(t) Pi_N u0 + e^{it d_xx} Pi_N^perp u0)|_k
inline double check_factorization(const FourierState& u0, double t, const FlowParams& p) {
  const int n = std::min(p.n_cut, u0.m_ambient());
  const FourierState full = evolve(u0, t, p);
  const FourierState low = evolve(project_low(u0, n).resized(n), t, p).resized(u0.m_ambient());
  const FourierState high = linear_flow(project_high(u0, n), t);
  const FourierState diff = full - (low + high);
  double err = 0.0;
  for (const cplx& c : diff.coeffs()) err = std::max(err, std::abs(c));
  return err;
}

// --- export -------------------------------------------------------------------

/// Manifest plus one snapshot object per time.
inline nlohmann::json trajectory_to_json(const Trajectory& traj, const FlowParams& p, std::uint64_t seed) {
  nlohmann::json snaps = nlohmann::json::array();
  for (const auto& s : traj.states) snaps.push_back(to_json(s));
  return {{"schema_version", 1},
          {"times", traj.times},
          {"params", {{"n_cut", p.n_cut}, {"step", p.step}, {"grid", p.grid.n_points}}},
          {"seed", seed},
          {"snapshots", std::move(snaps)}};
}

}  // namespace nlsqi

#endif  // NLSQI_FLOW_HPP
