// nlsqi: spectral and Monte Carlo tools for the truncated quintic NLS on the torus.
//
// Densities of the transported measures Phi_N(t)_# mu_{s,M} = G_{s,N}(t,.) mu_{s,M}
// and their Monte Carlo checks. All densities are carried as logarithms.
//
// With the Gaussian normalisation of measures.hpp (precision kPrecision),
//   log G = -kPrecision (|||Pi_N Phi_N(-t)u|||^2 - |||Pi_N u|||^2)            (direct)
//         = 2 kPrecision (R(Phi_N(-t)u) - R(u) - int_0^{-t} Q(Phi_N(tau)u) dtau)
// the second line being the normal-form rewrite, since
// 1/2 |||Pi_N u|||^2 = E - R and dE/dtau = Q along the flow.
// log F = -2 kPrecision int_0^{-t} Q is the density for the weighted measure.

#ifndef NLSQI_TRANSPORT_HPP
#define NLSQI_TRANSPORT_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nlsqi/flow.hpp"
#include "nlsqi/measures.hpp"
#include "nlsqi/modified_energy.hpp"
#include "nlsqi/report.hpp"

namespace nlsqi {

struct DensityParams {
  double t = 0.0;
  EnergyParams energy{};
  FlowParams flow{};
  int quad_points = 501;

  static DensityParams make(double t, int n_cut, const WeightFamily& family, double step = 1e-3, int quad_points = 501) {
    return {t, EnergyParams{n_cut, family}, FlowParams::make(n_cut, step), quad_points};
  }

  void validate() const {
    if (energy.n_cut != flow.n_cut) throw Error("DensityParams: energy and flow truncations differ");
    if (quad_points < 3 || quad_points % 2 == 0) throw Error("DensityParams: quad_points must be odd and >= 3");
    flow.validate();
  }
};

inline double density_direct(const FourierState& u, const DensityParams& d) {
  d.validate();
  if (d.t == 0.0) return 0.0;
  const int n = d.energy.resolve(u);
  const FourierState back = evolve(u, -d.t, d.flow);
  return -kPrecision *
         (sobolev_norm_sq(project_low(back, n), d.energy.family) - sobolev_norm_sq(project_low(u, n), d.energy.family));
}

/// Pieces of the normal-form route.
struct NormalFormDensity {
  double r_start = 0.0;     ///< R(u)
  double r_end = 0.0;       ///< R(Phi_N(-t)u)
  double q_integral = 0.0;  ///< int_0^{-t} Q(Phi_N(tau)u) dtau, composite Simpson

  double log_g() const { return 2.0 * kPrecision * (r_end - r_start - q_integral); }
  double log_f() const { return -2.0 * kPrecision * q_integral; }
};

/// Simpson weights 1,4,2,...,4,1 times h/3.
inline double simpson(std::span<const double> f, double h) {
  std::vector<double> terms(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double w = (i == 0 || i + 1 == f.size()) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    terms[i] = w * f[i];
  }
  return pairwise_sum(terms) * h / 3.0;
}

inline NormalFormDensity density_breakdown(const FourierState& u, const DensityParams& d) {
  d.validate();
  NormalFormDensity out;
  if (d.t == 0.0) return out;
  const Trajectory traj = evolve_trajectory(u, -d.t, d.flow, d.quad_points);
  const std::size_t q = traj.states.size();
  std::vector<double> qs(q);
  std::vector<double> rs(q, 0.0);
  parallel_for(q, [&](std::size_t i) {
    const auto pair = r_and_q(traj.states[i], d.energy, d.flow.grid);
    qs[i] = pair.q;
    rs[i] = pair.r;
  });
  out.r_start = rs.front();
  out.r_end = rs.back();
  out.q_integral = simpson(qs, -d.t / static_cast<double>(q - 1));
  return out;
}

inline double density_normal_form(const FourierState& u, const DensityParams& d) {
  return density_breakdown(u, d).log_g();
}

inline double density_wgm(const FourierState& u, const DensityParams& d) {
  return density_breakdown(u, d).log_f();
}

// --- observables ------------------------------------------------------------

struct ObservableSpec {
  enum class Kind { Constant, ModeModulusSq, LowNormSq, BoundedExp, HighMassOnly };

  Kind kind = Kind::Constant;
  int k = 0;          ///< ModeModulusSq
  double sigma = 0.0; ///< LowNormSq, BoundedExp
  int n_cut = 0;      ///< LowNormSq, HighMassOnly
  double scale = 1.0; ///< BoundedExp

  static ObservableSpec constant() { return {}; }
  static ObservableSpec mode_modulus_sq(int k) { return {Kind::ModeModulusSq, k}; }
  static ObservableSpec low_norm_sq(double sigma, int n) { return {Kind::LowNormSq, 0, sigma, n}; }
  static ObservableSpec bounded_exp(double sigma, double scale) { return {Kind::BoundedExp, 0, sigma, 0, scale}; }
  static ObservableSpec high_mass_only(int n) { return {Kind::HighMassOnly, 0, 0.0, n}; }

  double operator()(const FourierState& u) const {
    switch (kind) {
      case Kind::Constant: return 1.0;
      case Kind::ModeModulusSq: return std::norm(u.coeff(k));
      case Kind::LowNormSq: return sobolev_norm_sq(project_low(u, n_cut), sigma);
      case Kind::BoundedExp: return std::exp(-scale * sobolev_norm_sq(u, sigma));
      case Kind::HighMassOnly: return mass(project_high(u, n_cut));
    }
    return 0.0;
  }

  std::string name() const {
    switch (kind) {
      case Kind::Constant: return "constant";
      case Kind::ModeModulusSq: return "mode_modulus_sq(" + std::to_string(k) + ")";
      case Kind::LowNormSq: return "low_norm_sq(" + format_double(sigma) + "," + std::to_string(n_cut) + ")";
      case Kind::BoundedExp: return "bounded_exp(" + format_double(sigma) + "," + format_double(scale) + ")";
      case Kind::HighMassOnly: return "high_mass_only(" + std::to_string(n_cut) + ")";
    }
    return "?";
  }
};

/// Default battery for the change-of-measure test at truncation n.
inline std::vector<ObservableSpec> default_battery(int n) {
  return {ObservableSpec::constant(), ObservableSpec::mode_modulus_sq(0), ObservableSpec::mode_modulus_sq(1),
          ObservableSpec::low_norm_sq(1.0, n), ObservableSpec::bounded_exp(1.0, 1.0),
          ObservableSpec::high_mass_only(n)};
}

struct ChangeOfMeasureRow {
  ObservableSpec observable;
  McReport lhs;  ///< E[f(Phi_N(t)u) 1(Phi_N(t)u)]
  McReport rhs;  ///< E[f(u) 1(u) G_{s,N}(t,u)]
  double z = 0.0;  ///< paired z-score of lhs - rhs
};

/// Both sides over common samples u_i ~ mu_{s,M}; z uses the paired
/// differences, so shared sampling noise cancels.
inline std::vector<ChangeOfMeasureRow> change_of_measure_test(const DensityParams& d, const MeasureParams& m,
                                                              const std::vector<ObservableSpec>& obs, std::size_t n,
                                                              std::uint64_t seed) {
  d.validate();
  m.validate();
  if (m.m_ambient < d.energy.n_cut) throw TruncationExceedsAmbient(d.energy.n_cut, m.m_ambient);
  const std::size_t nobs = obs.size();
  std::vector<std::vector<double>> lhs(nobs, std::vector<double>(n)), rhs(nobs, std::vector<double>(n));
  parallel_for(n, [&](std::size_t i) {
    const FourierState u = sample_state(seed, i, m);
    const FourierState fwd = evolve(u, d.t, d.flow);
    const int in_u = optional_cutoff(u, m);
    const double g = in_u ? std::exp(density_direct(u, d)) : 0.0;
    const int in_fwd = optional_cutoff(fwd, m);
    for (std::size_t j = 0; j < nobs; ++j) {
      lhs[j][i] = in_fwd ? obs[j](fwd) : 0.0;
      rhs[j][i] = in_u ? obs[j](u) * g : 0.0;
    }
  });
  std::vector<ChangeOfMeasureRow> out;
  for (std::size_t j = 0; j < nobs; ++j) {
    std::vector<double> diff(n);
    for (std::size_t i = 0; i < n; ++i) diff[i] = lhs[j][i] - rhs[j][i];
    const McReport dr = mean_report(diff, seed);
    ChangeOfMeasureRow row{obs[j], mean_report(lhs[j], seed), mean_report(rhs[j], seed), 0.0};
    row.z = dr.stderr_ > 0.0 ? dr.estimate / dr.stderr_ : (dr.estimate == 0.0 ? 0.0 : std::copysign(INFINITY, dr.estimate));
    out.push_back(row);
  }
  return out;
}

// --- convergence in N ---------------------------------------------------------

enum class StudyQuantity { R, Q, G };

inline std::string to_string(StudyQuantity q) {
  return q == StudyQuantity::R ? "R" : q == StudyQuantity::Q ? "Q" : "G";
}

struct ConvergenceRow {
  int n_cut = 0;
  double sup_diff = 0.0;  ///< max over samples |X_{s,M} - X_{s,N}|
};

struct ConvergenceTable {
  StudyQuantity quantity = StudyQuantity::R;
  int m_ambient = 0;
  std::vector<ConvergenceRow> rows;

  /// Strictly decreasing over rows with N < M.
  bool strictly_decreasing() const {
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (!(rows[i].sup_diff < rows[i - 1].sup_diff)) return false;
    }
    return true;
  }
};

/// X at truncation n for one state: R, Q or log G (direct route).
inline double study_value(StudyQuantity q, const FourierState& u, int n, const WeightFamily& family, double t,
                          double step) {
  const EnergyParams e{n, family};
  switch (q) {
    case StudyQuantity::R: return r_correction(u, e);
    case StudyQuantity::Q: return q_derivative(u, e, GridSpec::for_quintic(n));
    case StudyQuantity::G: return density_direct(u, {t, e, FlowParams::make(n, step)});
  }
  return 0.0;
}

/// The fixed sample set (seed, streams 0..n_states-1) stands in for a compact set.
inline ConvergenceTable convergence_study(StudyQuantity q, const WeightFamily& family, double t, int n_states,
                                          const std::vector<int>& n_list, int m_ambient, std::uint64_t seed,
                                          double step = 1e-3) {
  for (int n : n_list)
    if (n > m_ambient) throw TruncationExceedsAmbient(n, m_ambient);
  MeasureParams mp{family, m_ambient, {}, {}};
  ConvergenceTable table{q, m_ambient, {}};
  const std::size_t ns = static_cast<std::size_t>(n_states);
  std::vector<double> ref(ns);
  parallel_for(ns, [&](std::size_t i) { ref[i] = study_value(q, sample_state(seed, i, mp), m_ambient, family, t, step); });
  for (int n : n_list) {
    std::vector<double> diff(ns);
    parallel_for(ns, [&](std::size_t i) {
      diff[i] = n == m_ambient ? 0.0 : std::abs(ref[i] - study_value(q, sample_state(seed, i, mp), n, family, t, step));
    });
    double sup = 0.0;
    for (double x : diff) sup = std::max(sup, x);
    table.rows.push_back({n, sup});
  }
  return table;
}

// --- L^p norms of densities -----------------------------------------------------

struct LpDensityRow {
  std::string quantity;  ///< "G" for ||G_{s,N}||_p, "G_diff" for ||G_{s,M} - G_{s,N}||_p
  int n_cut = 0;
  double p = 0.0;
  McReport norm;
};

/// ||G_{s,N}(t,.)||_{L^p(1{C<=R} dmu_{s,M})} at N = d's truncation and
/// ||G_{s,M} - G_{s,N}||_{L^p} for each N in n_list. The cutoff is optional;
/// without it the norms are over the whole of mu_{s,M}.
inline std::vector<LpDensityRow> lp_density_study(const DensityParams& d, const MeasureParams& m,
                                                  const std::vector<double>& p_list, const std::vector<int>& n_list,
                                                  std::size_t n, std::uint64_t seed) {
  d.validate();
  m.validate();
  const int big_m = m.m_ambient;
  for (int nc : n_list)
    if (nc > big_m) throw TruncationExceedsAmbient(nc, big_m);
  auto log_g_at = [&](const FourierState& u, int nc) {
    return density_direct(u, {d.t, EnergyParams{nc, d.energy.family}, FlowParams::make(nc, d.flow.step), d.quad_points});
  };
  std::vector<double> g_main(n), g_ref(n);
  std::vector<std::vector<double>> g_list(n_list.size(), std::vector<double>(n));
  parallel_for(n, [&](std::size_t i) {
    const FourierState u = sample_state(seed, i, m);
    const int in = optional_cutoff(u, m);
    g_main[i] = in ? std::exp(density_direct(u, d)) : 0.0;
    g_ref[i] = in ? std::exp(log_g_at(u, big_m)) : 0.0;
    for (std::size_t j = 0; j < n_list.size(); ++j) {
      g_list[j][i] = in ? std::exp(log_g_at(u, n_list[j])) : 0.0;
    }
  });
  std::vector<LpDensityRow> out;
  for (double p : p_list) {
    out.push_back({"G", d.energy.n_cut, p, lp_from_values(g_main, p, seed)});
    for (std::size_t j = 0; j < n_list.size(); ++j) {
      std::vector<double> diff(n);
      for (std::size_t i = 0; i < n; ++i) diff[i] = g_ref[i] - g_list[j][i];
      out.push_back({"G_diff", n_list[j], p, lp_from_values(diff, p, seed)});
    }
  }
  return out;
}

}  // namespace nlsqi

#endif  // NLSQI_TRANSPORT_HPP
