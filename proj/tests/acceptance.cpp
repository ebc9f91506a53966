// Acceptance run: one PASS/FAIL line per criterion, exit status 0 iff all pass.
//
//   acceptance            run everything
//   acceptance 3 5        run criteria 3 and 5 only

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "nlsqi/nlsqi.hpp"
#include "oracles.hpp"

using namespace nlsqi;

namespace {

const WeightFamily kJb2 = WeightFamily::japanese(2.0);

struct Verdict {
  bool pass = true;
  std::string detail;

  // records "name=value (op bound)" and folds the outcome in
  void le(const std::string& name, double value, double bound) {
    add(name + "=" + fmt(value) + " (<= " + fmt(bound) + ")", value <= bound);
  }
  void ge(const std::string& name, double value, double bound) {
    add(name + "=" + fmt(value) + " (>= " + fmt(bound) + ")", value >= bound);
  }
  void that(const std::string& what, bool ok) { add(what, ok); }
  void info(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }

  static std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
  }

 private:
  void add(const std::string& text, bool ok) {
    detail += (detail.empty() ? "" : "; ") + text + (ok ? "" : " [x]");
    pass = pass && ok;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

FourierState unit_h1(FourierState u) {
  u *= cplx(1.0 / std::sqrt(sobolev_norm_sq(u, 1.0)));
  return u;
}

// 1. Phi_4(1)(0.5 e^{ix}) against the closed form.
Verdict plane_wave() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  const cplx a{0.5, 0.0};
  const auto out = evolve(FourierState::mode(4, 1, a), 1.0, FlowParams::make(4, 1e-3));
  const auto exact = FourierState::mode(4, 1, a * std::polar(1.0, -(1.0 + 0.0625)));
  v.le("max coefficient error", testing_util::max_abs_diff(out, exact), 1e-8);
  v.le("runtime s", seconds_since(t0), 1.0);
  return v;
}

// 2. R, Q and the quintic term against nested-loop oracles, 100 states, N <= 3.
Verdict oracle_equivalence() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  double err_r = 0.0, err_q = 0.0, err_n = 0.0;
  const WeightFamily fams[] = {kJb2, WeightFamily::equivalent(2.0), WeightFamily::japanese(1.6),
                               WeightFamily::equivalent(3.0)};
  for (unsigned i = 0; i < 100; ++i) {
    const int n = 1 + static_cast<int>(i % 3);
    const auto& f = fams[i % 4];
    const auto u = testing_util::random_state(n, 1000 + i);
    const auto w = testing_util::centred(u, n);
    const auto quintic = oracle::quintic(w, n);
    const auto grid = GridSpec::for_quintic(n);
    const auto lib_n = quintic_nonlinearity(u, n, grid);
    double scale = 0.0, diff = 0.0;
    for (int k = -n; k <= n; ++k) {
      scale = std::max(scale, std::abs(quintic[static_cast<std::size_t>(k + n)]));
      diff = std::max(diff, std::abs(lib_n[k] - quintic[static_cast<std::size_t>(k + n)]));
    }
    err_n = std::max(err_n, diff / scale);

    const double r_ref = oracle::r_form(w, n, f).real() / 6.0;
    err_r = std::max(err_r, std::abs(r_correction(u, {n, f}) - r_ref) / std::abs(r_ref));

    const auto qs = oracle::q_sums(w, quintic, n, f);
    const double q_ref = (-qs.q0 / 6.0 + qs.q1 / 2.0 - qs.q2 / 2.0).imag();
    err_q = std::max(err_q, std::abs(q_derivative(u, {n, f}, grid) - q_ref) / std::abs(q_ref));
  }
  v.le("R rel", err_r, 1e-12);
  v.le("Q rel", err_q, 1e-12);
  v.le("quintic rel", err_n, 1e-12);
  v.le("runtime s", seconds_since(t0), 60.0);
  return v;
}

// 3. dE/dt along the flow equals Q, at 10 times of a trajectory (N = 8, s = 2).
Verdict normal_form_identity() {
  Verdict v;
  const int n = 8;
  const double d = 1e-4;
  const EnergyParams e{n, kJb2};
  const auto fp = FlowParams::make(n);
  const auto u0 = unit_h1(sample_state(2, 0, MeasureParams{kJb2, n, {}, {}}));
  const auto traj = evolve_trajectory(u0, 1.0, fp, 11);
  double worst = 0.0, worst2 = 0.0, qmax = 0.0;
  for (std::size_t j = 1; j < traj.states.size(); ++j) {
    const auto& w = traj.states[j];
    auto energy_at = [&](double dt) { return e_modified(evolve(w, dt, fp), e); };
    const double e1p = energy_at(d), e1m = energy_at(-d), e2p = energy_at(2 * d), e2m = energy_at(-2 * d);
    // five-point central difference; the three-point one is kept for the record
    const double fd = (8.0 * (e1p - e1m) - (e2p - e2m)) / (12.0 * d);
    const double fd2 = (e1p - e1m) / (2.0 * d);
    const double q = q_derivative(w, e, fp.grid);
    worst = std::max(worst, std::abs(fd - q) / std::abs(q));
    worst2 = std::max(worst2, std::abs(fd2 - q));
    qmax = std::max(qmax, std::abs(q));
  }
  v.le("max rel error (5-point, step 1e-4)", worst, 1e-5);
  v.info("3-point stencil: max |fd-Q| / max |Q| = " + Verdict::fmt(worst2 / qmax));
  return v;
}

// 4. Direct and normal-form log G on 20 samples (N = 8, t = 0.5, h = 1e-3, 501 nodes).
Verdict density_two_formulas() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  const int n = 8;
  const auto d = DensityParams::make(0.5, n, kJb2, 1e-3, 501);
  const MeasureParams mp{kJb2, n, 8.0, n};
  double gap = 0.0;
  int found = 0;
  for (std::uint64_t j = 0; found < 20; ++j) {
    const auto u = sample_state(31, j, mp);
    if (!cutoff_indicator(u, mp)) continue;
    ++found;
    gap = std::max(gap, std::abs(density_normal_form(u, d) - density_direct(u, d)));
  }
  v.le("max |log G_direct - log G_nf|", gap, 1e-6);
  v.le("runtime s", seconds_since(t0), 300.0);
  return v;
}

// 5. Change of measure, N = 4, s = 2, M = 16, t = 0.3, n = 1e5, six observables.
Verdict change_of_measure() {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  const auto d = DensityParams::make(0.3, 4, kJb2);
  const MeasureParams mp{kJb2, 16, 8.0, 4};
  const auto rows = change_of_measure_test(d, mp, default_battery(4), 100000, 1);
  v.that(std::to_string(rows.size()) + " observables", rows.size() >= 5);
  for (const auto& r : rows) v.le("|z| " + r.observable.name(), std::abs(r.z), 4.0);
  v.le("runtime s", seconds_since(t0), 600.0);
  return v;
}

// 6. Divergence-free field and volume-preserving flow.
Verdict liouville() {
  Verdict v;
  double div = 0.0;
  for (std::uint64_t i = 0; i < 50; ++i) {
    const int n = 1 + static_cast<int>(i % 3);
    div = std::max(div, std::abs(divergence_at(sample_state(6, i, MeasureParams{kJb2, n, {}, {}}), FlowParams::make(n))));
  }
  double det = 0.0;
  for (std::uint64_t i = 0; i < 5; ++i) {
    const auto u = unit_h1(sample_state(6, 100 + i, MeasureParams{kJb2, 2, {}, {}}));
    det = std::max(det, std::abs(jacobian_det(u, 0.5, FlowParams::make(2)) - 1.0));
  }
  v.le("max |div| (50 points)", div, 1e-6);
  v.le("max |det - 1|", det, 1e-6);
  return v;
}

// 7. Mass and C drift over [0, 1] at N = 16, h = 1e-3; fourth-order step refinement.
Verdict conservation() {
  Verdict v;
  const int n = 16;
  const MeasureParams mp{kJb2, n, {}, {}};
  double mass_drift = 0.0, c_drift = 0.0;
  for (std::uint64_t i = 0; i < 3; ++i) {
    const auto fp = FlowParams::make(n, 1e-3);
    const auto rep = growth_monitor(evolve_trajectory(unit_h1(sample_state(7, i, mp)), 1.0, fp, 21), 1.0, fp,
                                    std::numeric_limits<double>::infinity());
    mass_drift = std::max(mass_drift, rep.mass_drift);
    c_drift = std::max(c_drift, rep.conserved_drift);
  }
  v.le("mass drift", mass_drift, 1e-8);
  v.le("C drift", c_drift, 1e-8);

  const auto u = unit_h1(sample_state(7, 0, mp));
  auto drift = [&](double h) {
    const auto fp = FlowParams::make(n, h);
    return growth_monitor(evolve_trajectory(u, 1.0, fp, 21), 1.0, fp, std::numeric_limits<double>::infinity())
        .conserved_drift;
  };
  const auto ref = evolve(u, 1.0, FlowParams::make(n, 1e-4));
  auto error = [&](double h) { return std::sqrt(sobolev_norm_sq(evolve(u, 1.0, FlowParams::make(n, h)) - ref, 1.0)); };
  v.ge("C drift ratio h->h/2", drift(1e-3) / drift(5e-4), 12.0);
  const double ratio = error(1e-3) / error(5e-4);
  v.ge("solution error ratio h->h/2", ratio, 14.0);
  v.le("solution error ratio h->h/2", ratio, 18.0);
  return v;
}

// 8. sup |X_32 - X_N| over 20 fixed samples decreases along N = 4, 8, 16 (pinned).
Verdict convergence_in_n() {
  Verdict v;
  struct Pinned {
    StudyQuantity q;
    double values[3];
  };
  const Pinned pinned[] = {
      {StudyQuantity::R, {5.1013809204933835, 2.8350740501041862, 0.93538342043913758}},
      {StudyQuantity::Q, {399.07820086581199, 78.011028552064204, 9.1487076745163307}},
      {StudyQuantity::G, {344.09741585316999, 124.26539170098445, 3.93027604598376}},
  };
  for (const auto& p : pinned) {
    const auto tab = convergence_study(p.q, kJb2, 0.3, 20, {4, 8, 16}, 32, 2024);
    const std::string name = to_string(p.q);
    v.that(name + " strictly decreasing", tab.strictly_decreasing());
    double worst = 0.0;
    for (std::size_t i = 0; i < 3; ++i) worst = std::max(worst, std::abs(tab.rows[i].sup_diff / p.values[i] - 1.0));
    v.le(name + " rel dev from pinned", worst, 1e-8);
  }
  return v;
}

// 9. Counting bound, psi estimate, Strichartz identity.
Verdict lemma_sweeps() {
  Verdict v;
  const auto sweep = counting_sweep(4, 8, 64);
  v.le("counting max ratio", sweep.max_ratio, kCountingRatioPinned);
  for (double s : {1.6, 2.0, 2.5}) {
    const double r8 = psi_bound_ratio(8, s), r16 = psi_bound_ratio(16, s);
    v.that("psi ratio finite s=" + Verdict::fmt(s), std::isfinite(r8) && std::isfinite(r16));
    v.le("psi ratio 16/8 s=" + Verdict::fmt(s), r16 / r8, 2.0);
  }
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  double worst = 0.0;
  for (int n = 1; n <= 4; ++n) {
    for (long long kappa : {-5LL, 0LL, 2LL, 7LL, 3LL * n * n}) {
      std::vector<std::vector<cplx>> f(6, std::vector<cplx>(static_cast<std::size_t>(2 * n + 1)));
      for (auto& a : f)
        for (auto& z : a) z = {ud(gen), ud(gen)};
      const auto r = strichartz_sum(n, kappa, f);
      worst = std::max(worst, std::abs(r.brute - r.quadrature) / std::max(1.0, r.brute));
    }
  }
  v.le("Strichartz rel gap", worst, 1e-10);
  return v;
}

// 10. Sampler covariance, weight L^2 norm, E[G] = 1, moment growth.
Verdict measure_sanity() {
  Verdict v;
  double zmax = 0.0;
  for (const auto& mm : mode_variances(MeasureParams{kJb2, 16, {}, {}}, 100000, 21)) zmax = std::max(zmax, std::abs(*mm.second.z));
  v.le("max |z| mode variance", zmax, 4.0);

  const MeasureParams m32{kJb2, 32, 8.0, {}};
  std::vector<McReport> norms;
  for (int n : {4, 8, 16}) {
    const EnergyParams e{n, kJb2};
    norms.push_back(lp_norm_mc(
        [&](const FourierState& u) { return cutoff_indicator(u, m32) ? std::exp(std::abs(r_correction(u, e))) : 0.0; },
        2.0, m32, 10000, 7));
  }
  const bool finite = std::isfinite(norms[0].estimate) && std::isfinite(norms[1].estimate) && std::isfinite(norms[2].estimate);
  v.that("weight L2 norms finite (" + Verdict::fmt(norms[0].estimate) + ", " + Verdict::fmt(norms[1].estimate) + ", " +
             Verdict::fmt(norms[2].estimate) + ")",
         finite);
  v.le("|norm16 - norm8| / se", std::abs(norms[2].estimate - norms[1].estimate) / std::hypot(norms[1].stderr_, norms[2].stderr_),
       4.0);

  // E[G] = 1 under the restricted measure: E[1{C_4 <= 8}(G - 1)] = 0
  const auto d = DensityParams::make(0.3, 4, kJb2);
  const MeasureParams m16{kJb2, 16, 8.0, 4};
  const auto centred_g = map_samples(m16, 100000, 5, [&](const FourierState& u) {
    return cutoff_indicator(u, m16) ? std::exp(density_direct(u, d)) - 1.0 : 0.0;
  });
  const auto eg = mean_report(centred_g, 5);
  v.le("|z| E[G] - 1", std::abs(eg.estimate / eg.stderr_), 4.0);

  const MeasureParams gm{kJb2, 16, {}, {}};
  const auto pts = moment_growth_mc(gm, 0.0, 16, 100000, 3);
  const double l2 = gaussian_second_moment(gm, 0.0);
  double worst = 0.0;
  for (const auto& p : pts) worst = std::max(worst, p.ratio);
  v.le("max (E|u|^m)^{1/m}/sqrt(m), m<=16", worst, l2);
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* title;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> all{
      {1, "plane-wave exactness", plane_wave},
      {2, "oracle equivalence", oracle_equivalence},
      {3, "normal-form identity", normal_form_identity},
      {4, "density two-formula agreement", density_two_formulas},
      {5, "Monte Carlo change of measure", change_of_measure},
      {6, "Liouville", liouville},
      {7, "conservation", conservation},
      {8, "convergence in N", convergence_in_n},
      {9, "lemma sweeps", lemma_sweeps},
      {10, "measure sanity", measure_sanity},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.that(std::string("exception: ") + e.what(), false);
    }
    std::printf("%s [%d] %s (%.1f s): %s\n", v.pass ? "PASS" : "FAIL", c.id, c.title, seconds_since(t0), v.detail.c_str());
    std::fflush(stdout);
    failed += v.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
