// nlsqi_cli: experiment runner for the truncated quintic NLS studies.
//
//   nlsqi_cli <command> [--config file.json] [--key value ...]
//
// Parameters come from a flat JSON object; any key can be overridden on the
// command line (command line wins). Each command writes <output>.csv and
// <output>.json, prints one PASS/FAIL line and exits 0 iff every check passed.
// Exit codes: 0 pass, 1 a check failed, 2 invalid config, 3 runtime error.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nlsqi/nlsqi.hpp"

namespace {

using json = nlohmann::json;
using namespace nlsqi;

// --- configuration ------------------------------------------------------------

struct KeyInfo {
  const char* name;
  const char* help;
};

// Every key a config file or flag may carry.
const KeyInfo kKeys[] = {
    {"family", "weight family: japanese | equivalent"},
    {"s", "Sobolev exponent, in (1.5, 4]"},
    {"N", "truncation of the nonlinearity"},
    {"M", "ambient truncation of the samples (default 4N)"},
    {"t", "transport / evolution time, |t| <= 4"},
    {"h", "RK4 step"},
    {"R", "cutoff radius for C(u) <= R, or null"},
    {"seed", "master seed"},
    {"n_samples", "Monte Carlo sample count"},
    {"quad", "Simpson nodes (odd)"},
    {"output", "output path prefix"},
    {"init", "simulate: plane-wave | sample"},
    {"k", "simulate: plane-wave frequency"},
    {"amplitude", "simulate: plane-wave amplitude"},
    {"snapshots", "simulate: number of stored states"},
    {"sigma", "Sobolev index of monitored / moment norms"},
    {"normalize", "simulate: rescale sampled data to unit H^1 norm"},
    {"observables", "transport-mc: \"battery\" or a list of observable names"},
    {"quantity", "convergence: R | Q | G | all"},
    {"n_list", "list of truncations"},
    {"n_states", "convergence: size of the fixed sample set"},
    {"p", "list of L^p exponents"},
    {"max_m", "lemmas: largest number of blocks"},
    {"max_block", "lemmas: largest dyadic block"},
    {"max_kappa", "lemmas: largest |kappa|"},
    {"s_list", "lemmas: exponents for the psi ratio"},
    {"psi_n", "lemmas: truncations for the psi ratio"},
    {"strichartz_n", "lemmas: largest truncation for the Strichartz identity"},
    {"m_max", "moments: largest even moment"},
};

bool is_known(const std::string& key) {
  return std::any_of(std::begin(kKeys), std::end(kKeys), [&](const KeyInfo& k) { return key == k.name; });
}

json command_defaults(const std::string& cmd) {
  json d{{"family", "japanese"}, {"s", 2.0},       {"N", 4},       {"M", nullptr}, {"t", 0.3},
         {"h", 1e-3},            {"R", nullptr},   {"seed", 1},    {"n_samples", 1000},
         {"quad", 501},          {"output", cmd}};
  if (cmd == "simulate") {
    d.update({{"init", "plane-wave"}, {"k", 1}, {"amplitude", 0.5}, {"t", 1.0}, {"snapshots", 11}, {"sigma", 1.0},
              {"normalize", true}});
  } else if (cmd == "density-check") {
    d.update({{"N", 8}, {"t", 0.5}, {"n_samples", 5}});
  } else if (cmd == "transport-mc") {
    d.update({{"M", 16}, {"R", 8.0}, {"n_samples", 10000}, {"observables", "battery"}});
  } else if (cmd == "convergence") {
    d.update({{"quantity", "all"}, {"n_list", {4, 8, 16}}, {"M", 32}, {"n_states", 20}, {"seed", 2024}});
  } else if (cmd == "liouville") {
    d.update({{"N", 2}, {"t", 0.5}, {"n_samples", 50}});
  } else if (cmd == "lemmas") {
    d.update({{"max_m", 4}, {"max_block", 8}, {"max_kappa", 64}, {"s_list", {1.6, 2.0, 2.5}}, {"psi_n", {8, 16}},
              {"strichartz_n", 4}});
  } else if (cmd == "lp-density") {
    d.update({{"N", 8}, {"M", 32}, {"R", 8.0}, {"p", {1.0, 2.0}}, {"n_list", {4, 8}}});
  } else if (cmd == "moments") {
    d.update({{"sigma", 0.0}, {"m_max", 16}, {"n_samples", 100000}, {"M", 16}});
  }
  return d;
}

/// Flag text to JSON: numbers, booleans, null and arrays parse as JSON; a
/// comma-separated list becomes an array; anything else is a string.
json parse_flag(const std::string& text) {
  if (text.find(',') != std::string::npos && text.front() != '[') {
    json list = json::array();
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) list.push_back(parse_flag(item));
    return list;
  }
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return text;
  }
}

class Config {
 public:
  Config(std::string command, json values) : command_(std::move(command)), v_(std::move(values)) {}

  const json& values() const { return v_; }
  const std::string& command() const { return command_; }

  bool is_null(const std::string& key) const { return v_.at(key).is_null(); }

  double real(const std::string& key) const {
    const json& x = get(key);
    if (!x.is_number()) throw ConfigInvalid(key, "expected a number");
    return x.get<double>();
  }

  long long integer(const std::string& key) const {
    const json& x = get(key);
    if (x.is_number_integer()) return x.get<long long>();
    if (x.is_number_float() && std::floor(x.get<double>()) == x.get<double>()) return static_cast<long long>(x.get<double>());
    throw ConfigInvalid(key, "expected an integer");
  }

  int integer_in(const std::string& key, long long lo, long long hi) const {
    const long long x = integer(key);
    if (x < lo || x > hi) throw ConfigInvalid(key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return static_cast<int>(x);
  }

  std::string text(const std::string& key) const {
    const json& x = get(key);
    if (!x.is_string()) throw ConfigInvalid(key, "expected a string");
    return x.get<std::string>();
  }

  bool flag(const std::string& key) const {
    const json& x = get(key);
    if (!x.is_boolean()) throw ConfigInvalid(key, "expected true or false");
    return x.get<bool>();
  }

  std::vector<double> reals(const std::string& key) const {
    const json& x = get(key);
    if (x.is_number()) return {x.get<double>()};
    if (!x.is_array() || x.empty()) throw ConfigInvalid(key, "expected a non-empty list of numbers");
    std::vector<double> out;
    for (const auto& e : x) {
      if (!e.is_number()) throw ConfigInvalid(key, "expected a list of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<int> integers(const std::string& key, int lo, int hi) const {
    std::vector<int> out;
    for (double d : reals(key)) {
      if (std::floor(d) != d || d < lo || d > hi) {
        throw ConfigInvalid(key, "entries must be integers in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
      }
      out.push_back(static_cast<int>(d));
    }
    return out;
  }

  // physical parameters, range-checked
  WeightFamily family() const {
    const std::string name = text("family");
    if (name != "japanese" && name != "equivalent") throw ConfigInvalid("family", "use japanese or equivalent");
    const double s = sobolev("s");
    return name == "japanese" ? WeightFamily::japanese(s) : WeightFamily::equivalent(s);
  }
  double sobolev(const std::string& key) const {
    const double s = real(key);
    if (!(s > 1.5 && s <= 4.0)) throw ConfigInvalid(key, "must lie in (1.5, 4]");
    return s;
  }
  int n_cut() const { return integer_in("N", 0, 128); }
  int m_ambient() const {
    const int n = n_cut();
    const int m = is_null("M") ? std::min(4 * n, 128) : integer_in("M", 0, 128);
    if (m < n) throw ConfigInvalid("M", "must be >= N");
    return m;
  }
  double time() const {
    const double t = real("t");
    if (!(std::abs(t) <= 4.0)) throw ConfigInvalid("t", "|t| must be <= 4");
    return t;
  }
  double step() const {
    const double h = real("h");
    if (!(h > 0.0 && h <= 0.1)) throw ConfigInvalid("h", "must lie in (0, 0.1]");
    return h;
  }
  std::optional<double> cutoff() const {
    if (is_null("R")) return std::nullopt;
    const double r = real("R");
    if (!(r > 0.0)) throw ConfigInvalid("R", "must be positive or null");
    return r;
  }
  std::uint64_t seed() const {
    const json& x = get("seed");
    if (!x.is_number_integer() || (x.is_number_integer() && !x.is_number_unsigned() && x.get<long long>() < 0)) {
      throw ConfigInvalid("seed", "expected a non-negative integer");
    }
    return x.get<std::uint64_t>();
  }
  std::size_t samples() const { return static_cast<std::size_t>(integer_in("n_samples", 1, 100'000'000)); }
  int quad() const {
    const int q = integer_in("quad", 3, 1'000'001);
    if (q % 2 == 0) throw ConfigInvalid("quad", "must be odd");
    return q;
  }
  std::vector<double> exponents(const std::string& key) const {
    auto p = reals(key);
    for (double x : p)
      if (!(x >= 1.0)) throw ConfigInvalid(key, "exponents must be >= 1");
    return p;
  }

 private:
  const json& get(const std::string& key) const {
    const auto it = v_.find(key);
    if (it == v_.end() || it->is_null()) throw ConfigInvalid(key, "missing");
    return *it;
  }

  std::string command_;
  json v_;
};

Config resolve_config(const std::string& cmd, const std::string& path, const std::map<std::string, std::string>& flags) {
  json v = command_defaults(cmd);
  if (!path.empty()) {
    std::ifstream f(path);
    if (!f) throw ConfigInvalid("config", "cannot open '" + path + "'");
    json file;
    try {
      file = json::parse(f);
    } catch (const json::parse_error& e) {
      throw ConfigInvalid("config", std::string("not valid JSON: ") + e.what());
    }
    if (!file.is_object()) throw ConfigInvalid("config", "top level must be an object");
    for (auto it = file.begin(); it != file.end(); ++it) {
      if (!is_known(it.key())) throw ConfigInvalid(it.key(), "unknown key");
      if (it->is_object()) throw ConfigInvalid(it.key(), "nested objects are not allowed");
      v[it.key()] = *it;
    }
  }
  for (const auto& [key, text] : flags) v[key] = parse_flag(text);
  return Config(cmd, v);
}

// --- results ------------------------------------------------------------------

struct Check {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct Outcome {
  std::vector<StudyRow> rows;
  std::vector<Check> checks;
  json results = json::object();

  void check_le(const std::string& name, double value, double bound) {
    checks.push_back({name, value, bound, value <= bound});
  }
  void check_true(const std::string& name, bool ok) { checks.push_back({name, ok ? 1.0 : 0.0, 1.0, ok}); }
  void row(const Config& c, const std::string& study, int n, int m, double t, double p, double est, double se,
           std::size_t count) {
    rows.push_back({study, c.values().value("s", 0.0), n, m, t, p, est, se, count, c.seed()});
  }
};

json checks_json(const std::vector<Check>& checks) {
  json a = json::array();
  for (const auto& c : checks) a.push_back({{"name", c.name}, {"value", c.value}, {"bound", c.bound}, {"pass", c.pass}});
  return a;
}

// --- commands -------------------------------------------------------------------

FourierState unit_h1(FourierState u) {
  const double n = std::sqrt(sobolev_norm_sq(u, 1.0));
  if (n > 0.0) u *= cplx(1.0 / n);
  return u;
}

Outcome run_simulate(const Config& c) {
  Outcome o;
  const int n = c.n_cut(), m = c.m_ambient();
  const double t = c.time(), sigma = c.real("sigma");
  const FlowParams fp = FlowParams::make(n, c.step());
  const std::string init = c.text("init");
  FourierState u0(m);
  if (init == "plane-wave") {
    const int k = c.integer_in("k", -m, m);
    u0 = FourierState::mode(m, k, c.real("amplitude"));
  } else if (init == "sample") {
    u0 = sample_state(c.seed(), 0, MeasureParams{c.family(), m, {}, {}});
    if (c.flag("normalize")) u0 = unit_h1(u0);
  } else {
    throw ConfigInvalid("init", "use plane-wave or sample");
  }
  const Trajectory traj = evolve_trajectory(u0, t, fp, c.integer_in("snapshots", 2, 100000));

  GrowthReport rep;
  bool bound_ok = true;
  try {
    rep = growth_monitor(traj, sigma, fp, std::numeric_limits<double>::infinity());
  } catch (const BoundViolated&) {
    bound_ok = false;
  }
  o.check_true("h_sigma_exponential_bound", bound_ok);
  o.check_le("mass_relative_drift", rep.mass_drift, 1e-8);
  o.check_le("conserved_relative_drift", rep.conserved_drift, 1e-8);

  if (init == "plane-wave") {
    // u = a e^{ikx}: low modes rotate by k^2 + a^4, high modes by k^2
    const int k = c.integer_in("k", -m, m);
    const double a = c.real("amplitude");
    const double rate = double(k) * k + (std::abs(k) <= n ? std::pow(a, 4) : 0.0);
    double err = 0.0;
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
      const FourierState exact = FourierState::mode(m, k, a * std::polar(1.0, -rate * traj.times[i]));
      for (int j = -m; j <= m; ++j) err = std::max(err, std::abs(traj.states[i][j] - exact[j]));
    }
    o.check_le("plane_wave_coefficient_error", err, 1e-8);
  }

  const GridSpec grid = GridSpec::for_quintic(std::min(n, m));
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const auto& u = traj.states[i];
    const double ti = traj.times[i];
    o.row(c, "mass", n, m, ti, 0.0, mass(u), 0.0, 1);
    o.row(c, "conserved", n, m, ti, 0.0, conserved_c(u, grid, n), 0.0, 1);
    o.row(c, "h_sigma_norm", n, m, ti, sigma, std::sqrt(sobolev_norm_sq(u, sigma)), 0.0, 1);
  }
  o.results = {{"trajectory", trajectory_to_json(traj, fp, c.seed())},
               {"growth_constant", rep.c0},
               {"max_bound_ratio", rep.max_bound_ratio}};
  return o;
}

/// Sample indices (in seed order) whose C_N lies within the cutoff, if any.
std::vector<FourierState> draw_states(const MeasureParams& mp, std::size_t count, std::uint64_t seed) {
  std::vector<FourierState> out;
  for (std::uint64_t j = 0; out.size() < count; ++j) {
    if (j > 1000 * count + 10000) throw Error("cutoff set too small: no samples found within R");
    auto u = sample_state(seed, j, mp);
    if (optional_cutoff(u, mp)) out.push_back(std::move(u));
  }
  return out;
}

Outcome run_density_check(const Config& c) {
  Outcome o;
  const int n = c.n_cut();
  const int m = c.is_null("M") ? n : c.m_ambient();
  const DensityParams d{c.time(), EnergyParams{n, c.family()}, FlowParams::make(n, c.step()), c.quad()};
  const MeasureParams mp{c.family(), m, c.cutoff(), n};
  const auto states = draw_states(mp, c.samples(), c.seed());
  json per = json::array();
  double gap = 0.0, ident = 0.0, mean = 0.0;
  for (const auto& u : states) {
    const double direct = density_direct(u, d);
    const NormalFormDensity b = density_breakdown(u, d);
    const double lf_identity = b.log_g() - 2.0 * kPrecision * (b.r_end - b.r_start);
    gap = std::max(gap, std::abs(b.log_g() - direct));
    ident = std::max(ident, std::abs(b.log_f() - lf_identity) / (1.0 + std::abs(b.log_g())));
    mean += direct / double(states.size());
    per.push_back({{"log_g_direct", direct}, {"log_g_normal_form", b.log_g()}, {"log_f", b.log_f()},
                   {"r_start", b.r_start}, {"r_end", b.r_end}, {"q_integral", b.q_integral}});
  }
  o.check_le("max_two_formula_gap", gap, 1e-6);
  o.check_le("max_wgm_identity_gap", ident, 1e-12);
  o.row(c, "max_two_formula_gap", n, m, d.t, 0.0, gap, 0.0, states.size());
  o.row(c, "mean_log_g", n, m, d.t, 0.0, mean, 0.0, states.size());
  o.results = {{"samples", per}};
  return o;
}

ObservableSpec observable_by_name(const std::string& name, int n) {
  if (name == "constant") return ObservableSpec::constant();
  if (name == "mode0") return ObservableSpec::mode_modulus_sq(0);
  if (name == "mode1") return ObservableSpec::mode_modulus_sq(1);
  if (name == "low_norm") return ObservableSpec::low_norm_sq(1.0, n);
  if (name == "bounded_exp") return ObservableSpec::bounded_exp(1.0, 1.0);
  if (name == "high_mass") return ObservableSpec::high_mass_only(n);
  throw ConfigInvalid("observables", "unknown observable '" + name + "'");
}

Outcome run_transport_mc(const Config& c) {
  Outcome o;
  const int n = c.n_cut(), m = c.m_ambient();
  const DensityParams d{c.time(), EnergyParams{n, c.family()}, FlowParams::make(n, c.step()), c.quad()};
  const MeasureParams mp{c.family(), m, c.cutoff(), n};
  std::vector<ObservableSpec> obs;
  const json& sel = c.values().at("observables");
  if (sel == "battery") {
    obs = default_battery(n);
  } else if (sel.is_string()) {
    obs.push_back(observable_by_name(sel.get<std::string>(), n));
  } else if (sel.is_array() && !sel.empty()) {
    for (const auto& e : sel) {
      if (!e.is_string()) throw ConfigInvalid("observables", "expected names");
      obs.push_back(observable_by_name(e.get<std::string>(), n));
    }
  } else {
    throw ConfigInvalid("observables", "use \"battery\" or a list of names");
  }
  const auto rows = change_of_measure_test(d, mp, obs, c.samples(), c.seed());
  json per = json::array();
  for (const auto& r : rows) {
    const std::string name = r.observable.name();
    o.check_le("abs_z:" + name, std::abs(r.z), 4.0);
    o.row(c, "lhs:" + name, n, m, d.t, 0.0, r.lhs.estimate, r.lhs.stderr_, r.lhs.n);
    o.row(c, "rhs:" + name, n, m, d.t, 0.0, r.rhs.estimate, r.rhs.stderr_, r.rhs.n);
    per.push_back({{"observable", name}, {"lhs", to_json(r.lhs)}, {"rhs", to_json(r.rhs)}, {"z", r.z}});
  }
  o.results = {{"observables", per}};
  return o;
}

Outcome run_convergence(const Config& c) {
  Outcome o;
  const int m = c.is_null("M") ? 32 : c.integer_in("M", 0, 128);
  const auto n_list = c.integers("n_list", 0, m);
  const std::string which = c.text("quantity");
  std::vector<StudyQuantity> qs;
  if (which == "all") qs = {StudyQuantity::R, StudyQuantity::Q, StudyQuantity::G};
  else if (which == "R") qs = {StudyQuantity::R};
  else if (which == "Q") qs = {StudyQuantity::Q};
  else if (which == "G") qs = {StudyQuantity::G};
  else throw ConfigInvalid("quantity", "use R, Q, G or all");
  const double t = c.time();
  for (auto q : qs) {
    const auto tab = convergence_study(q, c.family(), t, c.integer_in("n_states", 1, 1'000'000), n_list, m, c.seed(),
                                       c.step());
    json rows = json::array();
    for (const auto& r : tab.rows) {
      o.row(c, "sup_" + to_string(q), r.n_cut, m, t, 0.0, r.sup_diff, 0.0, static_cast<std::size_t>(c.integer("n_states")));
      rows.push_back({{"N", r.n_cut}, {"sup_diff", r.sup_diff}});
    }
    o.check_true("strictly_decreasing:" + to_string(q), tab.strictly_decreasing());
    o.results[to_string(q)] = rows;
  }
  return o;
}

Outcome run_liouville(const Config& c) {
  Outcome o;
  const int n = c.integer_in("N", 1, 8);
  const FlowParams fp = FlowParams::make(n, c.step());
  const MeasureParams mp{c.family(), n, {}, {}};
  const double t = c.time();
  double div = 0.0, det = 0.0;
  const std::size_t count = c.samples();
  for (std::size_t i = 0; i < count; ++i) div = std::max(div, std::abs(divergence_at(sample_state(c.seed(), i, mp), fp)));
  // determinant on unit-H^1 data, a few points suffice
  const std::size_t n_det = std::min<std::size_t>(count, 3);
  for (std::size_t i = 0; i < n_det; ++i) {
    det = std::max(det, std::abs(jacobian_det(unit_h1(sample_state(c.seed(), i, mp)), t, fp) - 1.0));
  }
  o.check_le("max_abs_divergence", div, 1e-6);
  o.check_le("max_abs_det_minus_one", det, 1e-6);
  o.row(c, "max_abs_divergence", n, n, 0.0, 0.0, div, 0.0, count);
  o.row(c, "max_abs_det_minus_one", n, n, t, 0.0, det, 0.0, n_det);
  return o;
}

Outcome run_lemmas(const Config& c) {
  Outcome o;
  const auto sweep = counting_sweep(c.integer_in("max_m", 2, 6), c.integer_in("max_block", 1, 64),
                                    c.integer_in("max_kappa", 0, 100000));
  o.check_le("counting_max_ratio", sweep.max_ratio, kCountingRatioPinned);
  o.row(c, "counting_max_ratio", 0, 0, 0.0, 0.0, sweep.max_ratio, 0.0, sweep.cases);
  o.results["counting"] = {{"max_ratio", sweep.max_ratio}, {"argmax_blocks", sweep.argmax_blocks},
                           {"argmax_signs", sweep.argmax_signs}, {"argmax_kappa", sweep.argmax_kappa},
                           {"cases", sweep.cases}};

  const auto psi_n = c.integers("psi_n", 1, 64);
  json psi = json::array();
  for (double s : c.reals("s_list")) {
    if (!(s > 1.5 && s <= 4.0)) throw ConfigInvalid("s_list", "entries must lie in (1.5, 4]");
    std::vector<double> ratios;
    for (int n : psi_n) {
      ratios.push_back(psi_bound_ratio(n, s));
      o.rows.push_back({"psi_ratio", s, n, n, 0.0, 0.0, ratios.back(), 0.0, 1, c.seed()});
    }
    const bool finite = std::all_of(ratios.begin(), ratios.end(), [](double r) { return std::isfinite(r); });
    o.check_true("psi_ratio_finite:s=" + format_double(s), finite);
    o.check_le("psi_ratio_growth:s=" + format_double(s), ratios.back() / ratios.front(), 2.0);
    psi.push_back({{"s", s}, {"N", psi_n}, {"ratio", ratios}});
  }
  o.results["psi"] = psi;

  double worst = 0.0;
  SeededRng rng(c.seed(), 0);
  const int n_max = c.integer_in("strichartz_n", 1, 8);
  for (int n = 1; n <= n_max; ++n) {
    for (long long kappa : {-5LL, 0LL, 2LL, 7LL, 3LL * n * n}) {
      std::vector<std::vector<cplx>> f(6, std::vector<cplx>(static_cast<std::size_t>(2 * n + 1)));
      for (auto& a : f)
        for (auto& z : a) z = {rng.uniform(), rng.uniform()};
      const auto r = strichartz_sum(n, kappa, f);
      worst = std::max(worst, std::abs(r.brute - r.quadrature) / std::max(1.0, r.brute));
    }
  }
  o.check_le("strichartz_max_rel_gap", worst, 1e-10);
  o.row(c, "strichartz_max_rel_gap", n_max, n_max, 0.0, 0.0, worst, 0.0, static_cast<std::size_t>(5 * n_max));
  return o;
}

Outcome run_lp_density(const Config& c) {
  Outcome o;
  const int n = c.n_cut(), m = c.m_ambient();
  const DensityParams d{c.time(), EnergyParams{n, c.family()}, FlowParams::make(n, c.step()), c.quad()};
  const MeasureParams mp{c.family(), m, c.cutoff(), {}};
  const auto p_list = c.exponents("p");
  const auto n_list = c.integers("n_list", 0, m);
  const auto rows = lp_density_study(d, mp, p_list, n_list, c.samples(), c.seed());
  json out = json::array();
  std::map<double, std::vector<double>> diffs;
  for (const auto& r : rows) {
    o.row(c, r.quantity == "G" ? "G_norm" : "G_diff", r.n_cut, m, d.t, r.p, r.norm.estimate, r.norm.stderr_, r.norm.n);
    o.check_true("finite:" + r.quantity + ":N=" + std::to_string(r.n_cut) + ":p=" + format_double(r.p),
                 std::isfinite(r.norm.estimate));
    if (r.quantity == "G_diff") diffs[r.p].push_back(r.norm.estimate);
    out.push_back({{"quantity", r.quantity}, {"N", r.n_cut}, {"p", r.p}, {"norm", to_json(r.norm)}});
  }
  for (const auto& [p, v] : diffs) {
    bool dec = true;
    for (std::size_t i = 1; i < v.size(); ++i) dec = dec && v[i] < v[i - 1];
    o.check_true("difference_decreasing:p=" + format_double(p), dec);
  }
  o.results = {{"norms", out}};
  return o;
}

Outcome run_moments(const Config& c) {
  Outcome o;
  const MeasureParams mp{c.family(), c.is_null("M") ? 16 : c.integer_in("M", 0, 128), {}, {}};
  const double sigma = c.real("sigma");
  const int m_max = c.integer_in("m_max", 2, 64);
  const auto pts = moment_growth_mc(mp, sigma, m_max, c.samples(), c.seed());
  // Gaussian hypercontractivity: (E X^m)^{1/m} <= sqrt(m-1) (E X^2)^{1/2}, so
  // the ratio to sqrt(m) never exceeds the exact L^2 value
  const double l2 = gaussian_second_moment(mp, sigma);
  json out = json::array();
  double worst = 0.0;
  for (const auto& p : pts) {
    worst = std::max(worst, p.ratio);
    o.rows.push_back({"moment", mp.s(), 0, mp.m_ambient, 0.0, double(p.m), p.estimate, p.stderr_, c.samples(), c.seed()});
    out.push_back({{"m", p.m}, {"estimate", p.estimate}, {"stderr", p.stderr_}, {"ratio", p.ratio}});
  }
  o.check_le("second_moment_abs_z", std::abs(pts[0].estimate - l2) / pts[0].stderr_, 4.0);
  o.check_le("max_ratio_to_sqrt_m", worst, l2);
  o.results = {{"moments", out}, {"exact_second_moment", l2}};
  return o;
}

using Runner = Outcome (*)(const Config&);

const std::map<std::string, std::pair<Runner, const char*>>& commands() {
  static const std::map<std::string, std::pair<Runner, const char*>> table{
      {"simulate", {run_simulate, "evolve one state and monitor the invariants"}},
      {"density-check", {run_density_check, "compare the two formulas for log G"}},
      {"transport-mc", {run_transport_mc, "Monte Carlo change-of-measure battery"}},
      {"convergence", {run_convergence, "sup-over-samples convergence of R, Q, log G in N"}},
      {"liouville", {run_liouville, "divergence and Jacobian determinant of the truncated flow"}},
      {"lemmas", {run_lemmas, "counting bound, psi ratio and Strichartz identity sweeps"}},
      {"lp-density", {run_lp_density, "L^p norms of G and of G_M - G_N"}},
      {"moments", {run_moments, "Gaussian moment growth"}},
  };
  return table;
}

/// Range checks on the shared physical keys, whether or not the command reads them.
void validate_common(const Config& c) {
  c.family();
  c.time();
  c.step();
  c.cutoff();
  c.seed();
  c.quad();
  c.integer_in("N", 0, 128);
  if (!c.is_null("M") && c.integer_in("M", 0, 128) < c.integer("N") && c.command() != "convergence" &&
      c.command() != "moments") {
    throw ConfigInvalid("M", "must be >= N");
  }
}

int execute(const Config& c) {
  validate_common(c);
  const auto& [runner, about] = commands().at(c.command());
  (void)about;
  const Outcome o = runner(c);
  const std::string out = c.text("output");
  write_text(out + ".csv", to_csv(o.rows));
  const bool pass = std::all_of(o.checks.begin(), o.checks.end(), [](const Check& k) { return k.pass; });
  const json manifest{{"schema_version", kSchemaVersion},
                      {"command", c.command()},
                      {"config", c.values()},
                      {"pass", pass},
                      {"checks", checks_json(o.checks)},
                      {"results", o.results},
                      {"csv", out + ".csv"}};
  write_text(out + ".json", manifest.dump(2) + "\n");
  if (pass) {
    std::printf("PASS %s: %zu checks\n", c.command().c_str(), o.checks.size());
    return 0;
  }
  const auto bad = std::find_if(o.checks.begin(), o.checks.end(), [](const Check& k) { return !k.pass; });
  std::printf("FAIL %s: %s = %s (bound %s)\n", c.command().c_str(), bad->name.c_str(), format_double(bad->value).c_str(),
              format_double(bad->bound).c_str());
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Truncated quintic NLS: transport of Gaussian measures"};
  app.require_subcommand(1);
  std::string config_path;
  std::map<std::string, std::string> flags;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, entry] : commands()) {
    CLI::App* sub = app.add_subcommand(name, entry.second);
    sub->set_help_flag("--help", "print this help");  // -h would clash with the step key
    sub->add_option("--config", config_path, "flat JSON config file");
    for (const auto& key : kKeys) {
      sub->add_option_function<std::string>(
          std::string("--") + key.name, [&flags, k = std::string(key.name)](const std::string& v) { flags[k] = v; },
          key.help);
    }
    subs[name] = sub;
  }
  CLI11_PARSE(app, argc, argv);

  std::string cmd;
  for (const auto& [name, sub] : subs)
    if (sub->parsed()) cmd = name;
  try {
    return execute(resolve_config(cmd, config_path, flags));
  } catch (const ConfigInvalid& e) {
    std::fprintf(stderr, "nlsqi_cli %s: %s\n", cmd.c_str(), e.what());
    std::printf("FAIL %s: invalid config key '%s'\n", cmd.c_str(), e.key().c_str());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "nlsqi_cli %s: %s\n", cmd.c_str(), e.what());
    std::printf("FAIL %s: %s\n", cmd.c_str(), e.what());
    return 3;
  }
}
