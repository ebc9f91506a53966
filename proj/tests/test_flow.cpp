#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "nlsqi/flow.hpp"
#include "nlsqi/measures.hpp"

using namespace nlsqi;
using testing_util::max_abs_diff;
using testing_util::random_state;

namespace {

/// mu_{2,M} sample rescaled to unit H^1 norm.
FourierState unit_h1_sample(int m, std::uint64_t index, std::uint64_t seed = 11) {
  auto u = sample_state(seed, index, MeasureParams{WeightFamily::japanese(2.0), m, {}, {}});
  u *= cplx(1.0 / std::sqrt(sobolev_norm_sq(u, 1.0)));
  return u;
}

double h_sigma_dist(const FourierState& a, const FourierState& b, double sigma) {
  return std::sqrt(sobolev_norm_sq(a - b, sigma));
}

}  // namespace

TEST(Evolve, PlaneWaveIsExact) {
  const int n = 4;
  for (int k : {-3, 0, 1, 4}) {
    const cplx c{0.3, -0.4};
    const double t = 1.3;
    const auto out = evolve(FourierState::mode(6, k, c), t, FlowParams::make(n));
    const double a = std::norm(c) * std::norm(c);
    EXPECT_LT(max_abs_diff(out, FourierState::mode(6, k, c * std::polar(1.0, -(double(k) * k + a) * t))), 1e-8);
  }
}

TEST(Evolve, HighModesEvolveLinearly) {
  FourierState u(8);
  u[5] = {1.0, 2.0};
  u[-7] = {0.5, -0.1};
  const double t = 0.77;
  const auto out = evolve(u, t, FlowParams::make(4));
  EXPECT_LT(max_abs_diff(out, linear_flow(u, t)), 1e-15);
  EXPECT_NEAR(std::arg(out[5] / u[5]), std::remainder(-25 * t, 2 * M_PI), 1e-12);
}

TEST(Evolve, ZeroAndIdentity) {
  EXPECT_EQ(evolve(FourierState(5), 0.9, FlowParams::make(3)), FourierState(5));
  const auto u = random_state(5, 3);
  EXPECT_EQ(evolve(u, 0.0, FlowParams::make(3)), u);
}

TEST(Evolve, Errors) {
  const auto u = random_state(4, 1);
  EXPECT_THROW(evolve(u, 1.0, FlowParams{4, 0.2, GridSpec::for_quintic(4)}), Error);
  EXPECT_THROW(evolve(u, 1.0, FlowParams{4, 1e-3, GridSpec{25}}), GridTooSmall);
  EXPECT_THROW(evolve(random_state(2, 1, 1e3), 1.0, FlowParams::make(2, 0.1)), NonFiniteState);
}

TEST(Evolve, FractionalLastStep) {
  // t = 2.5 h: two full steps and one half step, against ten quarter steps
  const auto u = random_state(3, 8, 0.5);
  const auto a = evolve(u, 2.5e-2, FlowParams::make(3, 1e-2));
  const auto b = evolve(u, 2.5e-2, FlowParams::make(3, 2.5e-3));
  EXPECT_LT(max_abs_diff(a, b), 1e-8);
}

TEST(Evolve, GaugeConsistencyOfTwoCodePaths) {
  for (std::uint64_t i = 0; i < 3; ++i) {
    const auto u = unit_h1_sample(12, i);
    const auto p = FlowParams::make(8);
    for (double t : {0.4, -0.7, 1.0}) {
      EXPECT_LT(max_abs_diff(evolve(u, t, p), evolve_global_gauge(u, t, p)), 1e-10);
    }
  }
}

TEST(Evolve, Reversibility) {
  for (int n : {4, 16}) {
    const auto u = unit_h1_sample(n + 4, static_cast<std::uint64_t>(n));
    const auto p = FlowParams::make(n);
    const auto back = evolve(evolve(u, 1.0, p), -1.0, p);
    EXPECT_LE(h_sigma_dist(back, u, 2.0), 1e-7);
  }
}

TEST(Evolve, FourthOrderConvergence) {
  const auto u = unit_h1_sample(16, 1);
  const auto ref = evolve(u, 1.0, FlowParams::make(16, 1e-4));
  const double e1 = h_sigma_dist(evolve(u, 1.0, FlowParams::make(16, 2e-3)), ref, 1.0);
  const double e2 = h_sigma_dist(evolve(u, 1.0, FlowParams::make(16, 1e-3)), ref, 1.0);
  EXPECT_NEAR(e1 / e2, 16.0, 2.0);
}

TEST(Trajectory, SnapshotsAndConsistency) {
  const auto u = random_state(4, 2, 0.5);
  const auto p = FlowParams::make(4);
  const auto tr = evolve_trajectory(u, 0.6, p, 7);
  ASSERT_EQ(tr.states.size(), 7u);
  ASSERT_EQ(tr.times.size(), 7u);
  EXPECT_EQ(tr.times.front(), 0.0);
  EXPECT_DOUBLE_EQ(tr.times.back(), 0.6);
  for (std::size_t i = 1; i < tr.times.size(); ++i) EXPECT_GT(tr.times[i], tr.times[i - 1]);
  EXPECT_LT(max_abs_diff(tr.states.back(), evolve(u, 0.6, p)), 1e-10);

  const auto flat = evolve_trajectory(u, 0.0, p, 3);
  for (const auto& s : flat.states) EXPECT_EQ(s, u);
  EXPECT_THROW(evolve_trajectory(u, 1.0, p, 1), Error);

  const auto back = evolve_trajectory(u, -0.3, p, 4);
  for (std::size_t i = 1; i < back.times.size(); ++i) EXPECT_LT(back.times[i], back.times[i - 1]);
}

TEST(Trajectory, PlaneWavePhases) {
  const cplx c{0.5, 0.0};
  const auto tr = evolve_trajectory(FourierState::mode(3, 1, c), 1.0, FlowParams::make(3), 5);
  for (std::size_t i = 0; i < tr.states.size(); ++i) {
    const auto expect = c * std::polar(1.0, -(1.0 + 0.0625) * tr.times[i]);
    EXPECT_LT(std::abs(tr.states[i][1] - expect), 1e-8);
  }
}

TEST(Picard, HighFrequencyDataIsFixedImmediately) {
  const auto u = FourierState::mode(6, 5, {0.2, 0.1});
  const auto r = picard_solve(u, 0.01, FlowParams::make(3), 1);
  EXPECT_LT(max_abs_diff(r.state, linear_flow(u, 0.01)), 1e-15);
}

TEST(Picard, PlaneWaveConvergesGeometrically) {
  // amplitude small enough that t = 0.01 lies inside the contraction time
  const cplx c{0.25, 0.0};
  const auto u = FourierState::mode(3, 1, c);
  const auto p = FlowParams::make(3);
  ASSERT_GE(picard_local_time(u), 0.01);
  const auto r = picard_solve(u, 0.01, p, 6);
  EXPECT_LT(std::abs(r.state[1] - c * std::polar(1.0, -(1.0 + std::pow(0.25, 4)) * 0.01)), 1e-8);
  for (double q : r.ratios) EXPECT_LE(q, 2.0 / 3.0);
}

TEST(Picard, MatchesRk4AtSmallTime) {
  const auto u = random_state(4, 6, 0.3);
  const auto p = FlowParams::make(4);
  const double t = 0.5 * picard_local_time(u);
  const auto r = picard_solve(u, t, p, 12);
  for (double q : r.ratios) EXPECT_LE(q, 2.0 / 3.0);
  EXPECT_LT(max_abs_diff(r.state, evolve(u, t, p)), 1e-9);
  EXPECT_THROW(picard_solve(u, 2.0 * picard_local_time(u), p, 3), ContractionRadiusExceeded);
}

TEST(Liouville, DivergenceVanishes) {
  EXPECT_EQ(divergence_at(FourierState(2), FlowParams::make(2)), 0.0);
  for (int n = 1; n <= 3; ++n) {
    for (unsigned seed = 0; seed < 5; ++seed) {
      EXPECT_LE(std::abs(divergence_at(random_state(n, 10 * n + seed), FlowParams::make(n))), 1e-6);
    }
  }
  EXPECT_THROW(divergence_at(random_state(3, 0), FlowParams::make(2)), Error);
}

TEST(Liouville, JacobianDeterminant) {
  const auto p = FlowParams::make(2);
  const auto u = unit_h1_sample(2, 0);
  EXPECT_EQ(jacobian_det(u, 0.0, p), 1.0);
  EXPECT_LE(std::abs(jacobian_det(u, 0.5, p) - 1.0), 1e-6);
  // multiplicativity along the path
  const double d1 = jacobian_det(u, 0.2, p);
  const double d2 = jacobian_det(evolve(u, 0.2, p), 0.3, p);
  EXPECT_NEAR(jacobian_det(u, 0.5, p), d1 * d2, 1e-8);
}

TEST(Liouville, VariationalDetMatchesFiniteDifferences) {
  // det of the Jacobian of the discrete map, assembled column by column from
  // central differences of evolve, against the variational route.
  const int n = 2;
  const auto p = FlowParams::make(n, 1e-2);
  const auto u = random_state(n, 4, 0.6);
  const double h = 1e-6;
  const int dim = 2 * (2 * n + 1);
  Eigen::MatrixXd jac(dim, dim);
  for (int c = 0; c < dim; ++c) {
    FourierState a = u, b = u;
    const int k = c / 2 - n;
    const cplx dir = c % 2 == 0 ? cplx{1.0, 0.0} : cplx{0.0, 1.0};
    a[k] += h * dir;
    b[k] -= h * dir;
    const auto d = (1.0 / (2 * h)) * (evolve(a, 0.3, p) - evolve(b, 0.3, p));
    for (int r = 0; r < 2 * n + 1; ++r) {
      jac(2 * r, c) = d[r - n].real();
      jac(2 * r + 1, c) = d[r - n].imag();
    }
  }
  EXPECT_NEAR(jac.determinant(), jacobian_det(u, 0.3, p), 1e-6);
}

TEST(GrowthMonitor, PlaneWaveMassIsConstant) {
  const auto p = FlowParams::make(3);
  const auto tr = evolve_trajectory(FourierState::mode(3, 2, {0.7, 0.0}), 1.0, p, 11);
  const auto rep = growth_monitor(tr, 1.0, p);
  EXPECT_LT(rep.mass_drift, 1e-13);
  EXPECT_LE(rep.max_bound_ratio, 1.0);
}

TEST(GrowthMonitor, ConservationAtDefaultStep) {
  for (std::uint64_t i = 0; i < 3; ++i) {
    const auto p = FlowParams::make(16);
    const auto rep = growth_monitor(evolve_trajectory(unit_h1_sample(16, i), 1.0, p, 21), 1.5, p, 1e-8);
    EXPECT_LE(rep.mass_drift, 1e-8);
    EXPECT_LE(rep.conserved_drift, 1e-8);
    EXPECT_LE(rep.max_bound_ratio, 1.0);
  }
}

TEST(GrowthMonitor, DriftShrinksAtFourthOrderRate) {
  const auto u = unit_h1_sample(16, 0);
  const auto p1 = FlowParams::make(16, 1e-3);
  const auto p2 = FlowParams::make(16, 5e-4);
  const auto r1 = growth_monitor(evolve_trajectory(u, 1.0, p1, 11), 1.0, p1, 1e-6);
  const auto r2 = growth_monitor(evolve_trajectory(u, 1.0, p2, 11), 1.0, p2, 1e-6);
  EXPECT_GE(r1.conserved_drift / r2.conserved_drift, 16.0 * 0.75);
}

TEST(GrowthMonitor, FlagsViolations) {
  const auto u = random_state(4, 2, 0.5);
  const auto p = FlowParams::make(4);
  auto tr = evolve_trajectory(u, 0.5, p, 3);
  tr.states.back() *= cplx(1.5);
  EXPECT_THROW(growth_monitor(tr, 1.0, p), BoundViolated);
}

TEST(Factorization, Structural) {
  const auto p = FlowParams::make(4);
  for (unsigned seed = 0; seed < 3; ++seed) EXPECT_LE(check_factorization(random_state(9, seed, 0.7), 0.8, p), 1e-12);
  EXPECT_EQ(check_factorization(random_state(9, 1), 0.0, p), 0.0);
  FourierState high(9);
  high[6] = 1.0;
  high[-8] = {0.0, 2.0};
  EXPECT_EQ(check_factorization(high, 0.4, p), 0.0);
}

// ||Phi_64(t)u0 - Phi_N(t)u0||_{H^1} for a unit-H^1 mu_{2,64} sample, t = 0.5.
TEST(Approximation, ErrorDecreasesWithTruncation) {
  auto u = sample_state(2024, 0, MeasureParams{WeightFamily::japanese(2.0), 64, {}, {}});
  u *= cplx(1.0 / std::sqrt(sobolev_norm_sq(u, 1.0)));
  const auto ref = evolve(u, 0.5, FlowParams::make(64));
  const std::vector<std::pair<int, double>> pinned{
      {4, 0.09464149243397009}, {8, 0.062447150127562835}, {16, 0.041027941731836957}, {32, 0.026105116938600154}};
  double prev = INFINITY;
  for (const auto& [n, value] : pinned) {
    const double e = h_sigma_dist(ref, evolve(u, 0.5, FlowParams::make(n)), 1.0);
    EXPECT_NEAR(e, value, 1e-8 * value) << n;
    EXPECT_LT(e, prev);
    prev = e;
  }
}

TEST(Export, TrajectoryJson) {
  const auto p = FlowParams::make(2);
  const auto tr = evolve_trajectory(random_state(3, 1, 0.2), 0.1, p, 3);
  const auto j = trajectory_to_json(tr, p, 99);
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_EQ(j["snapshots"].size(), 3u);
  EXPECT_EQ(j["seed"], 99);
  EXPECT_EQ(state_from_json(j["snapshots"][2]), tr.states[2]);
}
