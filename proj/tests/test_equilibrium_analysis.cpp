#include <doctest.h>

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "mimoee/equilibrium_analysis.hpp"
#include "mimoee/errors.hpp"
#include "mimoee/random.hpp"

using namespace mimoee;

namespace {

ReducedScenario scenario(std::size_t players, std::size_t antennas, double sir_db,
                         std::uint64_t seed) {
  ScenarioParams p;
  p.players = players;
  p.antennas = antennas;
  p.sir_db = sir_db;
  p.seed = seed;
  return reduce(generate_scenario(p));
}

double general_spectral_radius(const RealMatrix& a) {
  Eigen::EigenSolver<RealMatrix> es(a, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

NetworkScenario wide_scenario(std::uint64_t seed) {
  // Two receive antennas, four transmit antennas: direct channels have full
  // row rank and a two-dimensional null space.
  Rng rng = make_rng(seed, {});
  NetworkScenario s;
  s.tx_antennas = {4, 4, 4};
  s.rx_antennas = {2, 2, 2};
  s.channels.assign(3, std::vector<ComplexMatrix>(3));
  for (auto& row : s.channels) {
    for (auto& h : row) h = complex_gaussian(rng, 2, 4, 1.0);
  }
  s.noise_cov.assign(3, ComplexMatrix::Identity(2, 2));
  s.max_power = {1.0, 1.0, 1.0};
  s.circuit_power = {1.0, 1.0, 1.0};
  return s;
}

}  // namespace

TEST_CASE("criteria constants of a hand-made interference matrix") {
  RealMatrix s(2, 2);
  s << 0.0, 0.5, 0.5, 0.0;
  const CriteriaReport r = criteria(s);
  CHECK(r.sr_S == doctest::Approx(0.5));
  CHECK(r.sr_Ssym == doctest::Approx(0.5));
  CHECK(r.sigma_max_IplusS == doctest::Approx(1.5));
  CHECK(r.qvi_rhs_constant == doctest::Approx(0.5 / 1.5));
  CHECK(r.contraction_rhs_constant == doctest::Approx(0.5));
  CHECK(r.interference_ok_qvi);
  CHECK(r.interference_ok_contraction);
  CHECK(r.perron_w[0] == doctest::Approx(r.perron_w[1]));

  RealMatrix t(2, 2);
  t << 0.0, 0.1, 2.0, 0.0;  // sr = sqrt(0.2) but (S + S^T)/2 has radius 1.05
  const CriteriaReport u = criteria(t);
  CHECK(u.sr_S == doctest::Approx(std::sqrt(0.2)));
  CHECK(u.sr_Ssym == doctest::Approx(1.05));
  CHECK(u.interference_ok_contraction);
  CHECK_FALSE(u.interference_ok_qvi);
  CHECK(u.qvi_rhs_constant < 0.0);
}

TEST_CASE("criteria reject malformed matrices") {
  CHECK_THROWS_AS(criteria(RealMatrix::Zero(2, 3)), InvalidInput);
  RealMatrix neg = RealMatrix::Zero(2, 2);
  neg(0, 1) = -1.0;
  CHECK_THROWS_AS(criteria(neg), InvalidInput);
}

TEST_CASE("identity channels give unit interference entries") {
  const ReducedScenario s = reduce(identity_channel_scenario(4, 3));
  const InterferenceMatrix im = interference_matrix_square(s);
  for (Eigen::Index q = 0; q < 4; ++q) {
    for (Eigen::Index r = 0; r < 4; ++r) CHECK(im.values(q, r) == doctest::Approx(q == r ? 0.0 : 1.0));
  }
  CHECK(criteria(im.values).sr_S == doctest::Approx(3.0));
}

TEST_CASE("zero interference gives a zero matrix and passing flags") {
  const ReducedScenario s = scenario(3, 2, std::numeric_limits<double>::infinity(), 1);
  const InterferenceMatrix im = interference_matrix(s);
  CHECK(im.values.norm() == 0.0);
  const CriteriaReport r = criteria(im.values);
  CHECK(r.sr_S == 0.0);
  CHECK(r.interference_ok_qvi);
  CHECK(r.interference_ok_contraction);
}

TEST_CASE("sampled matrix equals the exact one for square channels") {
  const ReducedScenario s = scenario(3, 3, 0.0, 2);
  const RealMatrix exact = interference_matrix_square(s).values;
  for (std::uint64_t seed : {0u, 5u, 99u}) {
    const InterferenceMatrix sampled = interference_matrix_sampled(s, 8, seed, Exec::serial);
    CHECK(sampled.lower_bound);
    CHECK((sampled.values - exact).cwiseAbs().maxCoeff() <= 1e-10 * exact.maxCoeff());
  }
}

TEST_CASE("row-rank variant agrees with the square variant") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ScenarioParams p;
    p.players = 4;
    p.antennas = 3;
    p.seed = seed;
    const NetworkScenario s = generate_scenario(p);
    const RealMatrix a = interference_matrix_rowrank(s).values;
    const RealMatrix b = interference_matrix_square(reduce(s)).values;
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, b.maxCoeff()));
  }
}

TEST_CASE("V factor never increases row-rank entries") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const NetworkScenario s = wide_scenario(seed);
    const RealMatrix factored = interference_matrix_rowrank(s).values;
    const RealMatrix plain = interference_matrix_rowrank_unfactored(s);
    CHECK((factored.array() <= plain.array() + 1e-12).all());
  }
}

TEST_CASE("sampled variant on wide channels is a lower bound") {
  // After reduction the direct channels are 2 x 2 and square, so the exact
  // variant applies; drop a receive antenna to get a tall reduced channel.
  Rng rng = make_rng(3, {});
  NetworkScenario s;
  s.tx_antennas = {2, 2};
  s.rx_antennas = {3, 3};
  s.channels.assign(2, std::vector<ComplexMatrix>(2));
  for (auto& row : s.channels) {
    for (auto& h : row) h = complex_gaussian(rng, 3, 2, 1.0);
  }
  s.noise_cov.assign(2, ComplexMatrix::Identity(3, 3));
  s.max_power = {1.0, 1.0};
  s.circuit_power = {1.0, 1.0};
  const ReducedScenario rs = reduce(s);
  CHECK_FALSE(rs.square_direct_channels());
  CHECK_THROWS_AS(interference_matrix_square(rs), SingularMatrix);
  const InterferenceMatrix a = interference_matrix(rs, 50, 1, Exec::serial);
  const InterferenceMatrix b = interference_matrix(rs, 200, 1, Exec::serial);
  CHECK(a.variant == InterferenceVariant::sampled_columnrank);
  // Sample k uses the same stream in both runs, so more samples can only raise entries.
  CHECK((b.values.array() >= a.values.array()).all());
  CHECK(a.values(0, 1) > 0.0);
}

TEST_CASE("sr(S) <= sr(S^s) on random nonnegative matrices") {
  Rng rng = make_rng(4, {});
  for (int trial = 0; trial < 300; ++trial) {
    const Eigen::Index n = 2 + trial % 8;
    RealMatrix a(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        a(i, j) = (i == j || uniform01(rng) < 0.2) ? 0.0 : std::exp(4.0 * uniform01(rng) - 2.0);
      }
    }
    const CriteriaReport r = criteria(a);
    CHECK(r.sr_S <= r.sr_Ssym + 1e-9);
    CHECK(r.sr_S == doctest::Approx(general_spectral_radius(a)).epsilon(1e-8));
    if (r.interference_ok_qvi) CHECK(r.interference_ok_contraction);
  }
}

TEST_CASE("raising the SIR never increases interference entries") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    double previous = std::numeric_limits<double>::infinity();
    RealMatrix prev_s;
    for (double sir : {-10.0, -5.0, 0.0, 5.0, 10.0}) {
      const RealMatrix s = interference_matrix_square(scenario(4, 3, sir, seed)).values;
      const double sr = criteria(s).sr_S;
      CHECK(sr <= previous * (1.0 + 1e-12));
      if (prev_s.size() > 0) CHECK((s.array() <= prev_s.array() * (1.0 + 1e-12)).all());
      previous = sr;
      prev_s = s;
    }
  }
}

TEST_CASE("qvi_map is affine and equals Q plus the inverse whitened gram") {
  const ReducedScenario s = scenario(3, 3, 0.0, 6);
  Rng rng = make_rng(6, {});
  const StrategyProfile a = random_profile(s, rng, false);
  const StrategyProfile b = random_profile(s, rng, false);
  const double alpha = 0.3;
  StrategyProfile mix = a;
  for (std::size_t q = 0; q < 3; ++q) mix[q] = alpha * a[q] + (1.0 - alpha) * b[q];
  const auto fa = qvi_map(s, a);
  const auto fb = qvi_map(s, b);
  const auto fm = qvi_map(s, mix);
  for (std::size_t q = 0; q < 3; ++q) {
    CHECK((fm[q] - (alpha * fa[q] + (1.0 - alpha) * fb[q])).norm() < 1e-12 * fm[q].norm());
    const ComplexMatrix gram = whitened_gram(s, q, a);
    CHECK((fa[q] - (a[q] + gram.inverse())).norm() < 1e-9 * fa[q].norm());
  }
}

TEST_CASE("whitened cross gain reduces to H_qq^-1 H_qr for square channels") {
  const ReducedScenario s = scenario(3, 2, 0.0, 7);
  Rng rng = make_rng(7, {});
  const StrategyProfile delta = random_boundary_profile(s, rng);
  const ComplexMatrix g = whitened_cross_gain(s, 0, 2, delta);
  const ComplexMatrix expect = s.channels[0][0].inverse() * s.channels[0][2];
  CHECK((g - expect).norm() < 1e-10 * expect.norm());
  for (std::size_t q = 0; q < 3; ++q) {
    CHECK(delta[q].trace().real() == doctest::Approx(s.max_power[q]).epsilon(1e-12));
  }
}

TEST_CASE("lemma verifiers pass on a random scenario") {
  const ReducedScenario s = scenario(4, 3, 0.0, 8);
  const LemmaReport lip = verify_lipschitz(s, 300, 1);
  CHECK(lip.status == LemmaStatus::pass);
  CHECK(lip.samples == 300);
  CHECK(lip.max_ratio <= lip.constant + 1e-9);
  CHECK(lip.max_ratio > 1.0);

  const LemmaReport mono = verify_monotonicity(s, 300, 2, Exec::parallel, false);
  CHECK(mono.status == LemmaStatus::pass);
  CHECK(mono.samples == 300);

  const LemmaReport pss = verify_power_set_smoothness(s, 300, 3);
  CHECK(pss.status == LemmaStatus::pass);
  CHECK(pss.max_ratio <= 1.0 + 1e-9);
}

TEST_CASE("monotonicity is skipped without its precondition unless forced") {
  const ReducedScenario low = scenario(4, 3, -5.0, 9);
  const LemmaReport skipped = verify_monotonicity(low, 50, 1);
  CHECK_FALSE(skipped.precondition_met);
  CHECK(skipped.status == LemmaStatus::skipped);
  CHECK(skipped.samples == 0);

  const ReducedScenario high = scenario(4, 3, 25.0, 9);
  const LemmaReport met = verify_monotonicity(high, 200, 1);
  CHECK(met.precondition_met);
  CHECK(met.status == LemmaStatus::pass);
  CHECK(met.constant > 0.0);
  CHECK(met.max_ratio >= met.constant - 1e-9);
}

TEST_CASE("power-set projection is tight for a scalar player with Y = 0") {
  ComplexMatrix y = ComplexMatrix::Zero(1, 1);
  const double d = (psd_trace_projection(y, 0.7) - psd_trace_projection(y, 0.2)).norm();
  CHECK(d == doctest::Approx(0.5).epsilon(1e-14));
  CHECK((psd_trace_projection(y, 0.4) - psd_trace_projection(y, 0.4)).norm() == 0.0);
}

TEST_CASE("sqrt(Q) construction") {
  for (std::size_t players : {2u, 4u, 8u}) {
    const LemmaReport r = verify_sqrt_q_construction(players, 3, 11);
    CHECK(r.status == LemmaStatus::pass);
    CHECK(std::abs(r.max_ratio - std::sqrt(static_cast<double>(players))) <= 1e-9);
  }
}

TEST_CASE("power smoothness estimate on decoupled and clipped scenarios") {
  PowerSmoothnessConfig cfg;
  cfg.n_pairs = 30;
  const ReducedScenario free = scenario(3, 2, std::numeric_limits<double>::infinity(), 12);
  const PowerSmoothnessEstimate e = estimate_power_smoothness(free, cfg, RealVector::Ones(3));
  CHECK(e.samples == 30);
  CHECK(e.max_ratio_l2 == 0.0);
  CHECK(e.max_ratio_weighted_inf == 0.0);

  ScenarioParams p;
  p.players = 3;
  p.antennas = 2;
  p.snr_db = 30.0;
  p.sir_db = 20.0;
  p.max_power = 0.01;
  p.seed = 12;
  const ReducedScenario clipped = reduce(generate_scenario(p));
  const PowerSmoothnessEstimate c = estimate_power_smoothness(clipped, cfg, RealVector::Ones(3));
  CHECK(c.max_ratio_l2 == 0.0);

  const ReducedScenario coupled = scenario(3, 2, 0.0, 12);
  const CriteriaReport r = criteria(coupled, interference_matrix(coupled), cfg);
  REQUIRE(r.power_smoothness.has_value());
  CHECK(r.power_smoothness->max_ratio_l2 > 0.0);
  CHECK(std::isfinite(r.power_smoothness->max_ratio_l2));
  CHECK(r.power_ok_qvi.has_value());
}

TEST_CASE("lemma report JSON carries the figures") {
  const LemmaReport r = verify_sqrt_q_construction(2, 2, 1);
  const auto j = to_json(r);
  CHECK(j["name"] == "sqrt_q_lower_bound");
  CHECK(j["status"] == "pass");
  CHECK(j["samples"] == 1);
  const auto c = to_json(criteria(RealMatrix::Zero(2, 2)));
  CHECK(c.contains("sr_S"));
  CHECK(c.contains("perron_w"));
}
