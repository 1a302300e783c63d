#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>

#include "mimoee/best_response.hpp"
#include "mimoee/errors.hpp"
#include "mimoee/random.hpp"

using namespace mimoee;

namespace {

// EE on eigenchannels when total power p is waterfilled over them.
double ee_of_power(const RealVector& gains, double circuit, double p) {
  const RealVector offsets = -gains.cwiseInverse();
  const double level = solve_water_level(offsets, p);
  const RealVector x = powers_at_level(gains, level);
  double r = 0.0;
  for (Eigen::Index k = 0; k < gains.size(); ++k) r += std::log1p(gains[k] * x[k]);
  return r / (circuit + p);
}

// Grid search over [0, hi] followed by golden-section refinement of the best cell.
double argmax_by_grid(const std::function<double(double)>& f, double hi) {
  const int n = 4000;
  int best = 0;
  double best_val = -1.0;
  for (int i = 0; i <= n; ++i) {
    const double v = f(hi * i / n);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  double a = hi * std::max(0, best - 1) / n;
  double b = hi * std::min(n, best + 1) / n;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 200 && b - a > 1e-13; ++it) {
    const double c = b - g * (b - a);
    const double d = a + g * (b - a);
    if (f(c) > f(d)) {
      b = d;
    } else {
      a = c;
    }
  }
  return 0.5 * (a + b);
}

ReducedScenario random_scenario(std::size_t players, std::size_t antennas, std::uint64_t seed) {
  ScenarioParams p;
  p.players = players;
  p.antennas = antennas;
  p.seed = seed;
  return reduce(generate_scenario(p));
}

}  // namespace

TEST_CASE("scalar channel with unit gain and unit circuit power gives e - 1") {
  RealVector g(1);
  g << 1.0;
  const DinkelbachResult r = dinkelbach_on_gains(g, 4.0, 1.0, DinkelbachConfig{});
  CHECK(r.power == doctest::Approx(std::numbers::e - 1.0).epsilon(1e-9));
  const double oracle = argmax_by_grid([&](double p) { return ee_of_power(g, 1.0, p); }, 10.0);
  CHECK(std::abs(r.power - oracle) < 1e-6);
}

TEST_CASE("Dinkelbach matches the grid oracle on random scalar cases") {
  Rng rng = make_rng(21, {});
  for (int trial = 0; trial < 20; ++trial) {
    RealVector g(1);
    g << std::exp(6.0 * uniform01(rng) - 3.0);
    const double psi = 0.1 + 3.0 * uniform01(rng);
    const DinkelbachResult r = dinkelbach_on_gains(g, 1.0, psi, DinkelbachConfig{});
    const double oracle =
        argmax_by_grid([&](double p) { return ee_of_power(g, psi, p); }, 20.0 * (psi + 1.0 / g[0]));
    CHECK(std::abs(r.power - oracle) < 1e-5);
  }
}

TEST_CASE("Dinkelbach matches the oracle on several eigenchannels") {
  Rng rng = make_rng(22, {});
  for (int trial = 0; trial < 20; ++trial) {
    RealVector g(4);
    for (Eigen::Index k = 0; k < 4; ++k) g[k] = std::exp(4.0 * uniform01(rng) - 2.0);
    const double psi = 0.5 + uniform01(rng);
    const DinkelbachResult r = dinkelbach_on_gains(g, 4.0, psi, DinkelbachConfig{});
    const double oracle = argmax_by_grid([&](double p) { return ee_of_power(g, psi, p); }, 50.0);
    CHECK(std::abs(r.power - oracle) < 1e-5);
    for (std::size_t k = 1; k < r.ratios.size(); ++k) CHECK(r.ratios[k] >= r.ratios[k - 1]);
    CHECK(r.last_delta <= 1e-9);
  }
}

TEST_CASE("both initializations reach the same power") {
  RealVector g(3);
  g << 2.0, 0.7, 0.1;
  DinkelbachConfig a;
  DinkelbachConfig b;
  b.init = DinkelbachInit::uniform_unit;
  CHECK(dinkelbach_on_gains(g, 4.0, 1.0, a).power ==
        doctest::Approx(dinkelbach_on_gains(g, 4.0, 1.0, b).power).epsilon(1e-8));
}

TEST_CASE("Dinkelbach reports non-convergence and bad configs") {
  RealVector g(2);
  g << 3.0, 0.2;
  DinkelbachConfig cfg;
  cfg.max_iters = 1;
  cfg.epsilon = 1e-300;
  CHECK_THROWS_AS(dinkelbach_on_gains(g, 4.0, 1.0, cfg), NonConvergence);
  cfg.epsilon = 0.0;
  CHECK_THROWS_AS(dinkelbach_on_gains(g, 4.0, 1.0, cfg), InvalidInput);
  RealVector zero(1);
  zero << 0.0;
  CHECK_THROWS_AS(dinkelbach_on_gains(zero, 4.0, 1.0, DinkelbachConfig{}), SingularMatrix);
}

TEST_CASE("waterfilling by hand") {
  RealVector g(2);
  g << 2.0, 1.0;
  const ComplexMatrix u = ComplexMatrix::Identity(2, 2);
  // level mu: (mu - 0.5) + (mu - 1) = 1.5 -> mu = 1.5, powers (1, 0.5).
  const WaterfillResult w = waterfill(u, g, 1.5);
  CHECK(w.water_level == doctest::Approx(1.5));
  CHECK(w.powers[0] == doctest::Approx(1.0));
  CHECK(w.powers[1] == doctest::Approx(0.5));
  // Only the strong channel is active for small power.
  const WaterfillResult small = waterfill(u, g, 0.25);
  CHECK(small.powers[1] == 0.0);
  CHECK(small.powers[0] == doctest::Approx(0.25));
  CHECK(waterfill(u, g, 0.0).cov.norm() == 0.0);
}

TEST_CASE("best response clips at the budget") {
  // High SNR on a single player makes the unconstrained optimum exceed a small budget.
  ScenarioParams p;
  p.players = 1;
  p.antennas = 2;
  p.snr_db = 30.0;
  p.max_power = 0.05;
  p.seed = 3;
  const ReducedScenario s = reduce(generate_scenario(p));
  const BestResponseResult br = best_response(s, 0, uniform_profile(s), DinkelbachConfig{});
  CHECK(br.p_unconstrained > 0.05);
  CHECK(br.p_hat == 0.05);
  CHECK(br.cov.trace().real() == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("best response beats random feasible covariances") {
  const ReducedScenario s = random_scenario(3, 3, 31);
  Rng rng = make_rng(32, {});
  const StrategyProfile base = uniform_profile(s);
  for (std::size_t q = 0; q < 3; ++q) {
    const BestResponseResult br = best_response(s, q, base, DinkelbachConfig{});
    StrategyProfile with_br = base;
    with_br[q] = br.cov;
    const double best = energy_efficiency(s, q, with_br);
    for (int k = 0; k < 200; ++k) {
      StrategyProfile other = base;
      other[q] = random_psd_with_trace(rng, 3, s.max_power[q] * uniform01(rng));
      CHECK(energy_efficiency(s, q, other) <= best + 1e-12);
    }
  }
}

TEST_CASE("projection form equals waterfilling") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ReducedScenario s = random_scenario(2 + seed % 3, 1 + seed % 4, 40 + seed);
    Rng rng = make_rng(seed, {});
    StrategyProfile p;
    for (std::size_t q = 0; q < s.num_players(); ++q) {
      p.blocks.push_back(random_psd_with_trace(rng, static_cast<Eigen::Index>(s.ranks[q]),
                                               s.max_power[q] * uniform01(rng)));
    }
    for (std::size_t q = 0; q < s.num_players(); ++q) {
      const BestResponseResult br = best_response(s, q, p, DinkelbachConfig{});
      const ComplexMatrix proj = projection_best_response(s, q, p, br.p_hat);
      CHECK((proj - br.cov).cwiseAbs().maxCoeff() <= 1e-8);
    }
  }
}

TEST_CASE("best_response_from_mui only sees the covariance") {
  const ReducedScenario s = random_scenario(3, 2, 50);
  const StrategyProfile p = uniform_profile(s);
  const BestResponseResult a = best_response(s, 1, p, DinkelbachConfig{});
  const BestResponseResult b =
      best_response_from_mui(s, 1, mui_covariance(s, 1, p), DinkelbachConfig{});
  CHECK((a.cov - b.cov).norm() == 0.0);
}
