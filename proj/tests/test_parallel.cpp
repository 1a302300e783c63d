#include <doctest.h>

#include <atomic>
#include <sstream>
#include <stdexcept>

#include "mimoee/equilibrium_analysis.hpp"
#include "mimoee/experiment.hpp"
#include "mimoee/parallel.hpp"

using namespace mimoee;

namespace {

ReducedScenario scenario(std::uint64_t seed) {
  ScenarioParams p;
  p.players = 5;
  p.antennas = 3;
  p.seed = seed;
  return reduce(generate_scenario(p));
}

}  // namespace

TEST_CASE("for_each_index visits every index once") {
  std::vector<std::atomic<int>> hits(1000);
  for_each_index(hits.size(), Exec::parallel, [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) CHECK(h.load() == 1);
}

TEST_CASE("for_each_index rethrows the lowest failing index") {
  auto body = [](std::size_t i) {
    if (i == 7 || i == 40) throw std::runtime_error("index " + std::to_string(i));
  };
  for (Exec e : {Exec::serial, Exec::parallel}) {
    try {
      for_each_index(100, e, body);
      FAIL("expected an exception");
    } catch (const std::runtime_error& err) {
      CHECK(std::string(err.what()) == "index 7");
    }
  }
}

TEST_CASE("sampled interference matrix: serial and parallel agree bitwise") {
  // A tall reduced channel forces the sampled variant.
  ScenarioParams p;
  p.players = 3;
  p.antennas = 2;
  p.seed = 4;
  NetworkScenario net = generate_scenario(p);
  Rng rng = make_rng(4, {});
  for (auto& row : net.channels) {
    for (auto& h : row) h = complex_gaussian(rng, 3, 2, 1.0);
  }
  for (auto& rn : net.noise_cov) rn = ComplexMatrix::Identity(3, 3);
  for (auto& n : net.rx_antennas) n = 3;
  const ReducedScenario s = reduce(net);
  const RealMatrix a = interference_matrix_sampled(s, 64, 9, Exec::serial).values;
  const RealMatrix b = interference_matrix_sampled(s, 64, 9, Exec::parallel).values;
  CHECK((a.array() == b.array()).all());
}

TEST_CASE("lemma verifiers: serial and parallel agree bitwise") {
  const ReducedScenario s = scenario(5);
  const LemmaReport a = verify_lipschitz(s, 64, 1, Exec::serial);
  const LemmaReport b = verify_lipschitz(s, 64, 1, Exec::parallel);
  CHECK(a.max_ratio == b.max_ratio);
  CHECK(a.min_margin == b.min_margin);
  const LemmaReport c = verify_power_set_smoothness(s, 64, 2, Exec::serial);
  const LemmaReport d = verify_power_set_smoothness(s, 64, 2, Exec::parallel);
  CHECK(c.max_ratio == d.max_ratio);
  const LemmaReport e = verify_monotonicity(s, 64, 3, Exec::serial, false);
  const LemmaReport f = verify_monotonicity(s, 64, 3, Exec::parallel, false);
  CHECK(e.max_ratio == f.max_ratio);
}

TEST_CASE("power smoothness estimate: serial and parallel agree bitwise") {
  const ReducedScenario s = scenario(6);
  PowerSmoothnessConfig cfg;
  cfg.n_pairs = 24;
  const RealVector w = RealVector::Ones(5);
  const PowerSmoothnessEstimate a = estimate_power_smoothness(s, cfg, w, Exec::serial);
  const PowerSmoothnessEstimate b = estimate_power_smoothness(s, cfg, w, Exec::parallel);
  CHECK(a.max_ratio_l2 == b.max_ratio_l2);
  CHECK(a.max_ratio_weighted_inf == b.max_ratio_weighted_inf);
  CHECK(a.samples == b.samples);
}

TEST_CASE("batch drivers: serial and parallel produce identical CSV") {
  ExperimentConfig cfg;
  cfg.scenario.players = 4;
  cfg.scenario.antennas = 2;
  cfg.snr_db = {0.0, 10.0};
  cfg.sir_db = {-5.0, 5.0};
  cfg.trials = 10;
  std::ostringstream a;
  std::ostringstream b;
  write_sweep_rows_csv(a, run_criteria_sweep(cfg, Exec::serial));
  write_sweep_rows_csv(b, run_criteria_sweep(cfg, Exec::parallel));
  CHECK(a.str() == b.str());

  cfg.runs = 3;
  std::ostringstream c;
  std::ostringstream d;
  write_convergence_trace_csv(c, run_convergence_experiment(cfg, Exec::serial), 1);
  write_convergence_trace_csv(d, run_convergence_experiment(cfg, Exec::parallel), 1);
  CHECK(c.str() == d.str());
}
