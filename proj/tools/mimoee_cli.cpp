// mimoee: command-line front end for scenario generation, best responses,
// uniqueness criteria, IWFA runs and lemma verification.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mimoee/errors.hpp"
#include "mimoee/experiment.hpp"
#include "mimoee/scenario_io.hpp"

using namespace mimoee;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitAssertion = 2;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format;
  bool quiet = false;
  std::string scenario;  // scenario file, where the command accepts one
  std::string profile;
};

std::string format_of(const CommonFlags& f, const char* fallback) {
  return f.format.empty() ? fallback : f.format;
}

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "master seed (overrides the config)");
  cmd->add_option("--out", f.out, "output file ('-' or empty: stdout)");
  cmd->add_option("--format", f.format, "output format")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_flag("--quiet", f.quiet, "suppress the summary on stderr");
}

ExperimentConfig load_config(const CommonFlags& f) {
  ExperimentConfig cfg = f.config.empty() ? ExperimentConfig{} : read_experiment_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (!f.scenario.empty()) cfg.scenario_file = f.scenario;
  if (!f.out.empty()) cfg.output = f.out;
  return cfg;
}

std::string with_suffix(const std::string& path, const std::string& suffix) {
  std::filesystem::path p(path);
  const std::string ext = p.extension().string();
  p.replace_extension();
  return p.string() + suffix + ext;
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  const std::filesystem::path target(resolve_output_path(path));
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  std::ofstream out(target, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + target.string());
  out << content;
  if (!out) throw InvalidInput("write failed: " + target.string());
}

void note(const CommonFlags& f, const std::string& msg) {
  if (!f.quiet) std::cerr << msg << '\n';
}

int cmd_scenario_gen(const CommonFlags& f) {
  const ExperimentConfig cfg = load_config(f);
  ScenarioParams p = cfg.scenario;
  p.seed = cfg.seed;
  const NetworkScenario s = generate_scenario(p);
  emit(cfg.output, scenario_to_json(s).dump(1) + "\n");
  note(f, "generated " + std::to_string(s.num_players()) + "-player scenario, seed " +
              std::to_string(cfg.seed));
  return kExitOk;
}

int cmd_scenario_show(const CommonFlags& f) {
  if (f.scenario.empty()) throw InvalidInput("scenario show: --scenario is required");
  const NetworkScenario s = read_scenario_file(f.scenario);
  const ReducedScenario rs = reduce(s);
  json summary{{"players", s.num_players()},
               {"tx_antennas", s.tx_antennas},
               {"rx_antennas", s.rx_antennas},
               {"ranks", rs.ranks},
               {"max_power", s.max_power},
               {"circuit_power", s.circuit_power},
               {"seed", s.seed},
               {"snr_convention", to_string(s.meta.snr_convention)},
               {"channel", to_string(s.meta.channel)}};
  if (s.meta.snr_db) summary["snr_db"] = *s.meta.snr_db;
  if (s.meta.sir_db) {
    summary["sir_db"] = std::isinf(*s.meta.sir_db) ? json(nullptr) : json(*s.meta.sir_db);
  }
  const InterferenceMatrix im = interference_matrix(rs);
  summary["interference_variant"] = to_string(im.variant);
  summary["criteria"] = to_json(criteria(im.values));
  emit(f.out, summary.dump(1) + "\n");
  return kExitOk;
}

int cmd_br_solve(const CommonFlags& f) {
  const ExperimentConfig cfg = load_config(f);
  const ReducedScenario rs = reduce(experiment_scenario(cfg, cfg.seed));
  std::optional<StrategyProfile> profile;
  if (!f.profile.empty()) profile = profile_from_json(read_json_file(f.profile));
  const json res = solve_best_responses(rs, profile, cfg.dinkelbach);
  if (format_of(f, "json") == "csv") {
    std::ostringstream os;
    os << "player,p_unconstrained,p_hat,water_level,dinkelbach_iterations,ee_before,ee_after\n";
    for (const auto& p : res["players"]) {
      os << p["player"].get<std::size_t>() << ',' << p["p_unconstrained"].dump() << ','
         << p["p_hat"].dump() << ',' << p["water_level"].dump() << ','
         << p["dinkelbach_iterations"].dump() << ',' << p["ee_before"].dump() << ','
         << p["ee_after"].dump() << '\n';
    }
    emit(cfg.output, os.str());
  } else {
    emit(cfg.output, res.dump(1) + "\n");
  }
  return kExitOk;
}

int cmd_criteria_eval(const CommonFlags& f) {
  const ExperimentConfig cfg = load_config(f);
  const ReducedScenario rs = reduce(experiment_scenario(cfg, cfg.seed));
  const InterferenceMatrix im = interference_matrix(rs, cfg.interference_samples, cfg.seed);
  std::optional<PowerSmoothnessConfig> smooth;
  if (cfg.power_smoothness_pairs > 0) {
    PowerSmoothnessConfig sc;
    sc.n_pairs = cfg.power_smoothness_pairs;
    sc.seed = cfg.seed;
    sc.dinkelbach = cfg.dinkelbach;
    smooth = sc;
  }
  json report = to_json(criteria(rs, im, smooth));
  report["interference_variant"] = to_string(im.variant);
  report["interference_lower_bound"] = im.lower_bound;
  report["S"] = real_matrix_to_json(im.values);
  emit(cfg.output, report.dump(1) + "\n");
  return kExitOk;
}

int cmd_criteria_sweep(const CommonFlags& f) {
  const ExperimentConfig cfg = load_config(f);
  const SweepResult res = run_criteria_sweep(cfg);
  std::ostringstream rows;
  std::ostringstream cells;
  write_sweep_rows_csv(rows, res);
  write_sweep_cells_csv(cells, res);
  if (format_of(f, "csv") == "json") {
    json j = json::array();
    for (const SweepCell& c : res.cells) {
      j.push_back({{"snr_db", c.snr_db},
                   {"sir_db", std::isinf(c.sir_db) ? json(nullptr) : json(c.sir_db)},
                   {"trials", c.trials},
                   {"frac_contraction", c.frac_contraction},
                   {"stderr_contraction", c.stderr_contraction},
                   {"frac_qvi", c.frac_qvi},
                   {"stderr_qvi", c.stderr_qvi}});
    }
    emit(cfg.output, json{{"cells", j}}.dump(1) + "\n");
  } else if (cfg.output.empty() || cfg.output == "-") {
    emit(cfg.output, rows.str());
  } else {
    emit(cfg.output, rows.str());
    emit(with_suffix(cfg.output, ".cells"), cells.str());
  }
  note(f, "criteria sweep: " + std::to_string(res.rows.size()) + " trials in " +
              std::to_string(res.cells.size()) + " cells");
  return kExitOk;
}

int cmd_iwfa_run(const CommonFlags& f) {
  const ExperimentConfig cfg = load_config(f);
  const ConvergenceResult res = run_convergence_experiment(cfg);
  std::ostringstream trace;
  std::ostringstream summary;
  write_convergence_trace_csv(trace, res, cfg.thinning);
  write_convergence_summary_csv(summary, res);
  if (format_of(f, "csv") == "json") {
    json runs = json::array();
    for (const ConvergenceRun& r : res.runs) {
      json e{{"run", r.run},
             {"seed", r.seed},
             {"mode", to_string(r.mode)},
             {"termination", to_string(r.trace.termination)},
             {"slots", r.trace.records.size()},
             {"final_ne_residual", r.trace.final_ne_residual}};
      if (r.trace.oscillation_period) e["period"] = *r.trace.oscillation_period;
      if (!r.trace.error.empty()) e["error"] = r.trace.error;
      if (res.endpoint_distance[r.run]) e["endpoint_distance"] = *res.endpoint_distance[r.run];
      runs.push_back(e);
    }
    emit(cfg.output, json{{"runs", runs}}.dump(1) + "\n");
  } else if (cfg.output.empty() || cfg.output == "-") {
    emit(cfg.output, summary.str());
  } else {
    emit(cfg.output, trace.str());
    emit(with_suffix(cfg.output, ".summary"), summary.str());
  }
  if (!f.quiet) {
    for (const ConvergenceRun& r : res.runs) {
      std::cerr << "run " << r.run << ' ' << to_string(r.mode) << ": "
                << to_string(r.trace.termination) << " after " << r.trace.records.size()
                << " slots, NE residual " << r.trace.final_ne_residual << '\n';
    }
  }
  return kExitOk;
}

int cmd_verify_lemmas(const CommonFlags& f) {
  const ExperimentConfig cfg = load_config(f);
  const LemmaSuiteResult res = run_lemma_suite(cfg);
  emit(cfg.output, res.to_json().dump(1) + "\n");
  if (!f.quiet) {
    for (const LemmaReport& r : res.reports) {
      std::cerr << r.name << ": " << to_string(r.status) << " (" << r.samples << " samples, "
                << r.violations << " violations)\n";
    }
  }
  return res.passed ? kExitOk : kExitAssertion;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MIMO energy-efficiency game toolkit"};
  app.require_subcommand(1);

  CommonFlags flags;
  int (*action)(const CommonFlags&) = nullptr;

  auto* scenario = app.add_subcommand("scenario", "generate or inspect scenarios");
  scenario->require_subcommand(1);
  auto* gen = scenario->add_subcommand("gen", "generate a random scenario");
  add_common(gen, flags);
  gen->callback([&] { action = cmd_scenario_gen; });
  auto* show = scenario->add_subcommand("show", "summarize a scenario file");
  add_common(show, flags);
  show->add_option("--scenario", flags.scenario, "scenario JSON file")->check(CLI::ExistingFile);
  show->callback([&] { action = cmd_scenario_show; });

  auto* br = app.add_subcommand("br", "best responses");
  br->require_subcommand(1);
  auto* solve = br->add_subcommand("solve", "best response of every player");
  add_common(solve, flags);
  solve->add_option("--scenario", flags.scenario, "scenario JSON file")->check(CLI::ExistingFile);
  solve->add_option("--profile", flags.profile, "profile JSON file")->check(CLI::ExistingFile);
  solve->callback([&] { action = cmd_br_solve; });

  auto* crit = app.add_subcommand("criteria", "uniqueness criteria");
  crit->require_subcommand(1);
  auto* eval = crit->add_subcommand("eval", "criteria of a single scenario");
  add_common(eval, flags);
  eval->add_option("--scenario", flags.scenario, "scenario JSON file")->check(CLI::ExistingFile);
  eval->callback([&] { action = cmd_criteria_eval; });
  auto* sweep = crit->add_subcommand("sweep", "Monte-Carlo sweep over an SNR/SIR grid");
  add_common(sweep, flags);
  sweep->callback([&] { action = cmd_criteria_sweep; });

  auto* iwfa = app.add_subcommand("iwfa", "iterative waterfilling");
  iwfa->require_subcommand(1);
  auto* run = iwfa->add_subcommand("run", "paired synchronous/asynchronous runs");
  add_common(run, flags);
  run->add_option("--scenario", flags.scenario, "scenario JSON file")->check(CLI::ExistingFile);
  run->callback([&] { action = cmd_iwfa_run; });

  auto* verify = app.add_subcommand("verify", "numerical verification");
  verify->require_subcommand(1);
  auto* lemmas = verify->add_subcommand("lemmas", "sampled lemma suite");
  add_common(lemmas, flags);
  lemmas->add_option("--scenario", flags.scenario, "scenario JSON file")->check(CLI::ExistingFile);
  lemmas->callback([&] { action = cmd_verify_lemmas; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    return action(flags);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  }
}
