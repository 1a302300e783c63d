#pragma once

// Batch drivers behind the command-line tool: criterion sweeps over SNR/SIR
// grids, paired synchronous/asynchronous convergence runs and the lemma
// verification suite. All output is deterministic given the config.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mimoee/best_response.hpp"
#include "mimoee/equilibrium_analysis.hpp"
#include "mimoee/game_model.hpp"
#include "mimoee/iwfa_engine.hpp"
#include "mimoee/parallel.hpp"

namespace mimoee {

enum class ExperimentKind { criteria_sweep, iwfa_run, lemma_verify, br_solve };

std::string to_string(ExperimentKind k);
ExperimentKind parse_experiment_kind(const std::string& s);

struct LemmaSuiteConfig {
  std::size_t pairs = 500;
  std::vector<std::size_t> sqrt_q_players{2, 4, 8};
  std::size_t sqrt_q_antennas = 4;
  bool monotonicity_enforce_precondition = false;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::criteria_sweep;
  ScenarioParams scenario;
  std::optional<std::string> scenario_file;
  std::vector<double> snr_db{0.0, 5.0, 10.0, 15.0};
  std::vector<double> sir_db{-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0};
  std::size_t trials = 200;
  std::uint64_t seed = 0;
  std::string output;
  DinkelbachConfig dinkelbach;
  ScheduleParams schedule;
  StopRule stop;
  std::vector<ScheduleMode> modes{ScheduleMode::synchronous, ScheduleMode::asynchronous};
  std::size_t runs = 1;
  std::size_t thinning = 1;
  std::size_t interference_samples = 200;
  std::size_t power_smoothness_pairs = 0;  ///< 0 skips the power-mapping estimate
  LemmaSuiteConfig lemmas;
};

/// Throws InvalidInput on unknown keys, bad values, empty grids or trials == 0.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig read_experiment_config(const std::string& path);
void validate(const ExperimentConfig& cfg);

/// The scenario a single-scenario experiment runs on: the scenario file if
/// given, else generated from the parameters with `seed`.
NetworkScenario experiment_scenario(const ExperimentConfig& cfg, std::uint64_t seed);

// ---- criteria sweep ----

struct SweepRow {
  double snr_db = 0.0;
  double sir_db = 0.0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  double sr_S = 0.0;
  double sr_Ssym = 0.0;
  double sigma_max_IplusS = 0.0;
  bool ok_contraction = false;
  bool ok_qvi = false;
  std::optional<double> power_ratio_l2;
  std::optional<double> power_ratio_weighted_inf;
};

struct SweepCell {
  double snr_db = 0.0;
  double sir_db = 0.0;
  std::size_t trials = 0;
  double frac_contraction = 0.0;
  double stderr_contraction = 0.0;
  double frac_qvi = 0.0;
  double stderr_qvi = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;  ///< ordered by (snr index, sir index, trial)
  std::vector<SweepCell> cells;
};

/// Trial k of SNR index i uses the seed derived from (cfg.seed, i, k) at
/// every SIR, so cells along an SIR axis share their channel draws.
SweepResult run_criteria_sweep(const ExperimentConfig& cfg, Exec exec = Exec::parallel);

inline constexpr const char* kSweepSchema = "mimoee-criteria-sweep v1";
inline constexpr const char* kCellSchema = "mimoee-criteria-cells v1";
inline constexpr const char* kConvergenceSchema = "mimoee-convergence v1";

void write_sweep_rows_csv(std::ostream& out, const SweepResult& r);
void write_sweep_cells_csv(std::ostream& out, const SweepResult& r);
std::vector<SweepRow> read_sweep_rows_csv(std::istream& in);

// ---- convergence runs ----

struct ConvergenceRun {
  std::size_t run = 0;
  std::uint64_t seed = 0;
  ScheduleMode mode = ScheduleMode::synchronous;
  IwfaTrace trace;
};

struct ConvergenceResult {
  std::vector<ConvergenceRun> runs;  ///< ordered by (run, mode)
  /// Block-max distance (unit weights) between the endpoints of the first
  /// two modes of each run; empty when fewer than two modes are configured.
  std::vector<std::optional<double>> endpoint_distance;
};

/// Run r uses scenario seed derive(cfg.seed, r) (or cfg.seed itself when
/// runs == 1) and schedule seed derive(scenario seed, mode).
ConvergenceResult run_convergence_experiment(const ExperimentConfig& cfg,
                                             Exec exec = Exec::parallel);

/// Per-slot trace rows: run,mode,slot,player,ee,block_residual,ne_residual,updated_flag.
void write_convergence_trace_csv(std::ostream& out, const ConvergenceResult& r,
                                 std::size_t thinning);
/// One row per (run, mode) with the termination label and endpoint figures.
void write_convergence_summary_csv(std::ostream& out, const ConvergenceResult& r);

// ---- lemma suite ----

struct LemmaSuiteResult {
  std::vector<LemmaReport> reports;
  bool passed = true;  ///< no report has status fail
  nlohmann::json to_json() const;
};

LemmaSuiteResult run_lemma_suite(const ExperimentConfig& cfg, Exec exec = Exec::parallel);

// ---- best response ----

/// Best response of every player against `profile` (uniform power when absent).
nlohmann::json solve_best_responses(const ReducedScenario& s,
                                    const std::optional<StrategyProfile>& profile,
                                    const DinkelbachConfig& cfg);

/// Resolves a relative output path against $MIMOEE_OUT_DIR when that is set.
std::string resolve_output_path(const std::string& path);

}  // namespace mimoee
