#include "mimoee/experiment.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>

#include "mimoee/csv.hpp"
#include "mimoee/errors.hpp"
#include "mimoee/random.hpp"
#include "mimoee/scenario_io.hpp"

namespace mimoee {

using nlohmann::json;

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::criteria_sweep:
      return "criteria-sweep";
    case ExperimentKind::iwfa_run:
      return "iwfa-run";
    case ExperimentKind::lemma_verify:
      return "lemma-verify";
    case ExperimentKind::br_solve:
      return "br-solve";
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& s) {
  if (s == "criteria-sweep") return ExperimentKind::criteria_sweep;
  if (s == "iwfa-run") return ExperimentKind::iwfa_run;
  if (s == "lemma-verify") return ExperimentKind::lemma_verify;
  if (s == "br-solve") return ExperimentKind::br_solve;
  throw InvalidInput("unknown experiment kind '" + s + "'");
}

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw InvalidInput(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw InvalidInput(where + ": unknown key '" + key + "'");
  }
}

double db_value(const json& v, const std::string& what) {
  if (v.is_null()) return std::numeric_limits<double>::infinity();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    throw InvalidInput(what + ": unrecognised value '" + s + "'");
  }
  if (!v.is_number()) throw InvalidInput(what + ": expected a number");
  return v.get<double>();
}

std::vector<double> db_list(const json& v, const std::string& what) {
  if (!v.is_array()) throw InvalidInput(what + ": expected an array");
  std::vector<double> out;
  for (const auto& e : v) out.push_back(db_value(e, what));
  return out;
}

template <typename T>
T get_as(const json& j, const std::string& key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidInput(where + "." + key + ": " + e.what());
  }
}

DinkelbachInit parse_init(const std::string& s) {
  if (s == "uniform-full-budget") return DinkelbachInit::uniform_full_budget;
  if (s == "uniform-unit") return DinkelbachInit::uniform_unit;
  throw InvalidInput("unknown Dinkelbach init '" + s + "'");
}

void parse_scenario_params(const json& j, ScenarioParams& p) {
  check_keys(j,
             {"players", "antennas", "snr_db", "sir_db", "max_power", "circuit_power",
              "snr_convention", "channel"},
             "scenario");
  if (j.contains("players")) p.players = get_as<std::size_t>(j, "players", "scenario");
  if (j.contains("antennas")) p.antennas = get_as<std::size_t>(j, "antennas", "scenario");
  if (j.contains("snr_db")) p.snr_db = db_value(j["snr_db"], "scenario.snr_db");
  if (j.contains("sir_db")) p.sir_db = db_value(j["sir_db"], "scenario.sir_db");
  if (j.contains("max_power")) p.max_power = get_as<double>(j, "max_power", "scenario");
  if (j.contains("circuit_power")) {
    p.circuit_power = get_as<double>(j, "circuit_power", "scenario");
  }
  if (j.contains("snr_convention")) {
    p.snr_convention = parse_snr_convention(get_as<std::string>(j, "snr_convention", "scenario"));
  }
  if (j.contains("channel")) {
    p.channel = parse_channel_kind(get_as<std::string>(j, "channel", "scenario"));
  }
}

std::string db_text(double v) { return format_double(v); }

double parse_number(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw InvalidInput("bad number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw InvalidInput("bad number '" + s + "'");
  }
}

}  // namespace

ExperimentConfig parse_experiment_config(const json& j) {
  check_keys(j,
             {"kind", "scenario", "scenario_file", "grid", "trials", "seed", "output",
              "dinkelbach", "schedule", "iwfa", "interference_samples",
              "power_smoothness_pairs", "lemmas"},
             "config");
  ExperimentConfig cfg;
  if (j.contains("kind")) cfg.kind = parse_experiment_kind(get_as<std::string>(j, "kind", "config"));
  if (j.contains("scenario")) parse_scenario_params(j["scenario"], cfg.scenario);
  if (j.contains("scenario_file")) {
    cfg.scenario_file = get_as<std::string>(j, "scenario_file", "config");
  }
  if (j.contains("grid")) {
    const json& g = j["grid"];
    check_keys(g, {"snr_db", "sir_db"}, "grid");
    if (g.contains("snr_db")) cfg.snr_db = db_list(g["snr_db"], "grid.snr_db");
    if (g.contains("sir_db")) cfg.sir_db = db_list(g["sir_db"], "grid.sir_db");
  }
  if (j.contains("trials")) cfg.trials = get_as<std::size_t>(j, "trials", "config");
  if (j.contains("seed")) cfg.seed = get_as<std::uint64_t>(j, "seed", "config");
  if (j.contains("output")) cfg.output = get_as<std::string>(j, "output", "config");
  if (j.contains("dinkelbach")) {
    const json& d = j["dinkelbach"];
    check_keys(d, {"epsilon", "max_iters", "init"}, "dinkelbach");
    if (d.contains("epsilon")) cfg.dinkelbach.epsilon = get_as<double>(d, "epsilon", "dinkelbach");
    if (d.contains("max_iters")) {
      cfg.dinkelbach.max_iters = get_as<std::size_t>(d, "max_iters", "dinkelbach");
    }
    if (d.contains("init")) cfg.dinkelbach.init = parse_init(get_as<std::string>(d, "init", "dinkelbach"));
  }
  if (j.contains("schedule")) {
    const json& s = j["schedule"];
    check_keys(s, {"rho", "max_delay"}, "schedule");
    if (s.contains("rho")) {
      cfg.schedule.rho = s["rho"].is_array() ? get_as<std::vector<double>>(s, "rho", "schedule")
                                             : std::vector<double>{get_as<double>(s, "rho", "schedule")};
    }
    if (s.contains("max_delay")) {
      cfg.schedule.max_delay = get_as<std::size_t>(s, "max_delay", "schedule");
    }
  }
  if (j.contains("iwfa")) {
    const json& w = j["iwfa"];
    check_keys(w,
               {"max_slots", "residual_tol", "sustain", "modes", "runs", "thinning",
                "detect_oscillation", "oscillation_window", "max_period", "oscillation_rel_tol"},
               "iwfa");
    if (w.contains("max_slots")) cfg.stop.max_slots = get_as<std::size_t>(w, "max_slots", "iwfa");
    if (w.contains("residual_tol")) cfg.stop.residual_tol = get_as<double>(w, "residual_tol", "iwfa");
    if (w.contains("sustain")) cfg.stop.sustain = get_as<std::size_t>(w, "sustain", "iwfa");
    if (w.contains("detect_oscillation")) {
      cfg.stop.detect_oscillation = get_as<bool>(w, "detect_oscillation", "iwfa");
    }
    if (w.contains("oscillation_window")) {
      cfg.stop.oscillation_window = get_as<std::size_t>(w, "oscillation_window", "iwfa");
    }
    if (w.contains("max_period")) cfg.stop.max_period = get_as<std::size_t>(w, "max_period", "iwfa");
    if (w.contains("oscillation_rel_tol")) {
      cfg.stop.oscillation_rel_tol = get_as<double>(w, "oscillation_rel_tol", "iwfa");
    }
    if (w.contains("modes")) {
      cfg.modes.clear();
      for (const auto& m : get_as<std::vector<std::string>>(w, "modes", "iwfa")) {
        cfg.modes.push_back(parse_schedule_mode(m));
      }
    }
    if (w.contains("runs")) cfg.runs = get_as<std::size_t>(w, "runs", "iwfa");
    if (w.contains("thinning")) cfg.thinning = get_as<std::size_t>(w, "thinning", "iwfa");
  }
  if (j.contains("interference_samples")) {
    cfg.interference_samples = get_as<std::size_t>(j, "interference_samples", "config");
  }
  if (j.contains("power_smoothness_pairs")) {
    cfg.power_smoothness_pairs = get_as<std::size_t>(j, "power_smoothness_pairs", "config");
  }
  if (j.contains("lemmas")) {
    const json& l = j["lemmas"];
    check_keys(l, {"pairs", "sqrt_q_players", "sqrt_q_antennas", "monotonicity_enforce_precondition"},
               "lemmas");
    if (l.contains("pairs")) cfg.lemmas.pairs = get_as<std::size_t>(l, "pairs", "lemmas");
    if (l.contains("sqrt_q_players")) {
      cfg.lemmas.sqrt_q_players = get_as<std::vector<std::size_t>>(l, "sqrt_q_players", "lemmas");
    }
    if (l.contains("sqrt_q_antennas")) {
      cfg.lemmas.sqrt_q_antennas = get_as<std::size_t>(l, "sqrt_q_antennas", "lemmas");
    }
    if (l.contains("monotonicity_enforce_precondition")) {
      cfg.lemmas.monotonicity_enforce_precondition =
          get_as<bool>(l, "monotonicity_enforce_precondition", "lemmas");
    }
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig read_experiment_config(const std::string& path) {
  ExperimentConfig cfg = parse_experiment_config(read_json_file(path));
  if (cfg.scenario_file && std::filesystem::path(*cfg.scenario_file).is_relative()) {
    cfg.scenario_file =
        (std::filesystem::path(path).parent_path() / *cfg.scenario_file).string();
  }
  return cfg;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.trials == 0) throw InvalidInput("config: trials must be >= 1");
  if (cfg.snr_db.empty() || cfg.sir_db.empty()) throw InvalidInput("config: empty grid");
  for (double v : cfg.snr_db) {
    if (!std::isfinite(v)) throw InvalidInput("config: SNR grid values must be finite");
  }
  for (double v : cfg.sir_db) {
    if (std::isnan(v) || v == -std::numeric_limits<double>::infinity()) {
      throw InvalidInput("config: SIR grid values must be finite or +inf");
    }
  }
  if (cfg.scenario.players == 0 || cfg.scenario.antennas == 0) {
    throw InvalidInput("config: players and antennas must be >= 1");
  }
  if (cfg.runs == 0) throw InvalidInput("config: iwfa.runs must be >= 1");
  if (cfg.thinning == 0) throw InvalidInput("config: iwfa.thinning must be >= 1");
  if (cfg.modes.empty()) throw InvalidInput("config: iwfa.modes must not be empty");
  if (cfg.interference_samples == 0) throw InvalidInput("config: interference_samples must be >= 1");
  if (cfg.lemmas.pairs == 0) throw InvalidInput("config: lemmas.pairs must be >= 1");
  validate(cfg.dinkelbach);
  for (double r : cfg.schedule.rho) {
    if (!(r > 0.0 && r <= 1.0)) throw InvalidInput("config: schedule.rho must lie in (0, 1]");
  }
}

NetworkScenario experiment_scenario(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (cfg.scenario_file) return read_scenario_file(*cfg.scenario_file);
  ScenarioParams p = cfg.scenario;
  p.seed = seed;
  return generate_scenario(p);
}

// ---- criteria sweep ----

SweepResult run_criteria_sweep(const ExperimentConfig& cfg, Exec exec) {
  validate(cfg);
  const std::size_t n_snr = cfg.snr_db.size();
  const std::size_t n_sir = cfg.sir_db.size();
  const std::size_t total = n_snr * n_sir * cfg.trials;

  SweepResult out;
  out.rows = map_indices<SweepRow>(total, exec, [&](std::size_t idx) {
    const std::size_t k = idx % cfg.trials;
    const std::size_t j = (idx / cfg.trials) % n_sir;
    const std::size_t i = idx / (cfg.trials * n_sir);
    ScenarioParams p = cfg.scenario;
    p.snr_db = cfg.snr_db[i];
    p.sir_db = cfg.sir_db[j];
    p.seed = derive_seed(cfg.seed, {i, k});
    const ReducedScenario rs = reduce(generate_scenario(p));
    const InterferenceMatrix im =
        interference_matrix(rs, cfg.interference_samples, derive_seed(p.seed, {1}), Exec::serial);
    std::optional<PowerSmoothnessConfig> smooth;
    if (cfg.power_smoothness_pairs > 0) {
      PowerSmoothnessConfig sc;
      sc.n_pairs = cfg.power_smoothness_pairs;
      sc.seed = derive_seed(p.seed, {2});
      sc.dinkelbach = cfg.dinkelbach;
      smooth = sc;
    }
    const CriteriaReport cr = criteria(rs, im, smooth, Exec::serial);
    SweepRow row;
    row.snr_db = p.snr_db;
    row.sir_db = p.sir_db;
    row.trial = k;
    row.seed = p.seed;
    row.sr_S = cr.sr_S;
    row.sr_Ssym = cr.sr_Ssym;
    row.sigma_max_IplusS = cr.sigma_max_IplusS;
    row.ok_contraction = cr.interference_ok_contraction;
    row.ok_qvi = cr.interference_ok_qvi;
    if (cr.power_smoothness) {
      row.power_ratio_l2 = cr.power_smoothness->max_ratio_l2;
      row.power_ratio_weighted_inf = cr.power_smoothness->max_ratio_weighted_inf;
    }
    return row;
  });

  for (std::size_t c = 0; c < n_snr * n_sir; ++c) {
    SweepCell cell;
    cell.snr_db = cfg.snr_db[c / n_sir];
    cell.sir_db = cfg.sir_db[c % n_sir];
    cell.trials = cfg.trials;
    std::size_t n_con = 0;
    std::size_t n_qvi = 0;
    for (std::size_t k = 0; k < cfg.trials; ++k) {
      const SweepRow& r = out.rows[c * cfg.trials + k];
      n_con += r.ok_contraction;
      n_qvi += r.ok_qvi;
    }
    const double n = static_cast<double>(cfg.trials);
    cell.frac_contraction = static_cast<double>(n_con) / n;
    cell.frac_qvi = static_cast<double>(n_qvi) / n;
    cell.stderr_contraction = std::sqrt(cell.frac_contraction * (1.0 - cell.frac_contraction) / n);
    cell.stderr_qvi = std::sqrt(cell.frac_qvi * (1.0 - cell.frac_qvi) / n);
    out.cells.push_back(cell);
  }
  return out;
}

namespace {

const std::vector<std::string> kSweepColumns = {
    "snr_db", "sir_db", "trial", "seed", "sr_S", "sr_Ssym", "sigma_max_IplusS",
    "ok_contraction", "ok_qvi", "power_ratio_l2", "power_ratio_weighted_inf"};

std::string optional_text(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

}  // namespace

void write_sweep_rows_csv(std::ostream& out, const SweepResult& r) {
  out << '#' << kSweepSchema << '\n';
  write_csv_row(out, kSweepColumns);
  for (const SweepRow& row : r.rows) {
    write_csv_row(out, {db_text(row.snr_db), db_text(row.sir_db), std::to_string(row.trial),
                        std::to_string(row.seed), format_double(row.sr_S),
                        format_double(row.sr_Ssym), format_double(row.sigma_max_IplusS),
                        row.ok_contraction ? "1" : "0", row.ok_qvi ? "1" : "0",
                        optional_text(row.power_ratio_l2),
                        optional_text(row.power_ratio_weighted_inf)});
  }
}

void write_sweep_cells_csv(std::ostream& out, const SweepResult& r) {
  out << '#' << kCellSchema << '\n';
  write_csv_row(out, {"snr_db", "sir_db", "trials", "frac_contraction", "stderr_contraction",
                      "frac_qvi", "stderr_qvi"});
  for (const SweepCell& c : r.cells) {
    write_csv_row(out, {db_text(c.snr_db), db_text(c.sir_db), std::to_string(c.trials),
                        format_double(c.frac_contraction), format_double(c.stderr_contraction),
                        format_double(c.frac_qvi), format_double(c.stderr_qvi)});
  }
}

std::vector<SweepRow> read_sweep_rows_csv(std::istream& in) {
  const CsvTable t = read_csv(in);
  if (t.comments.empty() || t.comments.front() != kSweepSchema) {
    throw InvalidInput("sweep csv: missing or unsupported schema line");
  }
  if (t.header != kSweepColumns) throw InvalidInput("sweep csv: unexpected columns");
  std::vector<SweepRow> rows;
  for (const auto& c : t.rows) {
    SweepRow r;
    r.snr_db = parse_number(c[0]);
    r.sir_db = parse_number(c[1]);
    r.trial = std::stoull(c[2]);
    r.seed = std::stoull(c[3]);
    r.sr_S = parse_number(c[4]);
    r.sr_Ssym = parse_number(c[5]);
    r.sigma_max_IplusS = parse_number(c[6]);
    r.ok_contraction = c[7] == "1";
    r.ok_qvi = c[8] == "1";
    if (!c[9].empty()) r.power_ratio_l2 = parse_number(c[9]);
    if (!c[10].empty()) r.power_ratio_weighted_inf = parse_number(c[10]);
    rows.push_back(r);
  }
  return rows;
}

// ---- convergence runs ----

ConvergenceResult run_convergence_experiment(const ExperimentConfig& cfg, Exec exec) {
  validate(cfg);
  const std::size_t n_modes = cfg.modes.size();
  ConvergenceResult out;
  out.runs = map_indices<ConvergenceRun>(cfg.runs * n_modes, exec, [&](std::size_t idx) {
    ConvergenceRun run;
    run.run = idx / n_modes;
    run.mode = cfg.modes[idx % n_modes];
    run.seed = cfg.runs == 1 ? cfg.seed : derive_seed(cfg.seed, {run.run});
    try {
      const ReducedScenario rs = reduce(experiment_scenario(cfg, run.seed));
      const UpdateSchedule sch =
          make_schedule(run.mode, rs.num_players(), cfg.schedule,
                        derive_seed(run.seed, {0x5cULL, static_cast<std::uint64_t>(run.mode)}));
      IwfaOptions opt;
      opt.stop = cfg.stop;
      opt.dinkelbach = cfg.dinkelbach;
      run.trace = run_iwfa(rs, sch, uniform_profile(rs), opt);
    } catch (const std::exception& e) {
      run.trace.termination = Termination::error;
      run.trace.error = e.what();
      run.trace.final_ne_residual = std::numeric_limits<double>::quiet_NaN();
    }
    return run;
  });

  out.endpoint_distance.assign(cfg.runs, std::nullopt);
  if (n_modes >= 2) {
    for (std::size_t r = 0; r < cfg.runs; ++r) {
      const IwfaTrace& a = out.runs[r * n_modes].trace;
      const IwfaTrace& b = out.runs[r * n_modes + 1].trace;
      if (a.final_profile.size() == 0 || a.final_profile.size() != b.final_profile.size()) continue;
      out.endpoint_distance[r] = block_max_distance(
          a.final_profile, b.final_profile,
          RealVector::Ones(static_cast<Eigen::Index>(a.final_profile.size())));
    }
  }
  return out;
}

void write_convergence_trace_csv(std::ostream& out, const ConvergenceResult& r,
                                 std::size_t thinning) {
  if (thinning == 0) throw InvalidInput("thinning must be >= 1");
  out << '#' << kConvergenceSchema << " trace\n";
  write_csv_row(out, {"run", "mode", "slot", "player", "ee", "block_residual", "ne_residual",
                      "updated_flag"});
  for (const ConvergenceRun& run : r.runs) {
    const auto& recs = run.trace.records;
    for (std::size_t i = 0; i < recs.size(); ++i) {
      const SlotRecord& rec = recs[i];
      if (rec.slot % thinning != 0 && i + 1 != recs.size()) continue;
      for (std::size_t q = 0; q < rec.ee.size(); ++q) {
        write_csv_row(out, {std::to_string(run.run), to_string(run.mode), std::to_string(rec.slot),
                            std::to_string(q), format_double(rec.ee[q]),
                            format_double(rec.block_residual), format_double(rec.ne_residual),
                            rec.updated[q] ? "1" : "0"});
      }
    }
  }
}

void write_convergence_summary_csv(std::ostream& out, const ConvergenceResult& r) {
  out << '#' << kConvergenceSchema << " summary\n";
  write_csv_row(out, {"run", "seed", "mode", "termination", "period", "slots",
                      "final_block_residual", "final_ne_residual", "final_ee",
                      "endpoint_distance", "error"});
  for (const ConvergenceRun& run : r.runs) {
    const IwfaTrace& t = run.trace;
    std::string ee;
    double last_residual = std::numeric_limits<double>::quiet_NaN();
    if (!t.records.empty()) {
      for (std::size_t q = 0; q < t.records.back().ee.size(); ++q) {
        if (q) ee += ';';
        ee += format_double(t.records.back().ee[q]);
      }
      last_residual = t.records.back().block_residual;
    }
    const auto& dist = r.endpoint_distance[run.run];
    std::string err = t.error;
    for (char& ch : err) {
      if (ch == ',' || ch == '\n') ch = ' ';
    }
    write_csv_row(out, {std::to_string(run.run), std::to_string(run.seed), to_string(run.mode),
                        to_string(t.termination),
                        t.oscillation_period ? std::to_string(*t.oscillation_period) : "",
                        std::to_string(t.records.size()), format_double(last_residual),
                        format_double(t.final_ne_residual), ee, optional_text(dist), err});
  }
}

// ---- lemma suite ----

json LemmaSuiteResult::to_json() const {
  json reps = json::array();
  for (const LemmaReport& r : reports) reps.push_back(mimoee::to_json(r));
  return json{{"schema", "mimoee-lemma-suite v1"}, {"passed", passed}, {"reports", reps}};
}

LemmaSuiteResult run_lemma_suite(const ExperimentConfig& cfg, Exec exec) {
  validate(cfg);
  const ReducedScenario rs = reduce(experiment_scenario(cfg, cfg.seed));
  const std::size_t n = cfg.lemmas.pairs;
  LemmaSuiteResult out;
  out.reports.push_back(verify_lipschitz(rs, n, derive_seed(cfg.seed, {0x4c}), exec));
  out.reports.push_back(verify_monotonicity(rs, n, derive_seed(cfg.seed, {0x4d}), exec,
                                            cfg.lemmas.monotonicity_enforce_precondition));
  out.reports.push_back(verify_power_set_smoothness(rs, n, derive_seed(cfg.seed, {0x59}), exec));
  for (std::size_t players : cfg.lemmas.sqrt_q_players) {
    out.reports.push_back(verify_sqrt_q_construction(players, cfg.lemmas.sqrt_q_antennas,
                                                     derive_seed(cfg.seed, {0x51})));
  }
  for (const LemmaReport& r : out.reports) {
    if (r.status == LemmaStatus::fail) out.passed = false;
  }
  return out;
}

// ---- best response ----

json solve_best_responses(const ReducedScenario& s, const std::optional<StrategyProfile>& profile,
                          const DinkelbachConfig& cfg) {
  const StrategyProfile p = profile.value_or(uniform_profile(s));
  validate_profile(s, p);
  json players = json::array();
  for (std::size_t q = 0; q < s.num_players(); ++q) {
    const BestResponseResult br = best_response(s, q, p, cfg);
    StrategyProfile unilateral = p;
    unilateral[q] = br.cov;
    players.push_back({{"player", q},
                       {"p_unconstrained", br.p_unconstrained},
                       {"p_hat", br.p_hat},
                       {"water_level", br.water_level},
                       {"dinkelbach_iterations", br.dinkelbach_iters},
                       {"degenerate", br.degenerate},
                       {"ee_before", energy_efficiency(s, q, p)},
                       {"ee_after", energy_efficiency(s, q, unilateral)},
                       {"covariance", matrix_to_json(br.cov)}});
  }
  return json{{"players", players}};
}

std::string resolve_output_path(const std::string& path) {
  if (path.empty() || path == "-") return path;
  const std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  if (const char* dir = std::getenv("MIMOEE_OUT_DIR"); dir && *dir) {
    return (std::filesystem::path(dir) / p).string();
  }
  return path;
}

}  // namespace mimoee
