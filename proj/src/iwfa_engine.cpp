#include "mimoee/iwfa_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "mimoee/csv.hpp"
#include "mimoee/equilibrium_analysis.hpp"
#include "mimoee/errors.hpp"
#include "mimoee/random.hpp"

namespace mimoee {

std::string to_string(ScheduleMode m) {
  switch (m) {
    case ScheduleMode::sequential:
      return "sequential";
    case ScheduleMode::synchronous:
      return "synchronous";
    case ScheduleMode::asynchronous:
      return "asynchronous";
  }
  return "unknown";
}

ScheduleMode parse_schedule_mode(const std::string& s) {
  if (s == "sequential") return ScheduleMode::sequential;
  if (s == "synchronous") return ScheduleMode::synchronous;
  if (s == "asynchronous") return ScheduleMode::asynchronous;
  throw InvalidInput("unknown schedule mode '" + s + "'");
}

std::string to_string(Termination t) {
  switch (t) {
    case Termination::converged:
      return "converged";
    case Termination::max_slots:
      return "max_slots";
    case Termination::oscillating:
      return "oscillating";
    case Termination::error:
      return "error";
  }
  return "unknown";
}

UpdateSchedule make_schedule(ScheduleMode mode, std::size_t players, const ScheduleParams& params,
                             std::uint64_t seed) {
  if (players == 0) throw InvalidInput("make_schedule: need at least one player");
  UpdateSchedule sch;
  sch.mode = mode;
  sch.players = players;
  sch.seed = seed;
  if (mode != ScheduleMode::asynchronous) {
    sch.rho.assign(players, 1.0);
    return sch;
  }
  if (params.rho.size() == 1) {
    sch.rho.assign(players, params.rho.front());
  } else if (params.rho.size() == players) {
    sch.rho = params.rho;
  } else {
    throw InvalidInput("make_schedule: rho needs 1 or " + std::to_string(players) + " entries");
  }
  for (double r : sch.rho) {
    if (!(r > 0.0 && r <= 1.0)) {
      throw InvalidInput("make_schedule: update probability must lie in (0, 1]");
    }
  }
  sch.max_delay = params.max_delay;
  return sch;
}

SlotPlan UpdateSchedule::plan(std::size_t slot) const {
  if (slot == 0) throw InvalidInput("UpdateSchedule::plan: slots start at 1");
  SlotPlan p;
  p.updates.assign(players, false);
  p.age.assign(players, std::vector<std::size_t>(players, 0));
  switch (mode) {
    case ScheduleMode::synchronous:
      p.updates.assign(players, true);
      break;
    case ScheduleMode::sequential:
      p.updates[(slot - 1) % players] = true;
      break;
    case ScheduleMode::asynchronous: {
      Rng rng = make_rng(seed, {0x41ULL, slot});
      const std::size_t bound = std::min(max_delay, slot - 1);
      for (std::size_t q = 0; q < players; ++q) {
        p.updates[q] = uniform01(rng) < rho[q];
        for (std::size_t r = 0; r < players; ++r) {
          const auto draw = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(bound + 1));
          p.age[q][r] = (r == q) ? 0 : std::min(draw, bound);
        }
      }
      break;
    }
  }
  return p;
}

double ne_residual(const ReducedScenario& s, const StrategyProfile& p,
                   const DinkelbachConfig& cfg) {
  double worst = 0.0;
  for (std::size_t q = 0; q < s.num_players(); ++q) {
    worst = std::max(worst, (p[q] - best_response(s, q, p, cfg).cov).norm());
  }
  return worst;
}

RealVector default_block_weights(const ReducedScenario& s) {
  const auto nq = static_cast<Eigen::Index>(s.num_players());
  if (nq == 1) return RealVector::Ones(1);
  const PerronResult perron = spectral_radius(interference_matrix(s).values);
  if (perron.degenerate) return RealVector::Ones(nq);
  return floored_weights(perron.vector);
}

std::optional<std::size_t> detect_period(const std::vector<double>& values, std::size_t window,
                                         std::size_t max_period, double rel_tol, double floor) {
  if (window < 2 || values.size() < window) return std::nullopt;
  const auto first = values.end() - static_cast<std::ptrdiff_t>(window);
  const auto [lo, hi] = std::minmax_element(first, values.end());
  if (*lo <= floor) return std::nullopt;
  const double scale = *hi;

  const std::size_t edge = std::min(max_period, window / 2);
  const double head = std::accumulate(first, first + static_cast<std::ptrdiff_t>(edge), 0.0);
  const double tail =
      std::accumulate(values.end() - static_cast<std::ptrdiff_t>(edge), values.end(), 0.0);
  if (tail < head * (1.0 - 100.0 * rel_tol)) return std::nullopt;

  for (std::size_t k = 1; k <= max_period && k < window; ++k) {
    bool periodic = true;
    for (auto it = first + static_cast<std::ptrdiff_t>(k); it != values.end(); ++it) {
      if (std::abs(*it - *(it - static_cast<std::ptrdiff_t>(k))) > rel_tol * scale) {
        periodic = false;
        break;
      }
    }
    if (periodic) return k;
  }
  return std::nullopt;
}

IwfaTrace run_iwfa(const ReducedScenario& s, const UpdateSchedule& schedule,
                   const StrategyProfile& init, const IwfaOptions& options) {
  const std::size_t nq = s.num_players();
  if (schedule.players != nq) throw InvalidInput("run_iwfa: schedule size mismatch");
  validate_profile(s, init);
  validate(options.dinkelbach);
  const StopRule& stop = options.stop;
  if (stop.sustain == 0) throw InvalidInput("run_iwfa: sustain must be >= 1");
  if (!(stop.residual_tol >= 0.0)) throw InvalidInput("run_iwfa: residual_tol must be >= 0");

  IwfaTrace trace;
  trace.weights = floored_weights(options.weights.value_or(default_block_weights(s)));
  if (static_cast<std::size_t>(trace.weights.size()) != nq) {
    throw InvalidInput("run_iwfa: weight vector has the wrong size");
  }

  const std::size_t depth = schedule.max_delay + 1;
  std::vector<StrategyProfile> ring(depth);
  ring[0] = init;
  auto snapshot = [&](std::size_t t) -> const StrategyProfile& { return ring[t % depth]; };

  std::vector<double> residuals;
  std::size_t streak = 0;
  std::vector<bool> covered(nq, false);
  StrategyProfile current = init;

  for (std::size_t t = 1; t <= stop.max_slots; ++t) {
    const SlotPlan plan = schedule.plan(t);
    StrategyProfile next = current;
    try {
      for (std::size_t q = 0; q < nq; ++q) {
        if (!plan.updates[q]) continue;
        ComplexMatrix mui = s.noise_cov[q];
        for (std::size_t r = 0; r < nq; ++r) {
          if (r == q) continue;
          const ComplexMatrix& block = snapshot(t - 1 - plan.age[q][r])[r];
          mui.noalias() += s.channels[q][r] * block * s.channels[q][r].adjoint();
        }
        next[q] = best_response_from_mui(s, q, hermitian_part(mui), options.dinkelbach).cov;
      }
    } catch (const std::exception& e) {
      trace.termination = Termination::error;
      trace.error = "slot " + std::to_string(t) + ": " + e.what();
      break;
    }

    SlotRecord rec;
    rec.slot = t;
    rec.updated = plan.updates;
    rec.block_residual = block_max_distance(next, current, trace.weights);
    rec.ee.resize(nq);
    for (std::size_t q = 0; q < nq; ++q) rec.ee[q] = energy_efficiency(s, q, next);
    rec.ne_residual = std::numeric_limits<double>::quiet_NaN();
    if (options.ne_residual_every > 0 && t % options.ne_residual_every == 0) {
      try {
        rec.ne_residual = ne_residual(s, next, options.dinkelbach);
      } catch (const std::exception&) {
        // left as NaN; a failing best response at the next update ends the run
      }
    }
    if (options.snapshot_every > 0 && t % options.snapshot_every == 0) rec.profile = next;

    current = std::move(next);
    ring[t % depth] = current;
    residuals.push_back(rec.block_residual);
    trace.records.push_back(std::move(rec));

    if (residuals.back() <= stop.residual_tol) {
      ++streak;
      for (std::size_t q = 0; q < nq; ++q) covered[q] = covered[q] || plan.updates[q];
    } else {
      streak = 0;
      covered.assign(nq, false);
    }
    if (streak >= stop.sustain && std::all_of(covered.begin(), covered.end(), [](bool b) { return b; })) {
      trace.termination = Termination::converged;
      break;
    }
    if (stop.detect_oscillation) {
      const auto period = detect_period(residuals, stop.oscillation_window, stop.max_period,
                                        stop.oscillation_rel_tol, stop.residual_tol);
      if (period) {
        trace.termination = Termination::oscillating;
        trace.oscillation_period = period;
        break;
      }
    }
  }

  trace.final_profile = current;
  trace.final_ne_residual = std::numeric_limits<double>::quiet_NaN();
  if (trace.termination != Termination::error) {
    try {
      trace.final_ne_residual = ne_residual(s, current, options.dinkelbach);
    } catch (const std::exception&) {
    }
  }
  return trace;
}

void write_trace_csv(std::ostream& out, const IwfaTrace& trace, std::size_t thinning) {
  if (thinning == 0) throw InvalidInput("write_trace_csv: thinning must be >= 1");
  write_csv_row(out, {"slot", "player", "ee", "block_residual", "ne_residual", "updated_flag"});
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const SlotRecord& rec = trace.records[i];
    const bool last = i + 1 == trace.records.size();
    if (rec.slot % thinning != 0 && !last) continue;
    for (std::size_t q = 0; q < rec.ee.size(); ++q) {
      write_csv_row(out, {std::to_string(rec.slot), std::to_string(q), format_double(rec.ee[q]),
                          format_double(rec.block_residual), format_double(rec.ne_residual),
                          rec.updated[q] ? "1" : "0"});
    }
  }
}

}  // namespace mimoee
