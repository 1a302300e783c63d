#pragma once

// Iterative EE waterfilling: every player repeatedly replaces its covariance
// by its best response to (possibly outdated) strategies of the others.
//
// Slot convention: slot t >= 1 produces the profile Q(t). A player updating
// at slot t responds to blocks taken from snapshots Q(t - 1 - d), with the
// measurement age d drawn per (q, r) pair in [0, min(D_max, t - 1)].

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mimoee/best_response.hpp"
#include "mimoee/game_model.hpp"

namespace mimoee {

enum class ScheduleMode { sequential, synchronous, asynchronous };

std::string to_string(ScheduleMode m);
ScheduleMode parse_schedule_mode(const std::string& s);

struct ScheduleParams {
  std::vector<double> rho{0.5};  ///< per-player update probability; one value is broadcast
  std::size_t max_delay = 3;     ///< D_max
};

/// Which players update at a slot and how old each of their measurements is.
struct SlotPlan {
  std::vector<bool> updates;
  std::vector<std::vector<std::size_t>> age;  ///< age[q][r] = t - 1 - tau_qr
};

struct UpdateSchedule {
  ScheduleMode mode = ScheduleMode::synchronous;
  std::size_t players = 0;
  std::vector<double> rho;
  std::size_t max_delay = 0;
  std::uint64_t seed = 0;

  /// Plan for slot t >= 1. Deterministic in (seed, t) and independent of
  /// the order in which slots are queried.
  SlotPlan plan(std::size_t slot) const;
};

/// Sequential: player (t - 1) mod Q at slot t, zero delay. Synchronous: all
/// players, zero delay. Asynchronous: Bernoulli(rho_q) updates and uniform
/// per-pair delays. Throws InvalidInput for rho outside (0, 1] or a rho
/// vector of the wrong size.
UpdateSchedule make_schedule(ScheduleMode mode, std::size_t players, const ScheduleParams& params,
                             std::uint64_t seed);

struct StopRule {
  std::size_t max_slots = 2000;
  double residual_tol = 1e-10;
  std::size_t sustain = 5;  ///< consecutive slots with r(t) <= tol
  bool detect_oscillation = true;
  std::size_t oscillation_window = 50;
  std::size_t max_period = 8;
  double oscillation_rel_tol = 1e-5;
};

struct IwfaOptions {
  StopRule stop;
  DinkelbachConfig dinkelbach;
  std::optional<RealVector> weights;  ///< block-max weights; Perron vector of S by default
  std::size_t ne_residual_every = 1;  ///< 0 disables the per-slot NE residual
  std::size_t snapshot_every = 0;     ///< keep every k-th profile (0: none)
};

enum class Termination { converged, max_slots, oscillating, error };

std::string to_string(Termination t);

struct SlotRecord {
  std::size_t slot = 0;
  std::vector<double> ee;
  std::vector<bool> updated;
  double block_residual = 0.0;
  double ne_residual = 0.0;  ///< NaN when not evaluated at this slot
  std::optional<StrategyProfile> profile;
};

struct IwfaTrace {
  std::vector<SlotRecord> records;
  StrategyProfile final_profile;
  RealVector weights;
  Termination termination = Termination::max_slots;
  std::optional<std::size_t> oscillation_period;
  std::string error;
  double final_ne_residual = 0.0;
};

/// Runs the iteration from `init` until the stop rule fires. Convergence
/// requires r(t) <= residual_tol for `sustain` consecutive slots during
/// which every player updated at least once. A best-response failure ends
/// the trace with Termination::error.
IwfaTrace run_iwfa(const ReducedScenario& s, const UpdateSchedule& schedule,
                   const StrategyProfile& init, const IwfaOptions& options);

/// max_q ||Q_q - BR_q(Q_{-q})||_F.
double ne_residual(const ReducedScenario& s, const StrategyProfile& p, const DinkelbachConfig& cfg);

/// Default block-max weights: floored Perron vector of the interference
/// matrix, or all ones when that vector is degenerate.
RealVector default_block_weights(const ReducedScenario& s);

/// Smallest period k <= max_period such that the last `window` values repeat
/// with period k within rel_tol * max(window), provided the window shows no
/// downward trend. Values at or below `floor` never count as oscillation.
std::optional<std::size_t> detect_period(const std::vector<double>& values, std::size_t window,
                                         std::size_t max_period, double rel_tol, double floor);

/// One row per (slot, player): slot,player,ee,block_residual,ne_residual,updated_flag.
/// Only every `thinning`-th slot is written (the last slot always is).
void write_trace_csv(std::ostream& out, const IwfaTrace& trace, std::size_t thinning = 1);

}  // namespace mimoee
