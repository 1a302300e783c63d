#pragma once

#include <cstddef>
#include <vector>

#include "mimoee/game_model.hpp"

namespace mimoee {

enum class DinkelbachInit {
  uniform_full_budget,  ///< (P_q / r_q) I
  uniform_unit,         ///< I (one unit per eigenchannel)
};

struct DinkelbachConfig {
  double epsilon = 1e-9;
  std::size_t max_iters = 200;
  DinkelbachInit init = DinkelbachInit::uniform_full_budget;
};

/// Throws InvalidInput unless epsilon > 0 and max_iters >= 1.
void validate(const DinkelbachConfig& cfg);

struct DinkelbachResult {
  double power = 0.0;       ///< trace of the final iterate (p_u)
  std::size_t iterations = 0;
  double last_delta = 0.0;
  std::vector<double> ratios;  ///< nu^(1), nu^(2), ... (non-decreasing)
  bool degenerate = false;     ///< zero EE everywhere; treated as p_u = 0
};

/// Dinkelbach iteration for the unconstrained EE-optimal power on the
/// eigenchannels `gains` (eigenvalues of the whitened gram, all > 0).
/// `budget` only sets the initial point. Throws NonConvergence after
/// max_iters, carrying the last objective gap.
DinkelbachResult dinkelbach_on_gains(const RealVector& gains, double budget,
                                     double circuit_power, const DinkelbachConfig& cfg);

/// p_u for player q against a fixed profile of the others.
DinkelbachResult dinkelbach_power(const ReducedScenario& s, std::size_t q,
                                  const StrategyProfile& p, const DinkelbachConfig& cfg);

struct WaterfillResult {
  ComplexMatrix cov;
  RealVector powers;  ///< per-eigenchannel powers (mu - 1/d_k)^+
  double water_level = 0.0;
};

/// U diag((mu - 1/d_k)^+) U^H with the level mu chosen so the trace is
/// `power`. The zero matrix for power == 0.
WaterfillResult waterfill(const ComplexMatrix& u, const RealVector& gains, double power);

/// U diag((level - 1/d_k)^+) U^H at a given level.
RealVector powers_at_level(const RealVector& gains, double level);

struct BestResponseResult {
  ComplexMatrix cov;
  double p_unconstrained = 0.0;
  double p_hat = 0.0;
  double water_level = 0.0;
  std::size_t dinkelbach_iters = 0;
  bool degenerate = false;
};

/// EE best response of player q: Dinkelbach power, clipped at P_q, then
/// eigen-waterfilling on the whitened gram.
BestResponseResult best_response(const ReducedScenario& s, std::size_t q,
                                 const StrategyProfile& p, const DinkelbachConfig& cfg);

/// Best response given a measured MUI-plus-noise covariance. Other players
/// enter only through `mui`.
BestResponseResult best_response_from_mui(const ReducedScenario& s, std::size_t q,
                                          const ComplexMatrix& mui,
                                          const DinkelbachConfig& cfg);

/// The same best response written as a Frobenius projection of
/// -(whitened gram)^{-1} onto {Q >= 0, Tr Q = p_hat}.
ComplexMatrix projection_best_response(const ReducedScenario& s, std::size_t q,
                                       const StrategyProfile& p, double p_hat);

}  // namespace mimoee
