#pragma once

// Interference matrices, NE uniqueness criteria and numerical checks of the
// properties the criteria rest on (Lipschitz continuity and strong
// monotonicity of the QVI map, smoothness of the power-dependent sets).
//
// Nothing here proves uniqueness: the interference part of each criterion is
// evaluated exactly, the power-mapping part only at sampled resolution.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mimoee/best_response.hpp"
#include "mimoee/game_model.hpp"
#include "mimoee/parallel.hpp"
#include "mimoee/random.hpp"

namespace mimoee {

enum class InterferenceVariant { exact_square, pseudoinverse_rowrank, sampled_columnrank };

std::string to_string(InterferenceVariant v);

/// Nonnegative Q x Q matrix with zero diagonal.
struct InterferenceMatrix {
  RealMatrix values;
  InterferenceVariant variant = InterferenceVariant::exact_square;
  std::size_t samples = 0;   ///< sampled variant only
  bool lower_bound = false;  ///< true for the sampled variant
};

/// Entry (q, r) = sigma_max^2(H_qq^{-1} H_qr) on the reduced channels.
/// Throws SingularMatrix if a reduced direct channel is not square
/// nonsingular (use the sampled variant instead).
InterferenceMatrix interference_matrix_square(const ReducedScenario& s);

/// Entry (q, r) = sigma_max^2(pinv(H_qq) H_qr V_{r,1}) on the original
/// channels. Throws SingularMatrix if a direct channel lacks full row rank.
InterferenceMatrix interference_matrix_rowrank(const NetworkScenario& s);

/// sigma_max^2(pinv(H_qq) H_qr) without the V factor (an upper bound of the
/// row-rank entries, equal to them when H_rr is square nonsingular).
RealMatrix interference_matrix_rowrank_unfactored(const NetworkScenario& s);

/// Monte-Carlo lower bound of the worst case of sigma_max^2(G_qr(Delta))
/// over full-power profiles Delta. Sample k uses the stream (seed, k), so a
/// larger sample count only adds samples.
InterferenceMatrix interference_matrix_sampled(const ReducedScenario& s, std::size_t n_samples,
                                               std::uint64_t seed, Exec exec = Exec::parallel);

/// G_qr(Delta) = (H_qq^H R^{-1} H_qq)^{-1} H_qq^H R^{-1} H_qr, R the MUI
/// covariance of q under Delta.
ComplexMatrix whitened_cross_gain(const ReducedScenario& s, std::size_t q, std::size_t r,
                                  const StrategyProfile& delta);

/// Square variant when all reduced direct channels are square, else sampled.
InterferenceMatrix interference_matrix(const ReducedScenario& s, std::size_t n_samples = 200,
                                       std::uint64_t seed = 0, Exec exec = Exec::parallel);

struct PowerSmoothnessConfig {
  std::size_t n_pairs = 200;
  double perturbation_fraction = 0.5;  ///< share of pairs that are small perturbations
  double perturbation_step = 1e-3;     ///< convex-combination weight for those pairs
  std::uint64_t seed = 0;
  DinkelbachConfig dinkelbach;
  std::optional<RealVector> weights;  ///< overrides the Perron weights
};

struct PowerSmoothnessEstimate {
  double max_ratio_l2 = 0.0;            ///< ||dp||_2 / ||dQ||_F
  double max_ratio_weighted_inf = 0.0;  ///< ||dp||_inf,w / ||dQ||_F,block,w
  std::size_t samples = 0;
  std::size_t skipped = 0;
};

/// Sampled lower bound of the Lipschitz modulus of the optimal-power map.
PowerSmoothnessEstimate estimate_power_smoothness(const ReducedScenario& s,
                                                  const PowerSmoothnessConfig& cfg,
                                                  const RealVector& weights,
                                                  Exec exec = Exec::parallel);

/// p_hat_q(Q_{-q}) = min(P_q, p_u) for every player.
RealVector optimal_powers(const ReducedScenario& s, const StrategyProfile& p,
                          const DinkelbachConfig& cfg);

struct CriteriaReport {
  double sr_S = 0.0;
  double sr_Ssym = 0.0;
  double sigma_max_IplusS = 0.0;
  RealVector perron_w;
  bool perron_degenerate = false;
  double qvi_rhs_constant = 0.0;          ///< (1 - sr(S^s)) / sigma_max(I + S)
  double contraction_rhs_constant = 0.0;  ///< 1 - sr(S)
  bool interference_ok_qvi = false;          ///< sr(S^s) < 1
  bool interference_ok_contraction = false;  ///< sr(S) < 1
  std::optional<PowerSmoothnessEstimate> power_smoothness;
  /// Sampled power modulus below the respective constant (only when estimated).
  std::optional<bool> power_ok_qvi;
  std::optional<bool> power_ok_contraction;
};

/// Criterion constants from an interference matrix alone.
CriteriaReport criteria(const RealMatrix& interference);

/// Same, plus the sampled power-mapping estimate when `smoothness` is set.
CriteriaReport criteria(const ReducedScenario& s, const InterferenceMatrix& interference,
                        const std::optional<PowerSmoothnessConfig>& smoothness,
                        Exec exec = Exec::parallel);

nlohmann::json to_json(const CriteriaReport& r);

/// F_q = H_qq^{-1} R_{n_q} H_qq^{-H} + sum_r H_qq^{-1} H_qr Q_r H_qr^H H_qq^{-H}
/// (the sum includes r = q). Requires square nonsingular direct channels.
std::vector<ComplexMatrix> qvi_map(const ReducedScenario& s, const StrategyProfile& p);

/// Random profile in the strategy set: each block A A^H with trace uniform in
/// [0, P_q], or exactly P_q when `full_power`.
StrategyProfile random_profile(const ReducedScenario& s, Rng& rng, bool full_power);

/// Random full-power profile with Haar eigenvectors and simplex eigenvalues.
StrategyProfile random_boundary_profile(const ReducedScenario& s, Rng& rng);

enum class LemmaStatus { pass, fail, skipped };
std::string to_string(LemmaStatus s);

struct LemmaWitness {
  std::size_t sample = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  nlohmann::json data;  ///< matrices / power vectors of the failing sample
};

struct LemmaReport {
  std::string name;
  LemmaStatus status = LemmaStatus::pass;
  std::size_t samples = 0;
  std::size_t violations = 0;
  double constant = 0.0;   ///< L, mu, or 1 depending on the lemma
  double max_ratio = 0.0;  ///< largest observed lhs/rhs-style ratio
  double min_margin = 0.0; ///< smallest (rhs - lhs) over samples
  bool precondition_met = true;
  std::string note;
  std::optional<LemmaWitness> witness;
};

nlohmann::json to_json(const LemmaReport& r);

/// Slack allowed on every sampled inequality.
inline constexpr double kLemmaSlack = 1e-9;

/// ||F(Q) - F(Q')||_F <= sigma_max(I + S) ||Q - Q'||_F over random pairs of
/// the strategy set. max_ratio is the largest ||dF|| / ||dQ|| observed.
LemmaReport verify_lipschitz(const ReducedScenario& s, std::size_t n_pairs, std::uint64_t seed,
                             Exec exec = Exec::parallel);

/// Re Tr((F(Q) - F(Q'))^H (Q - Q')) >= (1 - sr(S^s)) ||Q - Q'||_F^2 over
/// random full-power pairs. Returns `skipped` when sr(S^s) >= 1 unless
/// `enforce_precondition` is false, in which case the inequality is still
/// evaluated with the (non-positive) constant.
LemmaReport verify_monotonicity(const ReducedScenario& s, std::size_t n_pairs, std::uint64_t seed,
                                Exec exec = Exec::parallel, bool enforce_precondition = true);

/// ||[Y]_{dQ(p)} - [Y]_{dQ(p')}||_F <= ||p - p'||_2, per player and in
/// aggregate, for random Hermitian Y and power vectors in [0, P].
LemmaReport verify_power_set_smoothness(const ReducedScenario& s, std::size_t n_triples,
                                        std::uint64_t seed, Exec exec = Exec::parallel);

/// Identity channels, single-player perturbation: ||dF||_F / ||dQ||_F must
/// equal sqrt(Q) within 1e-9.
LemmaReport verify_sqrt_q_construction(std::size_t players, std::size_t antennas,
                                       std::uint64_t seed);

/// Scenario with every channel equal to the identity and unit noise.
NetworkScenario identity_channel_scenario(std::size_t players, std::size_t antennas,
                                          double max_power = 1.0);

}  // namespace mimoee
