#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mimoee/matrix_core.hpp"

namespace mimoee {

/// How the target SNR maps to the noise power.
enum class SnrConvention {
  per_stream,   ///< sigma^2 = (P/n) / SNR: uniform allocation gives SNR per antenna
  total_power,  ///< sigma^2 = P / SNR
};

/// Channel structure used by the generator.
enum class ChannelKind {
  mimo,  ///< dense i.i.d. matrices
  ofdm,  ///< diagonal matrices (parallel subcarriers)
};

std::string to_string(SnrConvention c);
std::string to_string(ChannelKind k);
SnrConvention parse_snr_convention(const std::string& s);
ChannelKind parse_channel_kind(const std::string& s);

/// Generation parameters recorded alongside a generated scenario.
struct ScenarioMeta {
  std::optional<double> snr_db;
  std::optional<double> sir_db;
  SnrConvention snr_convention = SnrConvention::per_stream;
  ChannelKind channel = ChannelKind::mimo;
  bool sir_ignored = false;  ///< single player: no interferers to scale
};

/// Q transmitter-receiver pairs: channels[q][r] maps transmitter r to
/// receiver q and has rx_antennas[q] rows, tx_antennas[r] columns.
struct NetworkScenario {
  std::vector<std::size_t> tx_antennas;
  std::vector<std::size_t> rx_antennas;
  std::vector<std::vector<ComplexMatrix>> channels;
  std::vector<ComplexMatrix> noise_cov;
  std::vector<double> max_power;
  std::vector<double> circuit_power;
  std::uint64_t seed = 0;
  ScenarioMeta meta;

  std::size_t num_players() const { return channels.size(); }
};

/// Throws InvalidInput on shape mismatches, non-PD noise, non-positive powers.
void validate(const NetworkScenario& s);

struct ScenarioParams {
  std::size_t players = 8;
  std::size_t antennas = 4;
  double snr_db = 7.0;
  double sir_db = 0.0;            ///< +inf removes cross channels
  std::optional<double> max_power;  ///< defaults to the antenna count
  double circuit_power = 1.0;
  SnrConvention snr_convention = SnrConvention::per_stream;
  ChannelKind channel = ChannelKind::mimo;
  std::uint64_t seed = 0;
};

/// Random scenario: direct channels with unit-variance entries, cross
/// channels with variance 1 / ((Q - 1) SIR), diagonal noise set from the SNR.
/// Each channels[q][r] comes from its own stream keyed by (seed, q, r).
NetworkScenario generate_scenario(const ScenarioParams& params);

/// The reduced game: channels[q][r] = original[q][r] * v1[r], where v1[r]
/// spans the row space of the direct channel of r.
struct ReducedScenario {
  std::vector<std::size_t> ranks;
  std::vector<std::vector<ComplexMatrix>> channels;
  std::vector<ComplexMatrix> v1;
  std::vector<ComplexMatrix> noise_cov;
  std::vector<double> max_power;
  std::vector<double> circuit_power;

  std::size_t num_players() const { return channels.size(); }
  /// True when every reduced direct channel is square.
  bool square_direct_channels() const;
};

/// Rank reduction through the compact SVD of each direct channel. A direct
/// channel that already has full column rank keeps v1 = I. Throws
/// SingularMatrix if a direct channel is zero.
ReducedScenario reduce(const NetworkScenario& s);

/// One covariance block per player, each ranks[q] x ranks[q].
struct StrategyProfile {
  std::vector<ComplexMatrix> blocks;

  std::size_t size() const { return blocks.size(); }
  ComplexMatrix& operator[](std::size_t q) { return blocks[q]; }
  const ComplexMatrix& operator[](std::size_t q) const { return blocks[q]; }
};

/// (P_q / r_q) I for every player.
StrategyProfile uniform_profile(const ReducedScenario& s);
StrategyProfile zero_profile(const ReducedScenario& s);

/// Throws InvalidInput unless every block is Hermitian, PSD (eigenvalues
/// >= -tol) and has trace <= P_q + tol.
void validate_profile(const ReducedScenario& s, const StrategyProfile& p, double tol = 1e-10);
bool is_feasible(const ReducedScenario& s, const StrategyProfile& p, double tol = 1e-10);

/// R_{n_q} + sum_{r != q} H_qr Q_r H_qr^H.
ComplexMatrix mui_covariance(const ReducedScenario& s, std::size_t q, const StrategyProfile& p);

/// H_qq^H R_{-q}^{-1} H_qq for player q.
ComplexMatrix whitened_gram(const ReducedScenario& s, std::size_t q, const StrategyProfile& p);
/// Same, given the MUI-plus-noise covariance directly.
ComplexMatrix whitened_gram_from_mui(const ComplexMatrix& direct, const ComplexMatrix& mui);

/// log det(I + G Q) in nats for a positive semidefinite G and Hermitian Q.
double log_det_rate(const ComplexMatrix& gram, const ComplexMatrix& cov);

double rate(const ReducedScenario& s, std::size_t q, const StrategyProfile& p);
double energy_efficiency(const ReducedScenario& s, std::size_t q, const StrategyProfile& p);

/// Frobenius norm of every block difference.
std::vector<double> block_distances(const StrategyProfile& a, const StrategyProfile& b);
/// max_q ||a_q - b_q||_F / w_q.
double block_max_distance(const StrategyProfile& a, const StrategyProfile& b,
                          const RealVector& weights);
/// sqrt(sum_q ||a_q - b_q||_F^2).
double frobenius_distance(const StrategyProfile& a, const StrategyProfile& b);

}  // namespace mimoee
