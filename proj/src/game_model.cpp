#include "mimoee/game_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mimoee/errors.hpp"
#include "mimoee/random.hpp"

namespace mimoee {

std::string to_string(SnrConvention c) {
  return c == SnrConvention::per_stream ? "per-stream" : "total-power";
}

std::string to_string(ChannelKind k) { return k == ChannelKind::mimo ? "mimo" : "ofdm"; }

SnrConvention parse_snr_convention(const std::string& s) {
  if (s == "per-stream") return SnrConvention::per_stream;
  if (s == "total-power") return SnrConvention::total_power;
  throw InvalidInput("unknown snr_convention '" + s + "'");
}

ChannelKind parse_channel_kind(const std::string& s) {
  if (s == "mimo") return ChannelKind::mimo;
  if (s == "ofdm") return ChannelKind::ofdm;
  throw InvalidInput("unknown channel kind '" + s + "'");
}

void validate(const NetworkScenario& s) {
  const std::size_t n = s.num_players();
  if (n == 0) throw InvalidInput("scenario: no players");
  if (s.tx_antennas.size() != n || s.rx_antennas.size() != n || s.noise_cov.size() != n ||
      s.max_power.size() != n || s.circuit_power.size() != n) {
    throw InvalidInput("scenario: per-player arrays must all have Q entries");
  }
  for (std::size_t q = 0; q < n; ++q) {
    if (s.channels[q].size() != n) throw InvalidInput("scenario: H must be Q x Q");
    for (std::size_t r = 0; r < n; ++r) {
      const ComplexMatrix& h = s.channels[q][r];
      if (static_cast<std::size_t>(h.rows()) != s.rx_antennas[q] ||
          static_cast<std::size_t>(h.cols()) != s.tx_antennas[r]) {
        throw InvalidInput("scenario: H[" + std::to_string(q) + "][" + std::to_string(r) +
                           "] has the wrong shape");
      }
      require_finite(h, "scenario channel");
    }
    const ComplexMatrix& rn = s.noise_cov[q];
    if (static_cast<std::size_t>(rn.rows()) != s.rx_antennas[q] || rn.rows() != rn.cols()) {
      throw InvalidInput("scenario: Rn[" + std::to_string(q) + "] has the wrong shape");
    }
    require_finite(rn, "scenario noise covariance");
    if (!is_hermitian(rn)) throw InvalidInput("scenario: noise covariance not Hermitian");
    if (hermitian_evd(rn).eigenvalues.minCoeff() <= 0.0) {
      throw InvalidInput("scenario: noise covariance must be positive definite");
    }
    if (!(s.max_power[q] > 0.0) || !std::isfinite(s.max_power[q])) {
      throw InvalidInput("scenario: P must be positive");
    }
    if (!(s.circuit_power[q] > 0.0) || !std::isfinite(s.circuit_power[q])) {
      throw InvalidInput("scenario: Psi must be positive");
    }
  }
}

NetworkScenario generate_scenario(const ScenarioParams& params) {
  const std::size_t nq = params.players;
  const std::size_t na = params.antennas;
  if (nq == 0 || na == 0) throw InvalidInput("generate_scenario: Q and n must be >= 1");
  const double power = params.max_power.value_or(static_cast<double>(na));
  if (!(power > 0.0)) throw InvalidInput("generate_scenario: P must be positive");
  if (!(params.circuit_power > 0.0)) throw InvalidInput("generate_scenario: Psi must be positive");

  if (std::isnan(params.snr_db) || std::isnan(params.sir_db)) {
    throw InvalidInput("generate_scenario: SNR/SIR must not be NaN");
  }
  if (params.sir_db == -std::numeric_limits<double>::infinity() && nq > 1) {
    throw InvalidInput("generate_scenario: SIR of -inf dB gives unbounded interference");
  }
  const double snr = std::pow(10.0, params.snr_db / 10.0);
  if (!(snr > 0.0) || !std::isfinite(snr)) {
    throw InvalidInput("generate_scenario: SNR must be finite");
  }
  const double sir = std::pow(10.0, params.sir_db / 10.0);
  double cross_variance = 0.0;
  if (nq > 1 && std::isfinite(sir)) {
    cross_variance = 1.0 / (static_cast<double>(nq - 1) * sir);
  }
  const double noise_power = params.snr_convention == SnrConvention::per_stream
                                 ? (power / static_cast<double>(na)) / snr
                                 : power / snr;

  NetworkScenario s;
  s.tx_antennas.assign(nq, na);
  s.rx_antennas.assign(nq, na);
  s.max_power.assign(nq, power);
  s.circuit_power.assign(nq, params.circuit_power);
  s.seed = params.seed;
  s.meta.snr_db = params.snr_db;
  s.meta.sir_db = params.sir_db;
  s.meta.snr_convention = params.snr_convention;
  s.meta.channel = params.channel;
  s.meta.sir_ignored = nq == 1 && std::isfinite(params.sir_db);

  const auto n = static_cast<Eigen::Index>(na);
  s.channels.assign(nq, std::vector<ComplexMatrix>(nq));
  for (std::size_t q = 0; q < nq; ++q) {
    for (std::size_t r = 0; r < nq; ++r) {
      const double variance = q == r ? 1.0 : cross_variance;
      // Draw at unit variance and scale, so the underlying realization of a
      // link does not depend on Q or the SIR.
      Rng rng = make_rng(params.seed, {0x48ULL, q, r});
      ComplexMatrix h;
      if (params.channel == ChannelKind::ofdm) {
        h = ComplexMatrix::Zero(n, n);
        h.diagonal() = complex_gaussian(rng, n, 1, 1.0);
      } else {
        h = complex_gaussian(rng, n, n, 1.0);
      }
      s.channels[q][r] = std::sqrt(variance) * h;
    }
    s.noise_cov.push_back(noise_power * ComplexMatrix::Identity(n, n));
  }
  return s;
}

bool ReducedScenario::square_direct_channels() const {
  for (std::size_t q = 0; q < num_players(); ++q) {
    if (channels[q][q].rows() != channels[q][q].cols()) return false;
  }
  return true;
}

ReducedScenario reduce(const NetworkScenario& s) {
  validate(s);
  const std::size_t nq = s.num_players();
  ReducedScenario out;
  out.noise_cov = s.noise_cov;
  out.max_power = s.max_power;
  out.circuit_power = s.circuit_power;
  out.ranks.resize(nq);
  out.v1.resize(nq);
  for (std::size_t q = 0; q < nq; ++q) {
    const ComplexMatrix& direct = s.channels[q][q];
    const CompactSvd svd = compact_svd(direct);
    if (svd.rank == 0) {
      throw SingularMatrix("reduce: direct channel of player " + std::to_string(q) +
                           " is zero");
    }
    out.ranks[q] = svd.rank;
    if (svd.rank == static_cast<std::size_t>(direct.cols())) {
      // Full column rank: the identity already spans the row space.
      out.v1[q] = ComplexMatrix::Identity(direct.cols(), direct.cols());
    } else {
      out.v1[q] = svd.v;
    }
  }
  out.channels.assign(nq, std::vector<ComplexMatrix>(nq));
  for (std::size_t q = 0; q < nq; ++q) {
    for (std::size_t r = 0; r < nq; ++r) out.channels[q][r] = s.channels[q][r] * out.v1[r];
  }
  return out;
}

StrategyProfile uniform_profile(const ReducedScenario& s) {
  StrategyProfile p;
  for (std::size_t q = 0; q < s.num_players(); ++q) {
    const auto r = static_cast<Eigen::Index>(s.ranks[q]);
    p.blocks.push_back((s.max_power[q] / static_cast<double>(r)) *
                       ComplexMatrix::Identity(r, r));
  }
  return p;
}

StrategyProfile zero_profile(const ReducedScenario& s) {
  StrategyProfile p;
  for (std::size_t q = 0; q < s.num_players(); ++q) {
    const auto r = static_cast<Eigen::Index>(s.ranks[q]);
    p.blocks.push_back(ComplexMatrix::Zero(r, r));
  }
  return p;
}

void validate_profile(const ReducedScenario& s, const StrategyProfile& p, double tol) {
  if (p.size() != s.num_players()) throw InvalidInput("profile: wrong number of blocks");
  for (std::size_t q = 0; q < p.size(); ++q) {
    const ComplexMatrix& b = p[q];
    const auto r = static_cast<Eigen::Index>(s.ranks[q]);
    if (b.rows() != r || b.cols() != r) throw InvalidInput("profile: block has wrong size");
    require_finite(b, "profile block");
    if (!is_hermitian(b, tol)) throw InvalidInput("profile: block is not Hermitian");
    const HermitianEvd evd = hermitian_evd(b);
    if (evd.eigenvalues.minCoeff() < -tol) throw InvalidInput("profile: block is not PSD");
    if (b.trace().real() > s.max_power[q] + tol) {
      throw InvalidInput("profile: block exceeds the power budget");
    }
  }
}

bool is_feasible(const ReducedScenario& s, const StrategyProfile& p, double tol) {
  try {
    validate_profile(s, p, tol);
  } catch (const InvalidInput&) {
    return false;
  }
  return true;
}

ComplexMatrix mui_covariance(const ReducedScenario& s, std::size_t q, const StrategyProfile& p) {
  ComplexMatrix r = s.noise_cov[q];
  for (std::size_t o = 0; o < s.num_players(); ++o) {
    if (o == q) continue;
    const ComplexMatrix& h = s.channels[q][o];
    r.noalias() += h * p[o] * h.adjoint();
  }
  return hermitian_part(r);
}

ComplexMatrix whitened_gram_from_mui(const ComplexMatrix& direct, const ComplexMatrix& mui) {
  Eigen::LLT<ComplexMatrix> llt(mui);
  if (llt.info() != Eigen::Success) {
    throw SingularMatrix("whitened_gram: MUI-plus-noise covariance is not positive definite");
  }
  // L^{-1} H, so that H^H R^{-1} H = (L^{-1} H)^H (L^{-1} H).
  const ComplexMatrix w = llt.matrixL().solve(direct);
  if (!w.allFinite()) throw SingularMatrix("whitened_gram: singular MUI covariance");
  return hermitian_part(w.adjoint() * w);
}

ComplexMatrix whitened_gram(const ReducedScenario& s, std::size_t q, const StrategyProfile& p) {
  return whitened_gram_from_mui(s.channels[q][q], mui_covariance(s, q, p));
}

double log_det_rate(const ComplexMatrix& gram, const ComplexMatrix& cov) {
  // det(I + G Q) = det(I + Q^{1/2} G Q^{1/2}); the symmetrized product is
  // Hermitian PSD, so its eigenvalues are real and nonnegative.
  const HermitianEvd qe = hermitian_evd(hermitian_part(cov));
  const RealVector root = qe.eigenvalues.cwiseMax(0.0).cwiseSqrt();
  const ComplexMatrix half = qe.eigenvectors * root.asDiagonal() * qe.eigenvectors.adjoint();
  const ComplexMatrix sym = hermitian_part(half * gram * half);
  const HermitianEvd se = hermitian_evd(sym);
  double total = 0.0;
  for (Eigen::Index k = 0; k < se.eigenvalues.size(); ++k) {
    total += std::log1p(std::max(0.0, se.eigenvalues[k]));
  }
  return total;
}

double rate(const ReducedScenario& s, std::size_t q, const StrategyProfile& p) {
  return log_det_rate(whitened_gram(s, q, p), p[q]);
}

double energy_efficiency(const ReducedScenario& s, std::size_t q, const StrategyProfile& p) {
  return rate(s, q, p) / (s.circuit_power[q] + p[q].trace().real());
}

std::vector<double> block_distances(const StrategyProfile& a, const StrategyProfile& b) {
  if (a.size() != b.size()) throw InvalidInput("block_distances: profile sizes differ");
  std::vector<double> d(a.size());
  for (std::size_t q = 0; q < a.size(); ++q) d[q] = (a[q] - b[q]).norm();
  return d;
}

double block_max_distance(const StrategyProfile& a, const StrategyProfile& b,
                          const RealVector& weights) {
  const std::vector<double> d = block_distances(a, b);
  if (static_cast<std::size_t>(weights.size()) != d.size()) {
    throw InvalidInput("block_max_distance: weight vector has the wrong size");
  }
  double m = 0.0;
  for (std::size_t q = 0; q < d.size(); ++q) {
    m = std::max(m, d[q] / weights[static_cast<Eigen::Index>(q)]);
  }
  return m;
}

double frobenius_distance(const StrategyProfile& a, const StrategyProfile& b) {
  double s = 0.0;
  for (const double d : block_distances(a, b)) s += d * d;
  return std::sqrt(s);
}

}  // namespace mimoee
