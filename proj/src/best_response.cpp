#include "mimoee/best_response.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mimoee/errors.hpp"

namespace mimoee {

namespace {

double rate_on_gains(const RealVector& gains, const RealVector& powers) {
  double r = 0.0;
  for (Eigen::Index k = 0; k < gains.size(); ++k) r += std::log1p(gains[k] * powers[k]);
  return r;
}

void require_positive_gains(const RealVector& gains) {
  if (gains.size() == 0) throw InvalidInput("best response: no eigenchannels");
  if (!(gains.minCoeff() > 0.0)) {
    throw SingularMatrix("best response: whitened gram is not positive definite");
  }
}

}  // namespace

void validate(const DinkelbachConfig& cfg) {
  if (!(cfg.epsilon > 0.0)) throw InvalidInput("dinkelbach: epsilon must be > 0");
  if (cfg.max_iters == 0) throw InvalidInput("dinkelbach: max_iters must be >= 1");
}

RealVector powers_at_level(const RealVector& gains, double level) {
  return (level - gains.cwiseInverse().array()).cwiseMax(0.0).matrix();
}

DinkelbachResult dinkelbach_on_gains(const RealVector& gains, double budget,
                                     double circuit_power, const DinkelbachConfig& cfg) {
  validate(cfg);
  require_positive_gains(gains);
  if (!(circuit_power > 0.0)) throw InvalidInput("dinkelbach: circuit power must be > 0");

  const Eigen::Index r = gains.size();
  // Every iterate is diagonal in the eigenbasis of the whitened gram (the
  // uniform start is diagonal in any basis), so the iteration runs on the
  // per-eigenchannel powers.
  RealVector powers = cfg.init == DinkelbachInit::uniform_full_budget
                          ? RealVector::Constant(r, budget / static_cast<double>(r))
                          : RealVector::Constant(r, 1.0);

  DinkelbachResult out;
  double delta = 2.0 * cfg.epsilon;
  while (delta > cfg.epsilon) {
    if (out.iterations >= cfg.max_iters) {
      throw NonConvergence("dinkelbach: no convergence within max_iters", delta,
                           out.iterations);
    }
    const double ratio = rate_on_gains(gains, powers) / (powers.sum() + circuit_power);
    if (!(ratio > 0.0)) {
      out.degenerate = true;
      out.power = 0.0;
      out.last_delta = delta;
      return out;
    }
    if (!out.ratios.empty() && ratio < out.ratios.back() - 1e-12 * out.ratios.back()) {
      throw std::logic_error("dinkelbach: ratio sequence decreased");
    }
    out.ratios.push_back(ratio);
    powers = powers_at_level(gains, 1.0 / ratio);
    delta = std::abs(rate_on_gains(gains, powers) - ratio * (powers.sum() + circuit_power));
    ++out.iterations;
  }
  out.power = powers.sum();
  out.last_delta = delta;
  return out;
}

DinkelbachResult dinkelbach_power(const ReducedScenario& s, std::size_t q,
                                  const StrategyProfile& p, const DinkelbachConfig& cfg) {
  const HermitianEvd evd = hermitian_evd(whitened_gram(s, q, p));
  return dinkelbach_on_gains(evd.eigenvalues, s.max_power[q], s.circuit_power[q], cfg);
}

WaterfillResult waterfill(const ComplexMatrix& u, const RealVector& gains, double power) {
  if (!(power >= 0.0)) throw InvalidInput("waterfill: power must be >= 0");
  require_positive_gains(gains);
  if (u.cols() != gains.size()) throw InvalidInput("waterfill: U and D sizes differ");

  WaterfillResult out;
  const RealVector offsets = -gains.cwiseInverse();
  out.water_level = solve_water_level(offsets, power);
  if (power == 0.0) {
    out.powers = RealVector::Zero(gains.size());
    out.cov = ComplexMatrix::Zero(u.rows(), u.rows());
    return out;
  }
  out.powers = powers_at_level(gains, out.water_level);
  out.cov = hermitian_part(u * out.powers.asDiagonal() * u.adjoint());
  return out;
}

BestResponseResult best_response_from_mui(const ReducedScenario& s, std::size_t q,
                                          const ComplexMatrix& mui,
                                          const DinkelbachConfig& cfg) {
  const HermitianEvd evd = hermitian_evd(whitened_gram_from_mui(s.channels[q][q], mui));
  const DinkelbachResult dk =
      dinkelbach_on_gains(evd.eigenvalues, s.max_power[q], s.circuit_power[q], cfg);

  BestResponseResult out;
  out.p_unconstrained = dk.power;
  out.p_hat = std::min(s.max_power[q], dk.power);
  out.dinkelbach_iters = dk.iterations;
  out.degenerate = dk.degenerate;
  const WaterfillResult wf = waterfill(evd.eigenvectors, evd.eigenvalues, out.p_hat);
  out.cov = wf.cov;
  out.water_level = wf.water_level;
  return out;
}

BestResponseResult best_response(const ReducedScenario& s, std::size_t q,
                                 const StrategyProfile& p, const DinkelbachConfig& cfg) {
  return best_response_from_mui(s, q, mui_covariance(s, q, p), cfg);
}

ComplexMatrix projection_best_response(const ReducedScenario& s, std::size_t q,
                                       const StrategyProfile& p, double p_hat) {
  if (!(p_hat >= 0.0)) throw InvalidInput("projection_best_response: p_hat must be >= 0");
  const ComplexMatrix gram = whitened_gram(s, q, p);
  const ComplexMatrix target = -hermitian_part(gram.llt().solve(
      ComplexMatrix::Identity(gram.rows(), gram.cols())));
  return psd_trace_projection(target, p_hat);
}

}  // namespace mimoee
