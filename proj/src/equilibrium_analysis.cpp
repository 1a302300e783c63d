#include "mimoee/equilibrium_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mimoee/errors.hpp"
#include "mimoee/scenario_io.hpp"

namespace mimoee {

using nlohmann::json;

namespace {

ComplexMatrix square_inverse(const ComplexMatrix& h, std::size_t q) {
  if (h.rows() != h.cols()) {
    throw SingularMatrix("direct channel of player " + std::to_string(q) +
                         " is not square; use the sampled interference matrix");
  }
  const CompactSvd svd = compact_svd(h);
  if (svd.rank != static_cast<std::size_t>(h.rows())) {
    throw SingularMatrix("direct channel of player " + std::to_string(q) + " is singular");
  }
  return svd.v * svd.sigma.cwiseInverse().asDiagonal() * svd.u.adjoint();
}

void require_square_channels(const ReducedScenario& s) {
  for (std::size_t q = 0; q < s.num_players(); ++q) square_inverse(s.channels[q][q], q);
}

json profile_pair_json(const StrategyProfile& a, const StrategyProfile& b) {
  return json{{"Q", profile_to_json(a)}, {"Q_prime", profile_to_json(b)}};
}

double inner_product(const std::vector<ComplexMatrix>& a, const std::vector<ComplexMatrix>& b) {
  double s = 0.0;
  for (std::size_t q = 0; q < a.size(); ++q) s += (a[q].adjoint() * b[q]).trace().real();
  return s;
}

double stacked_norm(const std::vector<ComplexMatrix>& a) {
  double s = 0.0;
  for (const auto& m : a) s += m.squaredNorm();
  return std::sqrt(s);
}

std::vector<ComplexMatrix> difference(const std::vector<ComplexMatrix>& a,
                                      const std::vector<ComplexMatrix>& b) {
  std::vector<ComplexMatrix> d(a.size());
  for (std::size_t q = 0; q < a.size(); ++q) d[q] = a[q] - b[q];
  return d;
}

// One sampled inequality lhs <= rhs (with slack) per entry.
struct SampleOutcome {
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  json data;
};

void fold_outcomes(LemmaReport& report, const std::vector<SampleOutcome>& outcomes) {
  report.samples = outcomes.size();
  report.min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const SampleOutcome& o = outcomes[i];
    report.max_ratio = std::max(report.max_ratio, o.ratio);
    report.min_margin = std::min(report.min_margin, o.rhs - o.lhs);
    if (o.lhs > o.rhs + kLemmaSlack) {
      ++report.violations;
      if (!report.witness) report.witness = LemmaWitness{i, o.lhs, o.rhs, o.data};
    }
  }
  if (outcomes.empty()) report.min_margin = 0.0;
  report.status = report.violations == 0 ? LemmaStatus::pass : LemmaStatus::fail;
}

}  // namespace

std::string to_string(InterferenceVariant v) {
  switch (v) {
    case InterferenceVariant::exact_square:
      return "exact-square";
    case InterferenceVariant::pseudoinverse_rowrank:
      return "pseudoinverse-rowrank";
    case InterferenceVariant::sampled_columnrank:
      return "sampled-columnrank";
  }
  return "unknown";
}

std::string to_string(LemmaStatus s) {
  switch (s) {
    case LemmaStatus::pass:
      return "pass";
    case LemmaStatus::fail:
      return "fail";
    case LemmaStatus::skipped:
      return "skipped";
  }
  return "unknown";
}

InterferenceMatrix interference_matrix_square(const ReducedScenario& s) {
  const std::size_t nq = s.num_players();
  InterferenceMatrix out;
  out.variant = InterferenceVariant::exact_square;
  out.values = RealMatrix::Zero(static_cast<Eigen::Index>(nq), static_cast<Eigen::Index>(nq));
  for (std::size_t q = 0; q < nq; ++q) {
    const ComplexMatrix inv = square_inverse(s.channels[q][q], q);
    for (std::size_t r = 0; r < nq; ++r) {
      if (r == q) continue;
      const double sm = sigma_max(inv * s.channels[q][r]);
      out.values(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(r)) = sm * sm;
    }
  }
  return out;
}

namespace {

RealMatrix rowrank_entries(const NetworkScenario& s, bool with_v_factor) {
  validate(s);
  const std::size_t nq = s.num_players();
  std::vector<ComplexMatrix> pinv(nq);
  std::vector<ComplexMatrix> v1(nq);
  for (std::size_t q = 0; q < nq; ++q) {
    const ComplexMatrix& h = s.channels[q][q];
    const CompactSvd svd = compact_svd(h);
    if (svd.rank != static_cast<std::size_t>(h.rows())) {
      throw SingularMatrix("direct channel of player " + std::to_string(q) +
                           " is not full row rank");
    }
    pinv[q] = svd.v * svd.sigma.cwiseInverse().asDiagonal() * svd.u.adjoint();
    v1[q] = svd.v;
  }
  RealMatrix out = RealMatrix::Zero(static_cast<Eigen::Index>(nq), static_cast<Eigen::Index>(nq));
  for (std::size_t q = 0; q < nq; ++q) {
    for (std::size_t r = 0; r < nq; ++r) {
      if (r == q) continue;
      const ComplexMatrix g = with_v_factor ? ComplexMatrix(pinv[q] * s.channels[q][r] * v1[r])
                                            : ComplexMatrix(pinv[q] * s.channels[q][r]);
      const double sm = sigma_max(g);
      out(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(r)) = sm * sm;
    }
  }
  return out;
}

}  // namespace

InterferenceMatrix interference_matrix_rowrank(const NetworkScenario& s) {
  InterferenceMatrix out;
  out.variant = InterferenceVariant::pseudoinverse_rowrank;
  out.values = rowrank_entries(s, true);
  return out;
}

RealMatrix interference_matrix_rowrank_unfactored(const NetworkScenario& s) {
  return rowrank_entries(s, false);
}

ComplexMatrix whitened_cross_gain(const ReducedScenario& s, std::size_t q, std::size_t r,
                                  const StrategyProfile& delta) {
  const ComplexMatrix mui = mui_covariance(s, q, delta);
  Eigen::LLT<ComplexMatrix> llt(mui);
  if (llt.info() != Eigen::Success) {
    throw SingularMatrix("whitened_cross_gain: MUI covariance is not positive definite");
  }
  const ComplexMatrix wd = llt.matrixL().solve(s.channels[q][q]);
  const ComplexMatrix wc = llt.matrixL().solve(s.channels[q][r]);
  const ComplexMatrix gram = hermitian_part(wd.adjoint() * wd);
  Eigen::LLT<ComplexMatrix> gram_llt(gram);
  if (gram_llt.info() != Eigen::Success) {
    throw SingularMatrix("whitened_cross_gain: direct channel is not full column rank");
  }
  return gram_llt.solve(ComplexMatrix(wd.adjoint() * wc));
}

StrategyProfile random_boundary_profile(const ReducedScenario& s, Rng& rng) {
  StrategyProfile p;
  for (std::size_t q = 0; q < s.num_players(); ++q) {
    const auto r = static_cast<Eigen::Index>(s.ranks[q]);
    const ComplexMatrix u = haar_unitary(rng, r);
    const RealVector eig = simplex_point(rng, r, s.max_power[q]);
    p.blocks.push_back(hermitian_part(u * eig.asDiagonal() * u.adjoint()));
  }
  return p;
}

StrategyProfile random_profile(const ReducedScenario& s, Rng& rng, bool full_power) {
  StrategyProfile p;
  for (std::size_t q = 0; q < s.num_players(); ++q) {
    const auto r = static_cast<Eigen::Index>(s.ranks[q]);
    const double trace = full_power ? s.max_power[q] : s.max_power[q] * uniform01(rng);
    p.blocks.push_back(random_psd_with_trace(rng, r, trace));
  }
  return p;
}

InterferenceMatrix interference_matrix_sampled(const ReducedScenario& s, std::size_t n_samples,
                                               std::uint64_t seed, Exec exec) {
  if (n_samples == 0) throw InvalidInput("interference_matrix_sampled: n_samples must be >= 1");
  const std::size_t nq = s.num_players();
  const auto dim = static_cast<Eigen::Index>(nq);

  const std::vector<RealMatrix> per_sample =
      map_indices<RealMatrix>(n_samples, exec, [&](std::size_t k) {
        Rng rng = make_rng(seed, {0x53ULL, k});
        const StrategyProfile delta = random_boundary_profile(s, rng);
        RealMatrix m = RealMatrix::Zero(dim, dim);
        for (std::size_t q = 0; q < nq; ++q) {
          for (std::size_t r = 0; r < nq; ++r) {
            if (r == q) continue;
            const double sm = sigma_max(whitened_cross_gain(s, q, r, delta));
            m(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(r)) = sm * sm;
          }
        }
        return m;
      });

  InterferenceMatrix out;
  out.variant = InterferenceVariant::sampled_columnrank;
  out.samples = n_samples;
  out.lower_bound = true;
  out.values = RealMatrix::Zero(dim, dim);
  for (const RealMatrix& m : per_sample) out.values = out.values.cwiseMax(m);
  return out;
}

InterferenceMatrix interference_matrix(const ReducedScenario& s, std::size_t n_samples,
                                       std::uint64_t seed, Exec exec) {
  if (s.square_direct_channels()) return interference_matrix_square(s);
  return interference_matrix_sampled(s, n_samples, seed, exec);
}

RealVector optimal_powers(const ReducedScenario& s, const StrategyProfile& p,
                          const DinkelbachConfig& cfg) {
  RealVector out(static_cast<Eigen::Index>(s.num_players()));
  for (std::size_t q = 0; q < s.num_players(); ++q) {
    const DinkelbachResult dk = dinkelbach_power(s, q, p, cfg);
    out[static_cast<Eigen::Index>(q)] = std::min(s.max_power[q], dk.power);
  }
  return out;
}

PowerSmoothnessEstimate estimate_power_smoothness(const ReducedScenario& s,
                                                  const PowerSmoothnessConfig& cfg,
                                                  const RealVector& weights, Exec exec) {
  const std::size_t nq = s.num_players();
  if (static_cast<std::size_t>(weights.size()) != nq) {
    throw InvalidInput("estimate_power_smoothness: weight vector has the wrong size");
  }
  const RealVector w = floored_weights(weights);
  const auto n_perturbed = static_cast<std::size_t>(
      std::llround(cfg.perturbation_fraction * static_cast<double>(cfg.n_pairs)));

  struct PairRatio {
    bool ok = false;
    double l2 = 0.0;
    double weighted = 0.0;
  };
  const std::vector<PairRatio> ratios =
      map_indices<PairRatio>(cfg.n_pairs, exec, [&](std::size_t i) {
        Rng rng = make_rng(cfg.seed, {0x50ULL, i});
        const StrategyProfile a = random_profile(s, rng, false);
        StrategyProfile b = random_profile(s, rng, false);
        if (i < n_perturbed) {
          for (std::size_t q = 0; q < nq; ++q) {
            b[q] = (1.0 - cfg.perturbation_step) * a[q] + cfg.perturbation_step * b[q];
          }
        }
        PairRatio out;
        RealVector pa;
        RealVector pb;
        try {
          pa = optimal_powers(s, a, cfg.dinkelbach);
          pb = optimal_powers(s, b, cfg.dinkelbach);
        } catch (const NonConvergence&) {
          return out;
        }
        const double dq = frobenius_distance(a, b);
        const double dq_block = block_max_distance(a, b, w);
        if (!(dq > 0.0) || !(dq_block > 0.0)) return out;
        out.ok = true;
        out.l2 = (pa - pb).norm() / dq;
        out.weighted = (pa - pb).cwiseAbs().cwiseQuotient(w).maxCoeff() / dq_block;
        return out;
      });

  PowerSmoothnessEstimate est;
  for (const PairRatio& r : ratios) {
    if (!r.ok) {
      ++est.skipped;
      continue;
    }
    ++est.samples;
    est.max_ratio_l2 = std::max(est.max_ratio_l2, r.l2);
    est.max_ratio_weighted_inf = std::max(est.max_ratio_weighted_inf, r.weighted);
  }
  return est;
}

CriteriaReport criteria(const RealMatrix& interference) {
  if (interference.rows() != interference.cols() || interference.rows() == 0) {
    throw InvalidInput("criteria: interference matrix must be square and non-empty");
  }
  if (interference.minCoeff() < 0.0) throw InvalidInput("criteria: negative interference entry");

  CriteriaReport r;
  const PerronResult perron = spectral_radius(interference);
  r.sr_S = perron.spectral_radius;
  r.perron_w = perron.vector;
  r.perron_degenerate = perron.degenerate;
  // S^s is symmetric nonnegative, so its spectral radius is its top eigenvalue.
  r.sr_Ssym = std::max(0.0, max_symmetric_eigenvalue(interference));
  const RealMatrix shifted =
      RealMatrix::Identity(interference.rows(), interference.cols()) + interference;
  Eigen::JacobiSVD<RealMatrix> svd(shifted);
  r.sigma_max_IplusS = svd.singularValues()[0];
  r.qvi_rhs_constant = (1.0 - r.sr_Ssym) / r.sigma_max_IplusS;
  r.contraction_rhs_constant = 1.0 - r.sr_S;
  r.interference_ok_qvi = r.sr_Ssym < 1.0;
  r.interference_ok_contraction = r.sr_S < 1.0;
  return r;
}

CriteriaReport criteria(const ReducedScenario& s, const InterferenceMatrix& interference,
                        const std::optional<PowerSmoothnessConfig>& smoothness, Exec exec) {
  CriteriaReport r = criteria(interference.values);
  if (smoothness) {
    const RealVector w = smoothness->weights.value_or(r.perron_w);
    r.power_smoothness = estimate_power_smoothness(s, *smoothness, w, exec);
    r.power_ok_qvi = r.power_smoothness->max_ratio_l2 < r.qvi_rhs_constant;
    r.power_ok_contraction =
        r.power_smoothness->max_ratio_weighted_inf < r.contraction_rhs_constant;
  }
  return r;
}

json to_json(const CriteriaReport& r) {
  json j{{"sr_S", r.sr_S},
         {"sr_Ssym", r.sr_Ssym},
         {"sigma_max_IplusS", r.sigma_max_IplusS},
         {"perron_w", vector_to_json(r.perron_w)},
         {"perron_degenerate", r.perron_degenerate},
         {"qvi_rhs_constant", r.qvi_rhs_constant},
         {"contraction_rhs_constant", r.contraction_rhs_constant},
         {"interference_ok_qvi", r.interference_ok_qvi},
         {"interference_ok_contraction", r.interference_ok_contraction}};
  if (r.power_smoothness) {
    j["power_smoothness"] = {{"max_ratio_l2", r.power_smoothness->max_ratio_l2},
                             {"max_ratio_weighted_inf", r.power_smoothness->max_ratio_weighted_inf},
                             {"samples", r.power_smoothness->samples},
                             {"skipped", r.power_smoothness->skipped},
                             {"lower_bound", true}};
    j["power_ok_qvi"] = *r.power_ok_qvi;
    j["power_ok_contraction"] = *r.power_ok_contraction;
  }
  return j;
}

std::vector<ComplexMatrix> qvi_map(const ReducedScenario& s, const StrategyProfile& p) {
  const std::size_t nq = s.num_players();
  if (p.size() != nq) throw InvalidInput("qvi_map: profile size mismatch");
  std::vector<ComplexMatrix> out(nq);
  for (std::size_t q = 0; q < nq; ++q) {
    const ComplexMatrix inv = square_inverse(s.channels[q][q], q);
    ComplexMatrix f = inv * s.noise_cov[q] * inv.adjoint();
    for (std::size_t r = 0; r < nq; ++r) {
      const ComplexMatrix g = inv * s.channels[q][r];
      f.noalias() += g * p[r] * g.adjoint();
    }
    out[q] = hermitian_part(f);
  }
  return out;
}

LemmaReport verify_lipschitz(const ReducedScenario& s, std::size_t n_pairs, std::uint64_t seed,
                             Exec exec) {
  require_square_channels(s);
  LemmaReport report;
  report.name = "lipschitz";
  report.constant = criteria(interference_matrix_square(s).values).sigma_max_IplusS;
  const double lipschitz = report.constant;

  const std::vector<SampleOutcome> outcomes =
      map_indices<SampleOutcome>(n_pairs, exec, [&](std::size_t i) {
        Rng rng = make_rng(seed, {0x4cULL, i});
        const StrategyProfile a = random_profile(s, rng, false);
        const StrategyProfile b = random_profile(s, rng, false);
        const double df = stacked_norm(difference(qvi_map(s, a), qvi_map(s, b)));
        const double dq = frobenius_distance(a, b);
        SampleOutcome o;
        o.lhs = df;
        o.rhs = lipschitz * dq;
        o.ratio = dq > 0.0 ? df / dq : 0.0;
        if (o.lhs > o.rhs + kLemmaSlack) o.data = profile_pair_json(a, b);
        return o;
      });
  fold_outcomes(report, outcomes);
  return report;
}

LemmaReport verify_monotonicity(const ReducedScenario& s, std::size_t n_pairs, std::uint64_t seed,
                                Exec exec, bool enforce_precondition) {
  require_square_channels(s);
  LemmaReport report;
  report.name = "strong_monotonicity";
  const CriteriaReport cr = criteria(interference_matrix_square(s).values);
  report.constant = 1.0 - cr.sr_Ssym;
  report.precondition_met = cr.sr_Ssym < 1.0;
  if (!report.precondition_met) {
    report.note = "sr(S^s) >= 1: strong monotonicity is not implied";
    if (enforce_precondition) {
      report.status = LemmaStatus::skipped;
      return report;
    }
    report.note += "; inequality evaluated with the non-positive constant";
  }
  const double mu = report.constant;

  const std::vector<SampleOutcome> outcomes =
      map_indices<SampleOutcome>(n_pairs, exec, [&](std::size_t i) {
        Rng rng = make_rng(seed, {0x4dULL, i});
        const StrategyProfile a = random_profile(s, rng, true);
        const StrategyProfile b = random_profile(s, rng, true);
        std::vector<ComplexMatrix> dq(a.size());
        for (std::size_t q = 0; q < a.size(); ++q) dq[q] = a[q] - b[q];
        const double ip = inner_product(difference(qvi_map(s, a), qvi_map(s, b)), dq);
        const double dq2 = stacked_norm(dq) * stacked_norm(dq);
        // Inequality mu ||dQ||^2 <= <dF, dQ>, written as lhs <= rhs.
        SampleOutcome o;
        o.lhs = mu * dq2;
        o.rhs = ip;
        o.ratio = dq2 > 0.0 ? ip / dq2 : 0.0;
        if (o.lhs > o.rhs + kLemmaSlack) o.data = profile_pair_json(a, b);
        return o;
      });
  fold_outcomes(report, outcomes);
  // For this lemma max_ratio is reported as the smallest observed <dF,dQ>/||dQ||^2.
  report.max_ratio = std::numeric_limits<double>::infinity();
  for (const auto& o : outcomes) report.max_ratio = std::min(report.max_ratio, o.ratio);
  if (outcomes.empty()) report.max_ratio = 0.0;
  report.note += report.note.empty() ? "" : "; ";
  report.note += "max_ratio holds the minimum observed <dF,dQ>/||dQ||^2";
  return report;
}

LemmaReport verify_power_set_smoothness(const ReducedScenario& s, std::size_t n_triples,
                                        std::uint64_t seed, Exec exec) {
  const std::size_t nq = s.num_players();
  LemmaReport report;
  report.name = "power_set_smoothness";
  report.constant = 1.0;

  // Each triple contributes Q per-player inequalities and one aggregate one;
  // the outcome keeps the worst of them.
  const std::vector<SampleOutcome> outcomes =
      map_indices<SampleOutcome>(n_triples, exec, [&](std::size_t i) {
        Rng rng = make_rng(seed, {0x59ULL, i});
        SampleOutcome worst;
        double worst_margin = std::numeric_limits<double>::infinity();
        double total_proj = 0.0;
        double total_power = 0.0;
        json players = json::array();
        for (std::size_t q = 0; q < nq; ++q) {
          const auto r = static_cast<Eigen::Index>(s.ranks[q]);
          const ComplexMatrix y = s.max_power[q] * random_hermitian(rng, r);
          const double pa = s.max_power[q] * uniform01(rng);
          const double pb = s.max_power[q] * uniform01(rng);
          const double d = (psd_trace_projection(y, pa) - psd_trace_projection(y, pb)).norm();
          const double dp = std::abs(pa - pb);
          total_proj += d * d;
          total_power += dp * dp;
          if (dp - d < worst_margin) {
            worst_margin = dp - d;
            worst.lhs = d;
            worst.rhs = dp;
            worst.ratio = dp > 0.0 ? d / dp : 0.0;
          }
          players.push_back({{"Y", matrix_to_json(y)}, {"p", pa}, {"p_prime", pb}});
        }
        const double agg_lhs = std::sqrt(total_proj);
        const double agg_rhs = std::sqrt(total_power);
        if (agg_rhs - agg_lhs < worst_margin) {
          worst.lhs = agg_lhs;
          worst.rhs = agg_rhs;
          worst.ratio = agg_rhs > 0.0 ? agg_lhs / agg_rhs : 0.0;
        }
        if (worst.lhs > worst.rhs + kLemmaSlack) worst.data = std::move(players);
        return worst;
      });
  fold_outcomes(report, outcomes);
  return report;
}

NetworkScenario identity_channel_scenario(std::size_t players, std::size_t antennas,
                                          double max_power) {
  const auto n = static_cast<Eigen::Index>(antennas);
  NetworkScenario s;
  s.tx_antennas.assign(players, antennas);
  s.rx_antennas.assign(players, antennas);
  s.channels.assign(players, std::vector<ComplexMatrix>(players, ComplexMatrix::Identity(n, n)));
  s.noise_cov.assign(players, ComplexMatrix::Identity(n, n));
  s.max_power.assign(players, max_power);
  s.circuit_power.assign(players, 1.0);
  return s;
}

LemmaReport verify_sqrt_q_construction(std::size_t players, std::size_t antennas,
                                       std::uint64_t seed) {
  const ReducedScenario s = reduce(identity_channel_scenario(players, antennas));
  Rng rng = make_rng(seed, {0x51ULL, players});
  const StrategyProfile a = random_profile(s, rng, false);
  StrategyProfile b = a;
  const std::size_t changed = players / 2;
  b[changed] = random_psd_with_trace(rng, static_cast<Eigen::Index>(antennas),
                                     s.max_power[changed] * uniform01(rng));

  const double df = stacked_norm(difference(qvi_map(s, a), qvi_map(s, b)));
  const double dq = frobenius_distance(a, b);
  const double expected = std::sqrt(static_cast<double>(players));

  LemmaReport report;
  report.name = "sqrt_q_lower_bound";
  report.samples = 1;
  report.constant = expected;
  report.max_ratio = df / dq;
  report.min_margin = -std::abs(report.max_ratio - expected);
  if (std::abs(report.max_ratio - expected) > 1e-9) {
    report.violations = 1;
    report.status = LemmaStatus::fail;
    report.witness = LemmaWitness{0, report.max_ratio, expected, profile_pair_json(a, b)};
  }
  report.note = "Q=" + std::to_string(players) + ", perturbed player " + std::to_string(changed);
  return report;
}

json to_json(const LemmaReport& r) {
  json j{{"name", r.name},
         {"status", to_string(r.status)},
         {"samples", r.samples},
         {"violations", r.violations},
         {"constant", r.constant},
         {"max_ratio", r.max_ratio},
         {"min_margin", r.min_margin},
         {"precondition_met", r.precondition_met},
         {"slack", kLemmaSlack}};
  if (!r.note.empty()) j["note"] = r.note;
  if (r.witness) {
    j["witness"] = {{"sample", r.witness->sample},
                    {"lhs", r.witness->lhs},
                    {"rhs", r.witness->rhs},
                    {"data", r.witness->data}};
  }
  return j;
}

}  // namespace mimoee
