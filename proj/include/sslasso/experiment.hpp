#pragma once

#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "sslasso/estimators.hpp"
#include "sslasso/geometry.hpp"
#include "sslasso/model.hpp"
#include "sslasso/tuning.hpp"

namespace sslasso {

// Identifiers of the verified bounds:
//   T1   transductive risk, in deviation
//   T2a  well-specified semi-supervised, empirical cone constants
//   T2b  well-specified semi-supervised, population cone constant
//   T3   mis-specified semi-supervised, empirical compatibility
//   Cor1 mis-specified semi-supervised, population spectrum only
//   T4   mis-specified semi-supervised, in expectation
enum class Theorem { T1, T2a, T2b, T3, Cor1, T4 };

inline const char* to_string(Theorem t) {
  switch (t) {
    case Theorem::T1: return "T1";
    case Theorem::T2a: return "T2a";
    case Theorem::T2b: return "T2b";
    case Theorem::T3: return "T3";
    case Theorem::Cor1: return "Cor1";
    case Theorem::T4: return "T4";
  }
  return "?";
}

inline Theorem theorem_from_string(const std::string& s) {
  if (s == "T1") return Theorem::T1;
  if (s == "T2a") return Theorem::T2a;
  if (s == "T2b") return Theorem::T2b;
  if (s == "T3") return Theorem::T3;
  if (s == "Cor1" || s == "COR1" || s == "cor1") return Theorem::Cor1;
  if (s == "T4") return Theorem::T4;
  throw InvalidInput("unknown theorem id '" + s + "'");
}

struct ExperimentConfig {
  std::string experiment;  // "T1".."T4", "Cor1", or "benefit"
  int p = 10;
  std::int64_t n = 50;
  std::int64_t total_count = 500;  // N
  int s_star = 3;
  double beta_magnitude = 1.0;
  std::string design = "identity";
  NonlinearityKind nonlinearity = NonlinearityKind::none;
  double alpha = 0.0;
  double noise_halfwidth = 0.5;
  double delta = 0.1;
  double gamma = 2.0;
  double lambda_slack = 1.0;
  int trials = 200;
  std::uint64_t master_seed = 20250808ULL;
  std::optional<EstimatorKind> variant;

  bool is_benefit() const { return experiment == "benefit"; }
  Theorem theorem() const { return theorem_from_string(experiment); }
};

// Monte Carlo sample size for mis-specified risk evaluation.
constexpr std::int64_t kRiskMcPoints = 40000;
// Two-sided 99% normal quantile used for the binomial coverage slack.
constexpr double kCoverageSlackQuantile = 2.5758293035489008;

inline double coverage_slack(double delta, int trials) {
  return kCoverageSlackQuantile *
         std::sqrt(delta * (1.0 - delta) / static_cast<double>(trials));
}

inline ModelSpec build_model(const ExperimentConfig& cfg) {
  if (cfg.p < 1) throw InvalidInput("config: p must be >= 1");
  if (cfg.s_star < 1 || cfg.s_star > cfg.p)
    throw InvalidInput("config: need 1 <= s_star <= p");
  ModelSpec model;
  model.design = DesignSpec::from_name(cfg.design, cfg.p);
  model.beta_star = Vector::Zero(cfg.p);
  for (int j = 0; j < cfg.s_star; ++j) model.beta_star[j] = cfg.beta_magnitude;
  model.nonlinearity = cfg.nonlinearity;
  model.alpha = cfg.alpha;
  model.noise_halfwidth = cfg.noise_halfwidth;
  model.validate();
  return model;
}

inline BoundInputs bound_inputs(const ExperimentConfig& cfg,
                                const ModelSpec& model) {
  BoundInputs in;
  in.feature_bound = model.feature_bound();
  in.label_bound = model.label_bound();
  in.n = cfg.n;
  in.total_count = cfg.total_count;
  in.m = cfg.total_count - cfg.n;
  in.p = cfg.p;
  in.delta = cfg.delta;
  in.gamma = cfg.gamma;
  Eigen::SelfAdjointEigenSolver<Matrix> es(
      population_covariance(model.design).matrix, Eigen::EigenvaluesOnly);
  const double bottom = es.eigenvalues().minCoeff();
  if (bottom <= 0)
    throw InvalidInput("config: the population covariance is singular");
  in.sigma_inv_norm = 1.0 / bottom;
  in.validate();
  return in;
}

inline double theorem_lambda(Theorem t, const BoundInputs& in) {
  switch (t) {
    case Theorem::T1: return lambda_transductive(in);
    case Theorem::T2a:
    case Theorem::T2b: return lambda_semisup_wellspec(in);
    case Theorem::T3:
    case Theorem::Cor1: return lambda_semisup_misspec(in);
    case Theorem::T4:
      return lambda_expectation(in.feature_bound, in.label_bound, in.n,
                                in.total_count, in.p);
  }
  throw InvalidInput("theorem_lambda: unreachable");
}

inline EstimatorKind default_variant(Theorem t) {
  return t == Theorem::T1 ? EstimatorKind::transductive
                          : EstimatorKind::semisupervised;
}

// Throws PreconditionViolation when the requested bound does not apply to the
// configured sizes, so a campaign cannot silently test an inapplicable bound.
inline void check_theorem_preconditions(Theorem t, const ExperimentConfig& cfg,
                                        const ModelSpec& model,
                                        const BoundInputs& in) {
  switch (t) {
    case Theorem::T1:
      if (in.m < 1)
        throw PreconditionViolation("T1 requires unlabeled rows (m >= 1)");
      break;
    case Theorem::T2a:
    case Theorem::T2b: {
      if (!model.well_specified())
        throw PreconditionViolation(std::string(to_string(t)) +
                                    " requires a well-specified model");
      if (t == Theorem::T2b) {
        const Matrix sigma = population_covariance(model.design).matrix;
        const auto kb = weak_compatibility(sigma, model.support(), 3.0);
        if (!wellspec_N_condition(cfg.s_star, in.feature_bound, kb.value,
                                  in.delta, in.total_count, in.p))
          throw PreconditionViolation(
              "T2b: sample-size condition 16 s* B_X^2 sqrt(2 log(4p^2/d)) <= "
              "kappa_bar sqrt(N) fails");
      }
      break;
    }
    case Theorem::T3:
    case Theorem::Cor1: {
      const auto needed = min_overall_sample(in.p, in.feature_bound,
                                             in.sigma_inv_norm, in.delta);
      if (in.total_count < needed)
        throw PreconditionViolation(
            std::string(to_string(t)) + ": N = " +
            std::to_string(in.total_count) + " below the required " +
            std::to_string(needed));
      break;
    }
    case Theorem::T4: {
      const double nd = static_cast<double>(in.total_count);
      const double needed = 18.0 * in.feature_bound * in.feature_bound *
                            in.p * in.sigma_inv_norm *
                            std::log(3.0 * in.p * nd * nd);
      if (nd < needed)
        throw PreconditionViolation("T4: N below 18 B_X^2 p ||Sigma^{-1}|| "
                                    "log(3 p N^2)");
      break;
    }
  }
}

struct Candidate {
  std::string name;
  Vector beta;
  IndexSet support;
};

// Comparison points for the oracle right-hand sides: the population vector
// on its support, its truncations to the top-k coordinates, and (for the
// deviation bounds) a least-squares refit on the support clipped to the l1
// budget B_Y^2 N / (2 n lambda).
inline std::vector<Candidate> rhs_candidates(const ModelSpec& model,
                                             const PartiallyLabeledDataset& data,
                                             double lambda, double label_bound,
                                             bool include_refit) {
  const IndexSet star = model.support();
  std::vector<Candidate> out;
  out.push_back({"beta_star", model.beta_star, star});
  for (std::size_t k = 1; k < star.size(); ++k) {
    IndexSet top(star.begin(), star.begin() + k);
    out.push_back({"beta_star_top" + std::to_string(k), model.beta_star, top});
  }
  if (include_refit) {
    const Index n = data.labeled_count();
    Matrix cols(n, static_cast<Index>(star.size()));
    for (std::size_t i = 0; i < star.size(); ++i)
      cols.col(static_cast<Index>(i)) = data.features.col(star[i]).head(n);
    const Vector fitted = cols.colPivHouseholderQr().solve(data.labels);
    Vector beta = Vector::Zero(model.dimension());
    for (std::size_t i = 0; i < star.size(); ++i)
      beta[star[i]] = fitted[static_cast<Index>(i)];
    const double budget = label_bound * label_bound *
                          static_cast<double>(data.total_count()) /
                          (2.0 * static_cast<double>(n) * lambda);
    const double l1 = beta.lpNorm<1>();
    if (l1 > budget) beta *= budget / l1;
    out.push_back({"refit", std::move(beta), star});
  }
  return out;
}

struct OracleRhsReport {
  double value = 0.0;
  std::string candidate_name;
  Vector candidate_beta;
  IndexSet candidate_support;
  double candidate_risk = 0.0;
  double candidate_risk_se = 0.0;
  double cone_constant = 0.0;
  std::string cone_description;
  std::vector<std::pair<std::string, double>> details;
};

struct OracleContext {
  const ExperimentConfig* config = nullptr;
  const ModelSpec* model = nullptr;
  const PartiallyLabeledDataset* data = nullptr;
  const BoundInputs* inputs = nullptr;
  double lambda = 0.0;
  std::vector<Candidate> candidates;
  std::uint64_t risk_seed = 0;  // base seed for candidate risk evaluation
};

// Minimum over the candidate list of the requested bound's right-hand side.
// Any candidate upper-bounds the bound's infimum, so coverage tests against
// this value are conservative.
inline OracleRhsReport oracle_rhs(Theorem t, const OracleContext& ctx) {
  const ExperimentConfig& cfg = *ctx.config;
  const ModelSpec& model = *ctx.model;
  const BoundInputs& in = *ctx.inputs;
  const double lambda = ctx.lambda;
  check_theorem_preconditions(t, cfg, model, in);

  OracleRhsReport report;
  report.value = std::numeric_limits<double>::infinity();

  const double c_gamma = in.cone_parameter();
  const double gamma = in.gamma;

  auto candidate_excess = [&](const Candidate& cand,
                              std::size_t index) -> RiskEstimate {
    return excess_risk(cand.beta, model, kRiskMcPoints,
                       derive_seed(ctx.risk_seed, index));
  };

  switch (t) {
    case Theorem::T1: {
      const Matrix unlab = gram(*ctx.data, SampleScope::unlabeled).matrix;
      const Matrix rows = ctx.data->features.bottomRows(
          ctx.data->unlabeled_count());
      std::map<IndexSet, double> kappa_cache;
      for (std::size_t i = 0; i < ctx.candidates.size(); ++i) {
        const Candidate& cand = ctx.candidates[i];
        auto found = kappa_cache.find(cand.support);
        if (found == kappa_cache.end())
          found = kappa_cache
                      .emplace(cand.support,
                               compatibility(unlab, cand.support, c_gamma).value)
                      .first;
        const double kappa = found->second;
        if (!(kappa > 0)) continue;
        const double risk = transductive_risk(cand.beta, model, rows);
        const double value =
            risk + 4.0 * lambda * l1_norm_off(cand.beta, cand.support) +
            (gamma + 1.0) * (gamma + 1.0) * lambda * lambda *
                static_cast<double>(cand.support.size()) /
                (gamma * gamma * kappa);
        if (value < report.value) {
          report.value = value;
          report.candidate_name = cand.name;
          report.candidate_beta = cand.beta;
          report.candidate_support = cand.support;
          report.candidate_risk = risk;
          report.candidate_risk_se = 0.0;
          report.cone_constant = kappa;
          report.cone_description = "compatibility(unlabeled)";
        }
      }
      break;
    }
    case Theorem::T2a: {
      const Matrix all = gram(*ctx.data, SampleScope::all).matrix;
      const IndexSet star = model.support();
      const auto kb = weak_compatibility(all, star, 3.0);
      const auto re = restricted_eigenvalue_over_supports(
          all, static_cast<int>(star.size()), 3.0, 3, 24,
          derive_seed(ctx.risk_seed, 777));
      Eigen::SelfAdjointEigenSolver<Matrix> es(
          population_covariance(model.design).matrix, Eigen::EigenvaluesOnly);
      const double sigma_norm = es.eigenvalues().maxCoeff();
      const double s = static_cast<double>(star.size());
      const double bound_weak =
          kb.value > 0 ? std::pow(6.0 * lambda * s / kb.value, 2.0)
                       : std::numeric_limits<double>::infinity();
      const double bound_re =
          re.value > 0
              ? 9.0 * sigma_norm * lambda * lambda * s / (re.value * re.value)
              : std::numeric_limits<double>::infinity();
      report.value = std::min(bound_weak, bound_re);
      report.candidate_name = "beta_star";
      report.candidate_beta = model.beta_star;
      report.candidate_support = star;
      report.candidate_risk = 0.0;
      report.cone_constant = bound_weak <= bound_re ? kb.value : re.value;
      report.cone_description = bound_weak <= bound_re
                                    ? "weak_compatibility(all)"
                                    : "restricted_eigenvalue(all)";
      report.details = {{"bound_weak_compatibility", bound_weak},
                        {"bound_restricted_eigenvalue", bound_re},
                        {"weak_compatibility", kb.value},
                        {"restricted_eigenvalue", re.value},
                        {"sigma_norm", sigma_norm}};
      break;
    }
    case Theorem::T2b: {
      const Matrix sigma = population_covariance(model.design).matrix;
      const IndexSet star = model.support();
      const auto kb = weak_compatibility(sigma, star, 3.0);
      report.value = 9.0 * lambda * lambda *
                     static_cast<double>(star.size()) / kb.value;
      report.candidate_name = "beta_star";
      report.candidate_beta = model.beta_star;
      report.candidate_support = star;
      report.cone_constant = kb.value;
      report.cone_description = "weak_compatibility(population)";
      break;
    }
    case Theorem::T3: {
      const Matrix all = gram(*ctx.data, SampleScope::all).matrix;
      std::map<IndexSet, double> kappa_cache;
      for (std::size_t i = 0; i < ctx.candidates.size(); ++i) {
        const Candidate& cand = ctx.candidates[i];
        auto found = kappa_cache.find(cand.support);
        if (found == kappa_cache.end())
          found = kappa_cache
                      .emplace(cand.support,
                               compatibility(all, cand.support, 3.0).value)
                      .first;
        const double kappa = found->second;
        if (!(kappa > 0)) continue;
        const RiskEstimate risk = candidate_excess(cand, i);
        const double value =
            risk.value + 4.0 * lambda * l1_norm_off(cand.beta, cand.support) +
            9.0 * lambda * lambda * static_cast<double>(cand.support.size()) /
                (2.0 * kappa);
        if (value < report.value) {
          report.value = value;
          report.candidate_name = cand.name;
          report.candidate_beta = cand.beta;
          report.candidate_support = cand.support;
          report.candidate_risk = risk.value;
          report.candidate_risk_se = risk.std_error;
          report.cone_constant = kappa;
          report.cone_description = "compatibility(all)";
        }
      }
      break;
    }
    case Theorem::Cor1:
    case Theorem::T4: {
      for (std::size_t i = 0; i < ctx.candidates.size(); ++i) {
        const Candidate& cand = ctx.candidates[i];
        const RiskEstimate risk = candidate_excess(cand, i);
        const double value =
            risk.value + 4.0 * lambda * l1_norm_off(cand.beta, cand.support) +
            27.0 * in.sigma_inv_norm * lambda * lambda *
                static_cast<double>(cand.support.size()) / 4.0;
        if (value < report.value) {
          report.value = value;
          report.candidate_name = cand.name;
          report.candidate_beta = cand.beta;
          report.candidate_support = cand.support;
          report.candidate_risk = risk.value;
          report.candidate_risk_se = risk.std_error;
          report.cone_constant = in.sigma_inv_norm;
          report.cone_description = "sigma_inv_norm";
        }
      }
      if (t == Theorem::T4) {
        const double nd = static_cast<double>(in.total_count);
        const double log_term = std::log(6.0 * in.p * nd * nd);
        const double by = in.label_bound;
        const double tails =
            2.0 * by * by / (nd * nd) +
            by * by / (128.0 * static_cast<double>(in.n) * log_term * log_term);
        report.value += tails;
        report.details = {{"expectation_tail_terms", tails}};
      }
      break;
    }
  }

  if (!std::isfinite(report.value))
    throw SubproblemFailure(std::string("oracle_rhs: no finite candidate value "
                                        "for ") + to_string(t));
  return report;
}

struct TrialDiagnostics {
  double fixed_point_min_gap = 0.0;
  bool has_l1_budget = false;
  double l1_norm = 0.0;
  double l1_budget = 0.0;
  bool l1_ok = true;
  bool has_zeta = false;
  double zeta1_norm = 0.0, zeta_norm = 0.0, zeta_bar_norm = 0.0;
  double zeta2_norm = 0.0;
  bool zeta1_ok = false, zeta_ok = false, zeta_bar_ok = false, zeta2_ok = false;
  bool has_lambda_min = false;
  double lambda_min_value = 0.0, lambda_min_threshold_value = 0.0;
  bool lambda_min_ok = false;
  double supnorm_value = 0.0, supnorm_threshold = 0.0;
  bool supnorm_ok = false;
};

struct TrialReport {
  int trial_index = 0;
  std::uint64_t seed = 0;
  EstimatorKind variant = EstimatorKind::semisupervised;
  double lambda = 0.0;
  double excess_risk = 0.0;
  double excess_risk_se = 0.0;
  double transductive_risk_value = std::numeric_limits<double>::quiet_NaN();
  double rhs_bound = 0.0;
  bool covered = false;
  double kkt_residual = 0.0;
  int sweeps = 0;
  bool converged = false;
  std::string candidate_name;
  IndexSet candidate_support;
  double cone_constant = 0.0;
  std::string cone_description;
  std::vector<std::pair<std::string, double>> bound_details;
  TrialDiagnostics diagnostics;
};

namespace detail {

inline TrialDiagnostics trial_diagnostics(const ExperimentConfig& cfg,
                                          const ModelSpec& model,
                                          const PartiallyLabeledDataset& data,
                                          const BoundInputs& in,
                                          const PenalizedQuadraticProblem& prob,
                                          const Solution& sol,
                                          EstimatorKind variant,
                                          std::uint64_t trial_seed) {
  TrialDiagnostics diag;

  // Fixed-point inequality on random probes around 0, beta_hat and beta*.
  Rng rng(derive_seed(trial_seed, 11));
  const Index p = data.dimension();
  double min_gap = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 10; ++k) {
    Vector probe(p);
    const double scale = std::pow(10.0, rng.uniform(-2.0, 1.0));
    for (Index j = 0; j < p; ++j) probe[j] = scale * rng.normal();
    if (k % 3 == 1) probe += sol.beta;
    if (k % 3 == 2) probe += model.beta_star;
    min_gap = std::min(min_gap, fixed_point_gap(prob, sol.beta, probe));
  }
  diag.fixed_point_min_gap = min_gap;

  if (variant == EstimatorKind::semisupervised) {
    diag.has_l1_budget = true;
    diag.l1_norm = sol.beta.lpNorm<1>();
    diag.l1_budget = in.label_bound * in.label_bound *
                     static_cast<double>(in.total_count) /
                     (2.0 * static_cast<double>(in.n) * prob.lambda);
    diag.l1_ok = diag.l1_norm <= diag.l1_budget + 1e-8;
  }

  // Empirical noise vectors against their quantile bounds.
  const Vector lab_moment = labeled_moment(data);
  const Vector population_moment = exact_label_moment(model);
  const Index n = data.labeled_count();
  const Index total = data.total_count();
  Vector fstar_sum_all = Vector::Zero(p);
  Vector fstar_sum_unlab = Vector::Zero(p);
  for (Index i = 0; i < total; ++i) {
    const Vector x = data.features.row(i);
    const Vector fx = model.f_star(x) * x;
    fstar_sum_all += fx;
    if (i >= n) fstar_sum_unlab += fx;
  }
  diag.zeta1_norm =
      (lab_moment - population_moment).lpNorm<Eigen::Infinity>();
  diag.zeta1_ok = diag.zeta1_norm <= noise_quantile(NoiseKind::zeta1, in);
  diag.zeta_bar_norm =
      (lab_moment - fstar_sum_all / static_cast<double>(total))
          .lpNorm<Eigen::Infinity>();
  diag.zeta_bar_ok =
      diag.zeta_bar_norm <= noise_quantile(NoiseKind::zeta_bar, in);
  if (in.m >= 1) {
    diag.has_zeta = true;
    diag.zeta_norm =
        (lab_moment - fstar_sum_unlab / static_cast<double>(in.m))
            .lpNorm<Eigen::Infinity>();
    diag.zeta_ok = diag.zeta_norm <= noise_quantile(NoiseKind::zeta, in);
  }

  const Matrix sigma = population_covariance(model.design).matrix;
  const Matrix all = gram(data, SampleScope::all).matrix;
  diag.zeta2_norm =
      ((sigma - all) * model.beta_star).lpNorm<Eigen::Infinity>();
  diag.zeta2_ok = diag.zeta2_norm <= zeta2_quantile(in);

  diag.supnorm_value = (sigma - all).cwiseAbs().maxCoeff();
  diag.supnorm_threshold = sup_norm_deviation_threshold(
      in.p, in.total_count, in.feature_bound, in.delta);
  diag.supnorm_ok = diag.supnorm_value <= diag.supnorm_threshold;

  const double validity = 2.0 * in.feature_bound * in.feature_bound * in.p *
                          in.sigma_inv_norm * std::log(in.p / in.delta);
  if (validity <= static_cast<double>(in.total_count)) {
    diag.has_lambda_min = true;
    Eigen::SelfAdjointEigenSolver<Matrix> sig_es(sigma);
    const Vector inv_root = sig_es.eigenvalues().cwiseSqrt().cwiseInverse();
    const Matrix whitener = sig_es.eigenvectors() * inv_root.asDiagonal() *
                            sig_es.eigenvectors().transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> es(whitener * all * whitener,
                                             Eigen::EigenvaluesOnly);
    diag.lambda_min_value = es.eigenvalues().minCoeff();
    diag.lambda_min_threshold_value = lambda_min_threshold(
        in.p, in.total_count, in.feature_bound, in.sigma_inv_norm, in.delta);
    diag.lambda_min_ok =
        diag.lambda_min_value >= diag.lambda_min_threshold_value;
  }
  return diag;
}

}  // namespace detail

// One seed-deterministic draw-fit-evaluate-bound cycle.
inline TrialReport run_trial(const ExperimentConfig& cfg, int trial_index) {
  if (cfg.is_benefit())
    throw InvalidInput("run_trial: benefit configs use run_benefit");
  const Theorem t = cfg.theorem();
  const ModelSpec model = build_model(cfg);
  const BoundInputs in = bound_inputs(cfg, model);
  check_theorem_preconditions(t, cfg, model, in);
  if (cfg.lambda_slack < 1.0)
    throw InvalidInput("config: lambda_slack below 1 would invalidate the "
                       "bound being verified");

  TrialReport report;
  report.trial_index = trial_index;
  report.seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(trial_index));

  const PartiallyLabeledDataset data =
      sample_dataset(model, cfg.n, cfg.total_count, report.seed);

  report.lambda = theorem_lambda(t, in) * cfg.lambda_slack;
  const EstimatorKind variant = cfg.variant.value_or(default_variant(t));
  report.variant = variant;

  EstimatorVariant ev;
  ev.kind = variant;
  if (variant == EstimatorKind::known_sigma)
    ev.sigma = population_covariance(model.design).matrix;
  const PenalizedQuadraticProblem prob = build_problem(data, ev, report.lambda);
  const Solution sol = solve(prob, 1e-8, 100000);
  if (!sol.converged)
    throw SubproblemFailure("trial " + std::to_string(trial_index) +
                            " (seed " + std::to_string(report.seed) +
                            "): solver did not converge");
  report.kkt_residual = sol.kkt_residual;
  report.sweeps = sol.sweeps;
  report.converged = sol.converged;

  const RiskEstimate excess =
      excess_risk(sol.beta, model, kRiskMcPoints, derive_seed(report.seed, 5));
  report.excess_risk = excess.value;
  report.excess_risk_se = excess.std_error;
  if (data.unlabeled_count() > 0)
    report.transductive_risk_value = transductive_risk(
        sol.beta, model, data.features.bottomRows(data.unlabeled_count()));

  OracleContext ctx;
  ctx.config = &cfg;
  ctx.model = &model;
  ctx.data = &data;
  ctx.inputs = &in;
  ctx.lambda = report.lambda;
  // The expectation bound compares a deterministic right-hand side with the
  // mean risk, so its candidate list excludes the data-dependent refit.
  ctx.candidates = rhs_candidates(model, data, report.lambda, in.label_bound,
                                  t != Theorem::T4);
  ctx.risk_seed = derive_seed(cfg.master_seed, 0xca11d1daULL);

  const OracleRhsReport rhs = oracle_rhs(t, ctx);
  report.rhs_bound = rhs.value;
  report.candidate_name = rhs.candidate_name;
  report.candidate_support = rhs.candidate_support;
  report.cone_constant = rhs.cone_constant;
  report.cone_description = rhs.cone_description;
  report.bound_details = rhs.details;

  const double risk_checked = t == Theorem::T1
                                  ? report.transductive_risk_value
                                  : report.excess_risk;
  report.covered = risk_checked <= report.rhs_bound;

  report.diagnostics = detail::trial_diagnostics(cfg, model, data, in, prob,
                                                 sol, variant, report.seed);
  return report;
}

struct CoverageReport {
  std::string experiment;
  int trials = 0;
  double coverage = 0.0;
  double delta = 0.0;
  double slack = 0.0;
  bool pass = false;
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<TrialReport> trial_reports;
  // Expectation-bound aggregates (T4 only).
  bool has_expectation_check = false;
  double mean_excess_risk = 0.0;
  double mean_excess_risk_se = 0.0;
  double expectation_rhs = 0.0;
  bool expectation_pass = false;
  // Diagnostic coverage fractions across trials.
  double fixed_point_ok_fraction = 0.0;
  double l1_ok_fraction = 0.0;
  double zeta1_coverage = 0.0, zeta_coverage = 0.0, zeta_bar_coverage = 0.0;
  double zeta2_coverage = 0.0, lambda_min_coverage = 0.0, supnorm_coverage = 0.0;
};

namespace detail {

template <class Fn>
inline void parallel_for_trials(int trials, int jobs, const Fn& body) {
  jobs = std::max(1, jobs);
  if (jobs == 1) {
    for (int i = 0; i < trials; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= trials) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < jobs; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

// Aggregate `trials` independent trials. Trials carry seeds derived from
// (master_seed, index), so the report is identical for every jobs value.
inline CoverageReport run_monte_carlo(const ExperimentConfig& cfg_in,
                                      int trials, std::uint64_t master_seed,
                                      int jobs = 1) {
  if (trials < 1) throw InvalidInput("run_monte_carlo: trials must be >= 1");
  ExperimentConfig cfg = cfg_in;
  cfg.trials = trials;
  cfg.master_seed = master_seed;
  {
    // Validate once before spending time on trials.
    const ModelSpec model = build_model(cfg);
    const BoundInputs in = bound_inputs(cfg, model);
    check_theorem_preconditions(cfg.theorem(), cfg, model, in);
  }

  std::vector<TrialReport> reports(static_cast<std::size_t>(trials));
  detail::parallel_for_trials(trials, jobs, [&](int i) {
    reports[static_cast<std::size_t>(i)] = run_trial(cfg, i);
  });

  CoverageReport out;
  out.experiment = cfg.experiment;
  out.trials = trials;
  out.delta = cfg.delta;
  out.master_seed = master_seed;
  out.slack = coverage_slack(cfg.delta, trials);

  int covered = 0, fixed_point_ok = 0, l1_seen = 0, l1_ok = 0;
  int zeta1_ok = 0, zeta_seen = 0, zeta_ok = 0, zeta_bar_ok = 0, zeta2_ok = 0;
  int lm_seen = 0, lm_ok = 0, sup_ok = 0;
  double risk_sum = 0.0, risk_sq_sum = 0.0;
  for (const auto& r : reports) {
    out.seeds.push_back(r.seed);
    covered += r.covered;
    fixed_point_ok += r.diagnostics.fixed_point_min_gap >= -1e-7;
    if (r.diagnostics.has_l1_budget) {
      ++l1_seen;
      l1_ok += r.diagnostics.l1_ok;
    }
    zeta1_ok += r.diagnostics.zeta1_ok;
    zeta_bar_ok += r.diagnostics.zeta_bar_ok;
    zeta2_ok += r.diagnostics.zeta2_ok;
    sup_ok += r.diagnostics.supnorm_ok;
    if (r.diagnostics.has_zeta) {
      ++zeta_seen;
      zeta_ok += r.diagnostics.zeta_ok;
    }
    if (r.diagnostics.has_lambda_min) {
      ++lm_seen;
      lm_ok += r.diagnostics.lambda_min_ok;
    }
    risk_sum += r.excess_risk;
    risk_sq_sum += r.excess_risk * r.excess_risk;
  }
  const double count = static_cast<double>(trials);
  out.coverage = covered / count;
  out.pass = out.coverage >= 1.0 - cfg.delta - out.slack;
  out.fixed_point_ok_fraction = fixed_point_ok / count;
  out.l1_ok_fraction = l1_seen > 0 ? static_cast<double>(l1_ok) / l1_seen : 1.0;
  out.zeta1_coverage = zeta1_ok / count;
  out.zeta_coverage = zeta_seen > 0 ? static_cast<double>(zeta_ok) / zeta_seen : 1.0;
  out.zeta_bar_coverage = zeta_bar_ok / count;
  out.zeta2_coverage = zeta2_ok / count;
  out.lambda_min_coverage =
      lm_seen > 0 ? static_cast<double>(lm_ok) / lm_seen : 1.0;
  out.supnorm_coverage = sup_ok / count;

  if (cfg.theorem() == Theorem::T4) {
    out.has_expectation_check = true;
    out.mean_excess_risk = risk_sum / count;
    const double var =
        std::max(risk_sq_sum / count - out.mean_excess_risk * out.mean_excess_risk,
                 0.0) * count / std::max(count - 1.0, 1.0);
    out.mean_excess_risk_se = std::sqrt(var / count);
    out.expectation_rhs = reports.front().rhs_bound;
    out.expectation_pass = out.mean_excess_risk <=
                           out.expectation_rhs + 3.0 * out.mean_excess_risk_se;
    out.pass = out.expectation_pass;
  }

  out.trial_reports = std::move(reports);
  return out;
}

// Paired comparison of the semi-supervised and purely supervised estimators
// on identical datasets. Not a bound check; lambda_slack below 1 is allowed
// here to leave the signal partially unshrunk.
struct BenefitReport {
  int trials = 0;
  double lambda = 0.0;
  double median_semisupervised = 0.0;
  double median_supervised = 0.0;
  bool pass = false;  // semi-supervised median <= supervised median
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> semisupervised_risks;
  std::vector<double> supervised_risks;
};

namespace detail {

inline double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2]
                    : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace detail

inline BenefitReport run_benefit(const ExperimentConfig& cfg, int jobs = 1) {
  if (!cfg.is_benefit())
    throw InvalidInput("run_benefit: config experiment must be 'benefit'");
  if (!(cfg.lambda_slack > 0))
    throw InvalidInput("config: lambda_slack must be > 0");
  const ModelSpec model = build_model(cfg);
  const BoundInputs in = bound_inputs(cfg, model);

  BenefitReport out;
  out.trials = cfg.trials;
  out.master_seed = cfg.master_seed;
  out.lambda = lambda_semisup_wellspec(in) * cfg.lambda_slack;
  out.seeds.resize(static_cast<std::size_t>(cfg.trials));
  out.semisupervised_risks.resize(static_cast<std::size_t>(cfg.trials));
  out.supervised_risks.resize(static_cast<std::size_t>(cfg.trials));

  detail::parallel_for_trials(cfg.trials, jobs, [&](int i) {
    const std::uint64_t seed =
        derive_seed(cfg.master_seed, static_cast<std::uint64_t>(i));
    const PartiallyLabeledDataset data =
        sample_dataset(model, cfg.n, cfg.total_count, seed);
    for (EstimatorKind kind :
         {EstimatorKind::semisupervised, EstimatorKind::supervised}) {
      EstimatorVariant ev;
      ev.kind = kind;
      const Solution sol = solve(build_problem(data, ev, out.lambda), 1e-8,
                                 100000);
      if (!sol.converged)
        throw SubproblemFailure("benefit trial " + std::to_string(i) +
                                ": solver did not converge");
      const double risk =
          excess_risk(sol.beta, model, kRiskMcPoints, derive_seed(seed, 5)).value;
      if (kind == EstimatorKind::semisupervised)
        out.semisupervised_risks[static_cast<std::size_t>(i)] = risk;
      else
        out.supervised_risks[static_cast<std::size_t>(i)] = risk;
    }
    out.seeds[static_cast<std::size_t>(i)] = seed;
  });

  out.median_semisupervised = detail::median(out.semisupervised_risks);
  out.median_supervised = detail::median(out.supervised_risks);
  out.pass = out.median_semisupervised <= out.median_supervised;
  return out;
}

}  // namespace sslasso
