#pragma once

#include <cmath>
#include <cstdint>
#include <optional>

#include "sslasso/common.hpp"
#include "sslasso/geometry.hpp"

namespace sslasso {

// Everything the closed-form tuning and concentration formulas consume.
// n_star = min(n, m) is the effective sample size of the transductive noise.
struct BoundInputs {
  double feature_bound = 1.0;  // B_X
  double label_bound = 1.0;    // B_Y
  std::int64_t n = 0;
  std::int64_t m = 0;  // N - n
  std::int64_t total_count = 0;  // N
  int p = 0;
  double delta = 0.1;
  double sigma_inv_norm = 1.0;  // ||Sigma^{-1}||
  double gamma = 2.0;           // cone parameter, > 1
  // Optional (E[Y^2])^{1/2}; when set, noise quantiles use L_Y B_X instead of
  // B_Y in the variance term. Off by default.
  std::optional<double> label_rms;

  std::int64_t effective_min() const { return m >= 1 ? std::min(n, m) : n; }
  double cone_parameter() const { return (gamma + 1.0) / (gamma - 1.0); }

  void validate() const {
    if (n < 1 || total_count < n || m != total_count - n)
      throw InvalidInput("BoundInputs: need 1 <= n <= N and m = N - n");
    if (p < 1) throw InvalidInput("BoundInputs: p must be >= 1");
    if (!(delta > 0) || !(delta < 1))
      throw InvalidInput("BoundInputs: delta must lie in (0,1)");
    if (!(gamma > 1)) throw InvalidInput("BoundInputs: gamma must be > 1");
    if (feature_bound < 0 || label_bound < 0 || sigma_inv_norm < 0)
      throw InvalidInput("BoundInputs: bounds must be nonnegative");
  }
};

// Two-sided Bernstein deviation quantile for the mean of N independent
// variables with average variance sigma^2 and centered range bound b:
//   sigma sqrt(2 log(2/delta) / N) [1 + b/(6 N sigma) sqrt(2 log(2/delta)/N)].
inline double bernstein_quantile(double sigma, double range_bound,
                                 std::int64_t total_count, double delta) {
  if (total_count < 1)
    throw InvalidInput("bernstein_quantile: N must be >= 1");
  if (!(delta > 0) || !(delta < 1))
    throw InvalidInput("bernstein_quantile: delta must lie in (0,1)");
  if (sigma < 0 || range_bound < 0)
    throw InvalidInput("bernstein_quantile: sigma and b must be >= 0");
  if (sigma == 0.0) return 0.0;
  const double root =
      std::sqrt(2.0 * std::log(2.0 / delta) / static_cast<double>(total_count));
  return sigma * root *
         (1.0 + range_bound / (6.0 * static_cast<double>(total_count) * sigma) * root);
}

enum class NoiseKind { zeta1, zeta, zeta_bar };

inline const char* to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::zeta1: return "zeta1";
    case NoiseKind::zeta: return "zeta";
    case NoiseKind::zeta_bar: return "zeta_bar";
  }
  return "?";
}

// 1-delta quantile bounds on the sup norm of the empirical noise vectors:
//   zeta1    : (1/n) sum Y_i X_i - E[Y X]
//   zeta     : (1/n) sum Y_i X_i - (1/m) sum f*(X_i) X_i   (needs m >= 1)
//   zeta_bar : (1/n) sum Y_i X_i - (1/N) sum f*(X_i) X_i
// zeta uses n_star in place of n; zeta_bar carries B_X/2 instead of B_X/3.
inline double noise_quantile(NoiseKind kind, const BoundInputs& in) {
  in.validate();
  if (kind == NoiseKind::zeta && in.m < 1)
    throw InvalidInput("noise_quantile: zeta requires m >= 1");
  const double count =
      static_cast<double>(kind == NoiseKind::zeta ? in.effective_min() : in.n);
  const double log_term = std::log(2.0 * in.p / in.delta);
  const double root = std::sqrt(log_term / count);
  const double variance_coef =
      in.label_rms ? *in.label_rms * in.feature_bound : in.label_bound;
  const double range_divisor = kind == NoiseKind::zeta_bar ? 2.0 : 3.0;
  return 2.0 * variance_coef * root +
         2.0 * in.label_bound * in.feature_bound * log_term /
             (range_divisor * count);
}

// 1-delta/3 quantile bound on ||(Sigma - Sigma_hat_all) beta||_inf for the
// population minimizer beta:
//   B_X B_Y sqrt(2 log(6p/delta)/N) [1 + B_X/3 sqrt(2 p ||Sigma^{-1}||
//   log(6p/delta) / N)].
inline double zeta2_quantile(const BoundInputs& in) {
  in.validate();
  const double count = static_cast<double>(in.total_count);
  const double log_term = std::log(6.0 * in.p / in.delta);
  return in.feature_bound * in.label_bound *
         std::sqrt(2.0 * log_term / count) *
         (1.0 + in.feature_bound / 3.0 *
                    std::sqrt(2.0 * in.p * in.sigma_inv_norm * log_term / count));
}

// Minimal admissible tuning parameter for the transductive bound:
//   2 gamma B_Y sqrt(log(2p/delta)/n_star)[1 + B_X/3 sqrt(log(2p/delta)/n_star)]
// (prefactor 4 at the default gamma = 2).
inline double lambda_transductive(const BoundInputs& in) {
  in.validate();
  if (in.m < 1)
    throw InvalidInput("lambda_transductive: requires m >= 1");
  const double count = static_cast<double>(in.effective_min());
  const double root = std::sqrt(std::log(2.0 * in.p / in.delta) / count);
  return 2.0 * in.gamma * in.label_bound * root *
         (1.0 + in.feature_bound / 3.0 * root);
}

// Minimal tuning parameter for the well-specified semi-supervised bounds:
//   4 B_Y sqrt(log(4p/delta)/n) [1 + B_X/2 sqrt(log(4p/delta)/n)].
inline double lambda_semisup_wellspec(const BoundInputs& in) {
  in.validate();
  const double root =
      std::sqrt(std::log(4.0 * in.p / in.delta) / static_cast<double>(in.n));
  return 4.0 * in.label_bound * root * (1.0 + in.feature_bound / 2.0 * root);
}

// Minimal tuning parameter for the mis-specified semi-supervised bound:
//   8 B_X B_Y sqrt(log(6p/delta)/n) [1 + B_X/3 sqrt(log(6p/delta)/n)].
inline double lambda_semisup_misspec(const BoundInputs& in) {
  in.validate();
  const double root =
      std::sqrt(std::log(6.0 * in.p / in.delta) / static_cast<double>(in.n));
  return 8.0 * in.feature_bound * in.label_bound * root *
         (1.0 + in.feature_bound / 3.0 * root);
}

// Tuning parameter for the bound in expectation; equals the mis-specified
// formula with delta = N^{-2}:
//   8 B_X B_Y sqrt(log(6 p N^2)/n) [1 + B_X/3 sqrt(log(6 p N^2)/n)].
inline double lambda_expectation(double feature_bound, double label_bound,
                                 std::int64_t n, std::int64_t total_count,
                                 int p) {
  if (n < 1 || total_count < n || p < 1)
    throw InvalidInput("lambda_expectation: need 1 <= n <= N, p >= 1");
  const double log_term = std::log(6.0 * static_cast<double>(p) *
                                   static_cast<double>(total_count) *
                                   static_cast<double>(total_count));
  const double root = std::sqrt(log_term / static_cast<double>(n));
  return 8.0 * feature_bound * label_bound * root *
         (1.0 + feature_bound / 3.0 * root);
}

// Smallest overall sample size under which the mis-specified semi-supervised
// bound applies: ceil(18 B_X^2 p ||Sigma^{-1}|| log(3p/delta)).
inline std::int64_t min_overall_sample(int p, double feature_bound,
                                       double sigma_inv_norm, double delta) {
  if (p < 1 || !(feature_bound > 0) || !(sigma_inv_norm > 0) || !(delta > 0) ||
      !(delta < 1))
    throw InvalidInput("min_overall_sample: bad inputs");
  return static_cast<std::int64_t>(
      std::ceil(18.0 * feature_bound * feature_bound * static_cast<double>(p) *
                sigma_inv_norm * std::log(3.0 * p / delta)));
}

// Sample-size condition under which the population-level well-specified bound
// holds: 16 s* B_X^2 sqrt(2 log(4 p^2 / delta)) <= kappa_bar sqrt(N).
inline bool wellspec_N_condition(int s_star, double feature_bound,
                                 double kappa_bar, double delta,
                                 std::int64_t total_count, int p) {
  if (s_star < 1 || p < 1 || total_count < 1 || !(feature_bound > 0) ||
      !(kappa_bar > 0) || !(delta > 0) || !(delta < 1))
    throw InvalidInput("wellspec_N_condition: bad inputs");
  const double pd = static_cast<double>(p);
  const double lhs = 16.0 * s_star * feature_bound * feature_bound *
                     std::sqrt(2.0 * std::log(4.0 * pd * pd / delta));
  return lhs <= kappa_bar * std::sqrt(static_cast<double>(total_count));
}

// Slack in the deterministic cone inequality: for any beta, beta', mu > 0,
// gamma > 1, J and symmetric PSD M (with u = beta - beta'),
//   2 mu/gamma (||u||_1 + gamma ||beta||_1 - gamma ||beta'||_1) - u'Mu
//     <= 4 mu ||beta_Jc||_1 + (gamma+1)^2 mu^2 |J| / (gamma^2 kappa_M(J, c_gamma)).
// Returns RHS - LHS, which is nonnegative for every input.
inline double cone_inequality_gap(double mu, double gamma, const Matrix& m,
                         const IndexSet& support, const Vector& beta,
                         const Vector& beta_prime) {
  if (!(mu > 0)) throw InvalidInput("cone_inequality_gap: mu must be > 0");
  if (!(gamma > 1)) throw InvalidInput("cone_inequality_gap: gamma must be > 1");
  if (beta.size() != beta_prime.size() || beta.size() != m.rows())
    throw InvalidInput("cone_inequality_gap: dimension mismatch");
  const double c_gamma = (gamma + 1.0) / (gamma - 1.0);
  const auto kappa = compatibility(m, support, c_gamma);

  const Vector u = beta - beta_prime;
  const double lhs =
      2.0 * mu / gamma *
          (u.lpNorm<1>() + gamma * beta.lpNorm<1>() - gamma * beta_prime.lpNorm<1>()) -
      u.dot(m * u);
  double rhs = 4.0 * mu * l1_norm_off(beta, support);
  if (kappa.value > 0) {
    rhs += (gamma + 1.0) * (gamma + 1.0) * mu * mu *
           static_cast<double>(support.size()) / (gamma * gamma * kappa.value);
  } else {
    rhs = std::numeric_limits<double>::infinity();
  }
  return rhs - lhs;
}

}  // namespace sslasso
