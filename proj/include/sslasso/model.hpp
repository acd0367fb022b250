#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "sslasso/dataset.hpp"
#include "sslasso/rng.hpp"

namespace sslasso {

// Rademacher-factor design: X_j = w_j'u / ||w_j||_2 with u uniform on
// {-1,+1}^k and loadings w_j in {-1,0,+1}^k. Every feature then has zero
// mean, unit second moment (unit-diagonal Sigma), and the almost-sure bound
// |X_j| <= ||w_j||_1 / ||w_j||_2.
struct DesignSpec {
  Eigen::MatrixXi loadings;  // p x k

  Index dimension() const { return loadings.rows(); }
  Index factor_count() const { return loadings.cols(); }

  void validate() const {
    if (loadings.rows() < 1 || loadings.cols() < 1)
      throw InvalidInput("design: loadings must be p x k with p, k >= 1");
    for (Index j = 0; j < loadings.rows(); ++j) {
      int weight = 0;
      for (Index t = 0; t < loadings.cols(); ++t) {
        const int e = loadings(j, t);
        if (e < -1 || e > 1)
          throw InvalidInput("design: loadings entries must be -1, 0 or +1");
        weight += e != 0;
      }
      if (weight == 0)
        throw InvalidInput("design: loadings row " + std::to_string(j) +
                           " is all zero");
    }
  }

  // |X_j| <= l1(w_j)/l2(w_j), per feature.
  Vector per_feature_bound() const {
    Vector b(dimension());
    for (Index j = 0; j < dimension(); ++j) {
      double l1 = 0.0, l2sq = 0.0;
      for (Index t = 0; t < factor_count(); ++t) {
        l1 += std::abs(loadings(j, t));
        l2sq += loadings(j, t) * loadings(j, t);
      }
      b[j] = l1 / std::sqrt(l2sq);
    }
    return b;
  }

  double feature_bound() const { return per_feature_bound().maxCoeff(); }

  bool is_identity() const {
    if (loadings.rows() != loadings.cols()) return false;
    for (Index j = 0; j < loadings.rows(); ++j)
      for (Index t = 0; t < loadings.cols(); ++t)
        if (loadings(j, t) != (j == t ? 1 : 0)) return false;
    return true;
  }

  // Independent Rademacher coordinates, Sigma = I_p.
  static DesignSpec identity(Index p) {
    DesignSpec d;
    d.loadings = Eigen::MatrixXi::Identity(p, p);
    return d;
  }

  // Adjacent features share one factor: Sigma_{j,j+1} = 1/2 off-diagonal
  // band, unit diagonal, B_X = sqrt(2).
  static DesignSpec chain(Index p) {
    DesignSpec d;
    d.loadings = Eigen::MatrixXi::Zero(p, p);
    for (Index j = 0; j < p; ++j) {
      d.loadings(j, j) = 1;
      if (j + 1 < p) d.loadings(j, j + 1) = 1;
    }
    return d;
  }

  static DesignSpec from_name(const std::string& name, Index p) {
    if (name == "identity") return identity(p);
    if (name == "chain") return chain(p);
    throw InvalidInput("design: unknown design '" + name + "'");
  }
};

// Exact population covariance Sigma_{jl} = w_j'w_l / (||w_j|| ||w_l||).
// The shared square root keeps the diagonal at exactly one.
inline GramMatrix population_covariance(const DesignSpec& design) {
  design.validate();
  const Index p = design.dimension();
  Matrix sigma(p, p);
  Eigen::MatrixXd w = design.loadings.cast<double>();
  Eigen::VectorXd sq(p);
  for (Index j = 0; j < p; ++j) sq[j] = w.row(j).squaredNorm();
  for (Index j = 0; j < p; ++j)
    for (Index l = 0; l < p; ++l)
      sigma(j, l) = w.row(j).dot(w.row(l)) / std::sqrt(sq[j] * sq[l]);
  GramMatrix g;
  g.matrix = 0.5 * (sigma + sigma.transpose());
  g.scope = SampleScope::population;
  return g;
}

enum class NonlinearityKind { none, bounded_interaction, bounded_sine };

inline const char* to_string(NonlinearityKind k) {
  switch (k) {
    case NonlinearityKind::none: return "none";
    case NonlinearityKind::bounded_interaction: return "bounded_interaction";
    case NonlinearityKind::bounded_sine: return "bounded_sine";
  }
  return "?";
}

inline NonlinearityKind nonlinearity_from_string(const std::string& s) {
  if (s == "none") return NonlinearityKind::none;
  if (s == "bounded_interaction" || s == "interaction")
    return NonlinearityKind::bounded_interaction;
  if (s == "bounded_sine" || s == "sine") return NonlinearityKind::bounded_sine;
  throw InvalidInput("unknown nonlinearity '" + s + "'");
}

// Data-generating model: f*(x) = x'beta* [+ alpha x_1 x_2 | + alpha sin(x_1)],
// labels Y = f*(X) + xi with xi uniform on [-h, h].
struct ModelSpec {
  Vector beta_star;
  NonlinearityKind nonlinearity = NonlinearityKind::none;
  double alpha = 0.0;
  double noise_halfwidth = 0.0;
  DesignSpec design;

  Index dimension() const { return beta_star.size(); }
  bool well_specified() const {
    return nonlinearity == NonlinearityKind::none || alpha == 0.0;
  }

  IndexSet support() const {
    IndexSet s;
    for (Index j = 0; j < beta_star.size(); ++j)
      if (beta_star[j] != 0.0) s.push_back(j);
    return s;
  }

  void validate() const {
    design.validate();
    if (design.dimension() != beta_star.size())
      throw InvalidInput("model: beta_star length must match the design");
    if (noise_halfwidth < 0)
      throw InvalidInput("model: noise_halfwidth must be >= 0");
    if (nonlinearity == NonlinearityKind::bounded_interaction &&
        dimension() < 2)
      throw InvalidInput("model: bounded_interaction needs p >= 2");
  }

  double nonlinearity_value(const Eigen::Ref<const Vector>& x) const {
    switch (nonlinearity) {
      case NonlinearityKind::none: return 0.0;
      case NonlinearityKind::bounded_interaction: return alpha * x[0] * x[1];
      case NonlinearityKind::bounded_sine: return alpha * std::sin(x[0]);
    }
    return 0.0;
  }

  double f_star(const Eigen::Ref<const Vector>& x) const {
    return beta_star.dot(x) + nonlinearity_value(x);
  }

  // sup |g| for the nonlinear part, from the per-feature bounds.
  double nonlinearity_peak() const {
    const Vector b = design.per_feature_bound();
    switch (nonlinearity) {
      case NonlinearityKind::none: return 0.0;
      case NonlinearityKind::bounded_interaction:
        return std::abs(alpha) * b[0] * b[1];
      case NonlinearityKind::bounded_sine: return std::abs(alpha);
    }
    return 0.0;
  }

  double feature_bound() const { return design.feature_bound(); }

  // Analytic B_Y = ||beta*||_1 B_X + |alpha| sup|g| + h.
  double label_bound() const {
    return beta_star.lpNorm<1>() * feature_bound() + nonlinearity_peak() +
           noise_halfwidth;
  }
};

namespace detail {

inline Vector sample_feature_row(const DesignSpec& design, Rng& rng,
                                 Vector& factor_buffer) {
  const Index k = design.factor_count();
  for (Index t = 0; t < k; ++t)
    factor_buffer[t] = static_cast<double>(rng.rademacher());
  Vector x(design.dimension());
  for (Index j = 0; j < design.dimension(); ++j) {
    double dot = 0.0, sq = 0.0;
    for (Index t = 0; t < k; ++t) {
      const int e = design.loadings(j, t);
      if (e != 0) {
        dot += e * factor_buffer[t];
        sq += 1.0;
      }
    }
    x[j] = dot / std::sqrt(sq);
  }
  return x;
}

}  // namespace detail

// Draw n labeled plus N - n unlabeled observations. Deterministic given the
// seed. The reported bounds are the analytic ones, not empirical maxima.
inline PartiallyLabeledDataset sample_dataset(const ModelSpec& model,
                                              std::int64_t n, std::int64_t total,
                                              std::uint64_t seed) {
  model.validate();
  if (n < 1 || total < n) throw InvalidInput("sample_dataset: need 1 <= n <= N");
  Rng rng(seed);
  PartiallyLabeledDataset d;
  d.features.resize(total, model.dimension());
  d.labels.resize(n);
  Vector factors(model.design.factor_count());
  for (std::int64_t i = 0; i < total; ++i) {
    const Vector x = detail::sample_feature_row(model.design, rng, factors);
    d.features.row(i) = x;
    if (i < n) {
      const double noise =
          model.noise_halfwidth > 0
              ? rng.uniform(-model.noise_halfwidth, model.noise_halfwidth)
              : 0.0;
      d.labels[i] = model.f_star(x) + noise;
    }
  }
  Bounds b;
  b.feature_bound = model.feature_bound();
  b.label_bound = model.label_bound();
  b.inferred = false;
  d.bounds = b;
  return d;
}

struct RiskEstimate {
  double value = 0.0;
  double std_error = 0.0;  // zero when the value is exact
};

// Excess risk E (f_beta) = integral of (x'beta - f*(x))^2 under the feature
// distribution. Exact quadratic form in the well-specified case; Monte Carlo
// over fresh feature draws otherwise.
inline RiskEstimate excess_risk(const Vector& beta, const ModelSpec& model,
                                std::int64_t mc_points = 40000,
                                std::uint64_t seed = 0) {
  model.validate();
  if (beta.size() != model.dimension())
    throw InvalidInput("excess_risk: beta dimension mismatch");
  if (model.well_specified()) {
    const Matrix sigma = population_covariance(model.design).matrix;
    const Vector diff = beta - model.beta_star;
    return {diff.dot(sigma * diff), 0.0};
  }
  if (mc_points < 2) throw InvalidInput("excess_risk: mc_points must be >= 2");
  Rng rng(seed);
  Vector factors(model.design.factor_count());
  double sum = 0.0, sum_sq = 0.0;
  for (std::int64_t i = 0; i < mc_points; ++i) {
    const Vector x = detail::sample_feature_row(model.design, rng, factors);
    const double err = x.dot(beta) - model.f_star(x);
    const double sq = err * err;
    sum += sq;
    sum_sq += sq * sq;
  }
  const double count = static_cast<double>(mc_points);
  const double mean = sum / count;
  const double var = std::max(sum_sq / count - mean * mean, 0.0);
  return {mean, std::sqrt(var / count)};
}

// Transductive risk: average squared error of x'beta against f* over the
// observed unlabeled feature rows. Exact.
inline double transductive_risk(const Vector& beta, const ModelSpec& model,
                                const Matrix& unlabeled_features) {
  model.validate();
  if (unlabeled_features.rows() == 0)
    throw InvalidInput("transductive_risk: no unlabeled rows (m = 0)");
  if (unlabeled_features.cols() != beta.size())
    throw InvalidInput("transductive_risk: dimension mismatch");
  double sum = 0.0;
  for (Index i = 0; i < unlabeled_features.rows(); ++i) {
    const Vector x = unlabeled_features.row(i);
    const double err = x.dot(beta) - model.f_star(x);
    sum += err * err;
  }
  return sum / static_cast<double>(unlabeled_features.rows());
}

// E[Y X] = E[f*(X) X], exactly. Sigma beta* when well-specified; otherwise by
// enumerating the 2^k factor outcomes (k <= 20).
inline Vector exact_label_moment(const ModelSpec& model) {
  model.validate();
  const Matrix sigma = population_covariance(model.design).matrix;
  if (model.well_specified()) return sigma * model.beta_star;
  if (model.design.is_identity()) {
    // Independent Rademacher coordinates: the interaction term has zero
    // cross-moment with every feature, and E[X_1 sin(X_1)] = sin(1).
    Vector moment = model.beta_star;
    if (model.nonlinearity == NonlinearityKind::bounded_sine)
      moment[0] += model.alpha * std::sin(1.0);
    return moment;
  }
  const Index k = model.design.factor_count();
  if (k > 20)
    throw InvalidInput("exact_label_moment: factor enumeration needs k <= 20");
  const Index p = model.dimension();
  Eigen::MatrixXd w = model.design.loadings.cast<double>();
  Vector norms(p);
  for (Index j = 0; j < p; ++j) norms[j] = w.row(j).norm();
  Vector moment = Vector::Zero(p);
  Vector x(p);
  const std::uint64_t outcomes = std::uint64_t{1} << k;
  for (std::uint64_t bits = 0; bits < outcomes; ++bits) {
    for (Index j = 0; j < p; ++j) {
      double dot = 0.0;
      for (Index t = 0; t < k; ++t) {
        const int e = model.design.loadings(j, t);
        if (e != 0) dot += e * (((bits >> t) & 1) ? 1.0 : -1.0);
      }
      x[j] = dot / norms[j];
    }
    moment += model.f_star(x) * x;
  }
  return moment / static_cast<double>(outcomes);
}

}  // namespace sslasso
