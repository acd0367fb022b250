#pragma once

#include <optional>
#include <string>

#include "sslasso/dataset.hpp"
#include "sslasso/solver.hpp"

namespace sslasso {

// Which second-moment matrix plays the role of G in the penalized quadratic.
// All variants share the linear term b = (1/n) X_lab' Y except alquier,
// which re-weights it through the unlabeled/labeled covariances.
enum class EstimatorKind {
  supervised,              // G = Gram(labeled): the original lasso
  transductive,            // G = Gram(unlabeled)
  transductive_projected,  // G = Gram(unlabeled), b projected onto range(G)
  semisupervised,          // G = Gram(all)
  known_sigma,             // G = population covariance, supplied by caller
  alquier                  // G = Gram(unlabeled), b = G * Gram(labeled)^+ b0
};

inline const char* to_string(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::supervised: return "supervised";
    case EstimatorKind::transductive: return "transductive";
    case EstimatorKind::transductive_projected: return "transductive_projected";
    case EstimatorKind::semisupervised: return "semisupervised";
    case EstimatorKind::known_sigma: return "known_sigma";
    case EstimatorKind::alquier: return "alquier";
  }
  return "?";
}

inline EstimatorKind estimator_kind_from_string(const std::string& s) {
  if (s == "supervised") return EstimatorKind::supervised;
  if (s == "transductive") return EstimatorKind::transductive;
  if (s == "transductive_projected") return EstimatorKind::transductive_projected;
  if (s == "semisupervised") return EstimatorKind::semisupervised;
  if (s == "known_sigma") return EstimatorKind::known_sigma;
  if (s == "alquier") return EstimatorKind::alquier;
  throw InvalidInput("unknown estimator variant '" + s + "'");
}

struct EstimatorVariant {
  EstimatorKind kind = EstimatorKind::semisupervised;
  std::optional<Matrix> sigma;  // required for known_sigma

  static EstimatorVariant supervised() { return {EstimatorKind::supervised, {}}; }
  static EstimatorVariant transductive() { return {EstimatorKind::transductive, {}}; }
  static EstimatorVariant transductive_projected() {
    return {EstimatorKind::transductive_projected, {}};
  }
  static EstimatorVariant semisupervised() {
    return {EstimatorKind::semisupervised, {}};
  }
  static EstimatorVariant known_sigma(Matrix sigma_matrix) {
    return {EstimatorKind::known_sigma, std::move(sigma_matrix)};
  }
  static EstimatorVariant alquier() { return {EstimatorKind::alquier, {}}; }
};

// Spectral pseudo-inverse: eigenvalues below rank_tol * lambda_max are
// treated as zero.
inline Matrix pseudo_inverse(const Matrix& m, double rank_tol = 1e-10) {
  check_symmetric(m, "pseudo_inverse");
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  const Vector& values = es.eigenvalues();
  const double cutoff = rank_tol * std::max(values.cwiseAbs().maxCoeff(), 0.0);
  Vector inv = Vector::Zero(values.size());
  for (Index i = 0; i < values.size(); ++i)
    if (values[i] > cutoff) inv[i] = 1.0 / values[i];
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

// Orthogonal projector onto range(m); symmetric, idempotent, Pi m = m.
inline Matrix range_projector(const Matrix& m, double rank_tol = 1e-10) {
  check_symmetric(m, "range_projector");
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  const Vector& values = es.eigenvalues();
  const double cutoff = rank_tol * std::max(values.cwiseAbs().maxCoeff(), 0.0);
  Vector mask = Vector::Zero(values.size());
  for (Index i = 0; i < values.size(); ++i)
    if (values[i] > cutoff) mask[i] = 1.0;
  return es.eigenvectors() * mask.asDiagonal() * es.eigenvectors().transpose();
}

// Assemble (G, b, lambda) for the requested variant.
inline PenalizedQuadraticProblem build_problem(
    const PartiallyLabeledDataset& d, const EstimatorVariant& variant,
    double lambda, double rank_tol = 1e-10) {
  d.validate();
  if (!(lambda > 0)) throw InvalidInput("build_problem: lambda must be > 0");

  // Only the original lasso and the known-covariance variant make sense on
  // fully labeled data; every other variant consumes the unlabeled rows.
  const bool needs_unlabeled = variant.kind != EstimatorKind::supervised &&
                               variant.kind != EstimatorKind::known_sigma;
  if (needs_unlabeled && d.unlabeled_count() == 0)
    throw InvalidInput(std::string("build_problem: variant '") +
                       to_string(variant.kind) + "' requires unlabeled rows");

  PenalizedQuadraticProblem prob;
  prob.lambda = lambda;
  prob.moment = labeled_moment(d);

  switch (variant.kind) {
    case EstimatorKind::supervised:
      prob.gram = gram(d, SampleScope::labeled).matrix;
      break;
    case EstimatorKind::transductive:
      prob.gram = gram(d, SampleScope::unlabeled).matrix;
      break;
    case EstimatorKind::transductive_projected: {
      prob.gram = gram(d, SampleScope::unlabeled).matrix;
      prob.moment = range_projector(prob.gram, rank_tol) * prob.moment;
      break;
    }
    case EstimatorKind::semisupervised:
      prob.gram = gram(d, SampleScope::all).matrix;
      break;
    case EstimatorKind::known_sigma: {
      if (!variant.sigma)
        throw InvalidInput("build_problem: known_sigma requires a matrix");
      if (variant.sigma->rows() != d.dimension() ||
          variant.sigma->cols() != d.dimension())
        throw InvalidInput("build_problem: known_sigma dimension mismatch");
      GramMatrix g{*variant.sigma, SampleScope::population};
      g.validate();
      prob.gram = *variant.sigma;
      break;
    }
    case EstimatorKind::alquier: {
      const Matrix unlab = gram(d, SampleScope::unlabeled).matrix;
      const Matrix lab = gram(d, SampleScope::labeled).matrix;
      prob.moment = unlab * (pseudo_inverse(lab, rank_tol) * prob.moment);
      prob.gram = unlab;
      break;
    }
  }
  return prob;
}

}  // namespace sslasso
