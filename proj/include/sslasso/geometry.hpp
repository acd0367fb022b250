#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "sslasso/common.hpp"
#include "sslasso/rng.hpp"

namespace sslasso {

enum class ConeKind { compatibility, weak_compatibility, restricted_eigenvalue };

inline const char* to_string(ConeKind k) {
  switch (k) {
    case ConeKind::compatibility: return "compatibility";
    case ConeKind::weak_compatibility: return "weak_compatibility";
    case ConeKind::restricted_eigenvalue: return "restricted_eigenvalue";
  }
  return "?";
}

enum class Certification { exact_enumeration, heuristic_upper, sampled_upper };

inline const char* to_string(Certification c) {
  switch (c) {
    case Certification::exact_enumeration: return "exact_enumeration";
    case Certification::heuristic_upper: return "heuristic_upper";
    case Certification::sampled_upper: return "sampled_upper";
  }
  return "?";
}

struct ConeConstantReport {
  double value = 0.0;
  ConeKind kind = ConeKind::compatibility;
  IndexSet support;       // J
  double cone_scale = 0;  // c
  Certification certification = Certification::heuristic_upper;
  Vector witness;         // direction attaining (or upper-bounding by) value
};

// The defining ratio of each constant, evaluated at an arbitrary cone point.
// Substituting a report's witness reproduces its value.
inline double cone_ratio(const Matrix& m, const IndexSet& support, double c,
                         ConeKind kind, const Vector& v) {
  const double quad = v.dot(m * v);
  const double on = l1_norm_on(v, support);
  const double off = l1_norm_off(v, support);
  const double size = static_cast<double>(support.size());
  switch (kind) {
    case ConeKind::compatibility: {
      const double denom = c * on - off;
      return c * c * size * quad / (denom * denom);
    }
    case ConeKind::weak_compatibility:
      return size * quad / (on * on);
    case ConeKind::restricted_eigenvalue: {
      double on2 = 0.0;
      for (Index j : support) on2 += v[j] * v[j];
      return quad / on2;
    }
  }
  return 0.0;
}

namespace detail {

// Euclidean projection onto the simplex {w >= 0, sum w = radius}.
inline void project_simplex(Vector& w, double radius) {
  const Index n = w.size();
  std::vector<double> u(w.data(), w.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cum = 0.0, tau = 0.0;
  Index rho = 0;
  for (Index i = 0; i < n; ++i) {
    cum += u[i];
    const double t = (cum - radius) / static_cast<double>(i + 1);
    if (u[i] - t > 0) {
      rho = i + 1;
      tau = t;
    }
  }
  (void)rho;
  for (Index i = 0; i < n; ++i) w[i] = std::max(w[i] - tau, 0.0);
}

// Euclidean projection onto the l1 ball of the given radius.
inline void project_l1_ball(Vector& z, double radius) {
  if (radius <= 0) {
    z.setZero();
    return;
  }
  if (z.lpNorm<1>() <= radius) return;
  Vector a = z.cwiseAbs();
  project_simplex(a, radius);
  for (Index i = 0; i < z.size(); ++i) z[i] = z[i] >= 0 ? a[i] : -a[i];
}

// Euclidean projection onto {w >= 0, c * sum(w) - ||z||_1 >= 1}.
// KKT form: w = max(w0 + t c, 0), z = shrink(z0, t) with the multiplier t
// found by bisection on the nondecreasing slack c*sum(w(t)) - ||z(t)||_1.
inline void project_kappa_slab(Vector& w, Vector& z, double c) {
  auto slack = [&](double t) {
    double sw = 0.0;
    for (Index i = 0; i < w.size(); ++i) sw += std::max(w[i] + t * c, 0.0);
    double sz = 0.0;
    for (Index i = 0; i < z.size(); ++i)
      sz += std::max(std::abs(z[i]) - t, 0.0);
    return c * sw - sz;
  };
  if (slack(0.0) >= 1.0) {
    w = w.cwiseMax(0.0);
    return;
  }
  double hi = 1.0;
  while (slack(hi) < 1.0) hi *= 2.0;
  double lo = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (slack(mid) < 1.0)
      lo = mid;
    else
      hi = mid;
  }
  const double t = hi;
  for (Index i = 0; i < w.size(); ++i) w[i] = std::max(w[i] + t * c, 0.0);
  for (Index i = 0; i < z.size(); ++i) {
    const double a = std::max(std::abs(z[i]) - t, 0.0);
    z[i] = z[i] >= 0 ? a : -a;
  }
}

struct QuadraticMinimum {
  Vector point;
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Accelerated projected gradient (gradient-restart FISTA) for
// min v'Mv over a convex set given by its projection operator.
template <class Projection>
QuadraticMinimum minimize_quadratic(const Matrix& m, double lambda_max,
                                    Vector start, const Projection& project,
                                    double stat_tol, int max_iterations) {
  const double lipschitz = std::max(2.0 * lambda_max, 1e-12);
  const double step = 1.0 / lipschitz;

  Vector x = std::move(start);
  project(x);
  Vector y = x;
  double t = 1.0;

  QuadraticMinimum out;
  for (int it = 1; it <= max_iterations; ++it) {
    const Vector grad_y = 2.0 * (m * y);
    Vector x_new = y - step * grad_y;
    project(x_new);
    const Vector dx = x_new - x;
    if (grad_y.dot(dx) > 0) {
      t = 1.0;
      y = x_new;
    } else {
      const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = x_new + ((t - 1.0) / t_new) * dx;
      t = t_new;
    }
    x = std::move(x_new);

    if (it % 8 == 0 || it == max_iterations) {
      Vector probe = x - step * (2.0 * (m * x));
      project(probe);
      const double gm = (x - probe).lpNorm<Eigen::Infinity>() / step;
      if (gm <= stat_tol) {
        out.converged = true;
        out.iterations = it;
        break;
      }
      out.iterations = it;
    }
  }
  out.point = x;
  out.value = x.dot(m * x);
  return out;
}

inline double top_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

constexpr double kStationarityTol = 1e-10;
constexpr int kMaxIterations = 400000;

}  // namespace detail

// Compatibility constant
//   kappa_M(J, c) = inf { c^2 |J| v'Mv / (c||v_J||_1 - ||v_Jc||_1)^2 :
//                         ||v_Jc||_1 < c ||v_J||_1 }.
// The ratio is scale-invariant, so the infimum is computed by enumerating
// the 2^|J| sign patterns of v_J and, per pattern, minimizing the convex
// quadratic v'Mv over the closed slice {s.v_J >= 0, c s'v_J - ||v_Jc||_1 >= 1};
// the closure leaves the infimum unchanged.
inline ConeConstantReport compatibility(const Matrix& m, const IndexSet& support,
                                        double c) {
  check_symmetric(m, "compatibility");
  const Index p = m.rows();
  check_support(support, p);
  if (!(c > 0)) throw InvalidInput("compatibility: c must be > 0");
  const std::size_t q = support.size();
  if (q > 14)
    throw InvalidInput("compatibility: |J| > 14, exact enumeration refused; "
                       "use cone_sample_min");

  const double lambda_max = detail::top_eigenvalue(m);
  const double tol = detail::kStationarityTol * std::max(1.0, lambda_max);

  ConeConstantReport report;
  report.kind = ConeKind::compatibility;
  report.support = support;
  report.cone_scale = c;
  report.certification = Certification::exact_enumeration;
  report.value = std::numeric_limits<double>::infinity();

  std::vector<char> in_support(static_cast<std::size_t>(p), 0);
  for (Index j : support) in_support[static_cast<std::size_t>(j)] = 1;

  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << q); ++bits) {
    Vector signs = Vector::Zero(p);
    for (std::size_t i = 0; i < q; ++i)
      signs[support[i]] = (bits >> i) & 1 ? 1.0 : -1.0;

    auto project = [&](Vector& v) {
      Vector w(static_cast<Index>(q)), z(p - static_cast<Index>(q));
      Index wi = 0, zi = 0;
      for (Index j = 0; j < p; ++j) {
        if (in_support[static_cast<std::size_t>(j)])
          w[wi++] = signs[j] * v[j];
        else
          z[zi++] = v[j];
      }
      detail::project_kappa_slab(w, z, c);
      wi = zi = 0;
      for (Index j = 0; j < p; ++j) {
        if (in_support[static_cast<std::size_t>(j)])
          v[j] = signs[j] * w[wi++];
        else
          v[j] = z[zi++];
      }
    };

    Vector start = Vector::Zero(p);
    for (Index j : support) start[j] = signs[j] / (c * static_cast<double>(q));

    auto result = detail::minimize_quadratic(m, lambda_max, std::move(start),
                                             project, tol,
                                             detail::kMaxIterations);
    if (!result.converged)
      throw SubproblemFailure("compatibility: sign-pattern subproblem did not "
                              "reach stationarity");
    const double value = c * c * static_cast<double>(q) * result.value;
    if (value < report.value) {
      report.value = value;
      report.witness = result.point;
    }
  }
  return report;
}

// Weak compatibility constant
//   kappa_bar_M(J, c) = inf { |J| v'Mv / ||v_J||_1^2 : ||v_Jc||_1 < c ||v_J||_1 }.
// Per sign pattern the slice is {s'v_J = 1, s.v_J >= 0, ||v_Jc||_1 <= c} --
// a simplex times an l1 ball.
inline ConeConstantReport weak_compatibility(const Matrix& m,
                                             const IndexSet& support, double c) {
  check_symmetric(m, "weak_compatibility");
  const Index p = m.rows();
  check_support(support, p);
  if (!(c > 0)) throw InvalidInput("weak_compatibility: c must be > 0");
  const std::size_t q = support.size();
  if (q > 14)
    throw InvalidInput("weak_compatibility: |J| > 14, exact enumeration "
                       "refused; use cone_sample_min");

  const double lambda_max = detail::top_eigenvalue(m);
  const double tol = detail::kStationarityTol * std::max(1.0, lambda_max);

  ConeConstantReport report;
  report.kind = ConeKind::weak_compatibility;
  report.support = support;
  report.cone_scale = c;
  report.certification = Certification::exact_enumeration;
  report.value = std::numeric_limits<double>::infinity();

  std::vector<char> in_support(static_cast<std::size_t>(p), 0);
  for (Index j : support) in_support[static_cast<std::size_t>(j)] = 1;

  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << q); ++bits) {
    Vector signs = Vector::Zero(p);
    for (std::size_t i = 0; i < q; ++i)
      signs[support[i]] = (bits >> i) & 1 ? 1.0 : -1.0;

    auto project = [&](Vector& v) {
      Vector w(static_cast<Index>(q)), z(p - static_cast<Index>(q));
      Index wi = 0, zi = 0;
      for (Index j = 0; j < p; ++j) {
        if (in_support[static_cast<std::size_t>(j)])
          w[wi++] = signs[j] * v[j];
        else
          z[zi++] = v[j];
      }
      detail::project_simplex(w, 1.0);
      detail::project_l1_ball(z, c);
      wi = zi = 0;
      for (Index j = 0; j < p; ++j) {
        if (in_support[static_cast<std::size_t>(j)])
          v[j] = signs[j] * w[wi++];
        else
          v[j] = z[zi++];
      }
    };

    Vector start = Vector::Zero(p);
    for (Index j : support) start[j] = signs[j] / static_cast<double>(q);

    auto result = detail::minimize_quadratic(m, lambda_max, std::move(start),
                                             project, tol,
                                             detail::kMaxIterations);
    if (!result.converged)
      throw SubproblemFailure("weak_compatibility: sign-pattern subproblem "
                              "did not reach stationarity");
    const double value = static_cast<double>(q) * result.value;
    if (value < report.value) {
      report.value = value;
      report.witness = result.point;
    }
  }
  return report;
}

// Restricted eigenvalue
//   kappa_RE_M(J, c) = inf { v'Mv : ||v_Jc||_1 <= c ||v_J||_1, ||v_J||_2 = 1 }.
// The sphere constraint makes this nonconvex; the value returned is the best
// of a multi-start projected descent and the (rescaled) weak-compatibility
// witness, hence always an upper bound with kappa_RE <= kappa_bar.
inline ConeConstantReport restricted_eigenvalue(const Matrix& m,
                                                const IndexSet& support,
                                                double c, int starts = 8,
                                                std::uint64_t seed = 0x5eedULL) {
  check_symmetric(m, "restricted_eigenvalue");
  const Index p = m.rows();
  check_support(support, p);
  if (!(c > 0)) throw InvalidInput("restricted_eigenvalue: c must be > 0");
  if (starts < 1) throw InvalidInput("restricted_eigenvalue: starts must be >= 1");

  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  const double lambda_max = es.eigenvalues().maxCoeff();
  const double step = 1.0 / std::max(2.0 * lambda_max, 1e-12);

  std::vector<char> in_support(static_cast<std::size_t>(p), 0);
  for (Index j : support) in_support[static_cast<std::size_t>(j)] = 1;

  Rng rng(derive_seed(seed, 0));
  auto renormalize = [&](Vector& v) {
    double on2 = 0.0;
    for (Index j : support) on2 += v[j] * v[j];
    double norm = std::sqrt(on2);
    if (norm < 1e-12) {
      for (Index j : support) v[j] = rng.normal();
      on2 = 0.0;
      for (Index j : support) on2 += v[j] * v[j];
      norm = std::sqrt(on2);
    }
    for (Index j : support) v[j] /= norm;
    double on1 = 0.0;
    for (Index j : support) on1 += std::abs(v[j]);
    Vector off(p - static_cast<Index>(support.size()));
    Index zi = 0;
    for (Index j = 0; j < p; ++j)
      if (!in_support[static_cast<std::size_t>(j)]) off[zi++] = v[j] / norm;
    detail::project_l1_ball(off, c * on1);
    zi = 0;
    for (Index j = 0; j < p; ++j)
      if (!in_support[static_cast<std::size_t>(j)]) v[j] = off[zi++];
  };

  ConeConstantReport report;
  report.kind = ConeKind::restricted_eigenvalue;
  report.support = support;
  report.cone_scale = c;
  report.certification = Certification::heuristic_upper;
  report.value = std::numeric_limits<double>::infinity();

  auto consider = [&](const Vector& v) {
    const double value = cone_ratio(m, support, c, ConeKind::restricted_eigenvalue, v);
    if (value < report.value) {
      report.value = value;
      report.witness = v;
    }
  };

  auto descend = [&](Vector v) {
    renormalize(v);
    consider(v);
    double best = v.dot(m * v);
    int stall = 0;
    for (int it = 0; it < 4000 && stall < 200; ++it) {
      v -= step * (2.0 * (m * v));
      renormalize(v);
      const double value = v.dot(m * v);
      if (value < best - 1e-14 * std::max(1.0, best))
        stall = 0;
      else
        ++stall;
      best = std::min(best, value);
      consider(v);
    }
  };

  // Start 1: smallest eigenvector of M.
  descend(es.eigenvectors().col(0));
  // Start 2: the weak-compatibility witness; after normalizing its support
  // block this point shows kappa_RE <= kappa_bar, and the inequality is
  // enforced by keeping its value as a candidate.
  const auto kb = weak_compatibility(m, support, c);
  descend(kb.witness);
  for (int s = 2; s < starts; ++s) {
    Vector v(p);
    for (Index j = 0; j < p; ++j) v[j] = rng.normal();
    if (s % 2 == 0)
      for (Index j = 0; j < p; ++j)
        if (!in_support[static_cast<std::size_t>(j)]) v[j] *= 0.1;
    descend(v);
  }
  return report;
}

namespace detail {

inline void enumerate_supports(Index p, int size,
                               const std::function<void(const IndexSet&)>& fn) {
  IndexSet current(static_cast<std::size_t>(size));
  std::function<void(Index, int)> rec = [&](Index next, int chosen) {
    if (chosen == size) {
      fn(current);
      return;
    }
    for (Index j = next; j <= p - (size - chosen); ++j) {
      current[static_cast<std::size_t>(chosen)] = j;
      rec(j + 1, chosen + 1);
    }
  };
  rec(0, 0);
}

inline double choose(Index p, int s) {
  double v = 1.0;
  for (int i = 0; i < s; ++i)
    v *= static_cast<double>(p - i) / static_cast<double>(i + 1);
  return v;
}

}  // namespace detail

// min over supports |J| = s of restricted_eigenvalue(M, J, c). Supports of
// size below s never attain a smaller value (rescaling an RE-feasible point
// of a subset stays feasible for the superset with no larger objective), so
// enumerating size-s supports covers |J| <= s. Beyond the enumeration budget
// the minimum is taken over deterministic heuristic and sampled supports.
inline ConeConstantReport restricted_eigenvalue_over_supports(
    const Matrix& m, int s, double c, int starts = 4,
    int sampled_supports = 64, std::uint64_t seed = 0x5eedULL) {
  check_symmetric(m, "restricted_eigenvalue_over_supports");
  const Index p = m.rows();
  if (s < 1 || s > p)
    throw InvalidInput("restricted_eigenvalue_over_supports: need 1 <= s <= p");

  ConeConstantReport best;
  best.kind = ConeKind::restricted_eigenvalue;
  best.cone_scale = c;
  best.certification = Certification::heuristic_upper;
  best.value = std::numeric_limits<double>::infinity();

  auto consider = [&](const IndexSet& support) {
    auto r = restricted_eigenvalue(m, support, c, starts, derive_seed(seed, 1));
    if (r.value < best.value) {
      best.value = r.value;
      best.support = r.support;
      best.witness = r.witness;
    }
  };

  if (detail::choose(p, s) <= 4000.0) {
    detail::enumerate_supports(p, s, consider);
    return best;
  }

  // Heuristic supports: smallest diagonal entries, and the heaviest
  // coordinates of the bottom eigenvector.
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  std::vector<Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(),
            [&](Index a, Index b) { return m(a, a) < m(b, b); });
  IndexSet diag_support(order.begin(), order.begin() + s);
  std::sort(diag_support.begin(), diag_support.end());
  consider(diag_support);

  const Vector bottom = es.eigenvectors().col(0).cwiseAbs();
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(),
            [&](Index a, Index b) { return bottom[a] > bottom[b]; });
  IndexSet eig_support(order.begin(), order.begin() + s);
  std::sort(eig_support.begin(), eig_support.end());
  consider(eig_support);

  Rng rng(derive_seed(seed, 2));
  for (int k = 0; k < sampled_supports; ++k) {
    IndexSet support;
    while (static_cast<int>(support.size()) < s) {
      const Index j = rng.below(p);
      if (!contains(support, j)) {
        support.push_back(j);
        std::sort(support.begin(), support.end());
      }
    }
    consider(support);
  }
  return best;
}

// Monte Carlo upper bound on a cone constant: the minimum of the defining
// ratio over `samples` rejection-sampled cone directions. Deterministic given
// the seed; the first draws of a longer run coincide with a shorter run, so
// the value is non-increasing in `samples` for a fixed seed.
inline double cone_sample_min(const Matrix& m, const IndexSet& support,
                              double c, ConeKind kind, std::int64_t samples,
                              std::uint64_t seed) {
  check_symmetric(m, "cone_sample_min");
  const Index p = m.rows();
  check_support(support, p);
  if (samples < 1) throw InvalidInput("cone_sample_min: samples must be >= 1");

  Rng rng(seed);
  double best = std::numeric_limits<double>::infinity();
  std::int64_t accepted = 0;
  Vector v(p);
  while (accepted < samples) {
    for (Index j = 0; j < p; ++j) v[j] = rng.normal();
    const double on = l1_norm_on(v, support);
    const double off = l1_norm_off(v, support);
    if (!(off < c * on)) continue;
    ++accepted;
    best = std::min(best, cone_ratio(m, support, c, kind, v));
  }
  return best;
}

// Deviation threshold t with P(||Sigma - Sigma_hat||_inf >= t) <= delta under
// Hoeffding: t = B_X^2 sqrt(log(2 p^2 / delta) / (2N)).
inline double sup_norm_deviation_threshold(int p, std::int64_t total_count,
                                           double feature_bound, double delta) {
  if (p < 1 || total_count < 1 || !(feature_bound > 0) || !(delta > 0) ||
      !(delta < 1))
    throw InvalidInput("sup_norm_deviation_threshold: bad inputs");
  const double pd = static_cast<double>(p);
  return feature_bound * feature_bound *
         std::sqrt(std::log(2.0 * pd * pd / delta) /
                   (2.0 * static_cast<double>(total_count)));
}

// High-probability lower bound on lambda_min(Sigma^{-1/2} Sigma_hat
// Sigma^{-1/2}) from the matrix Chernoff inequality. Valid only when
// 2 B_X^2 p ||Sigma^{-1}|| log(p/delta) <= N.
inline double lambda_min_threshold(int p, std::int64_t total_count,
                                   double feature_bound, double sigma_inv_norm,
                                   double delta) {
  if (p < 1 || total_count < 1 || !(feature_bound > 0) ||
      !(sigma_inv_norm > 0) || !(delta > 0) || !(delta < 1))
    throw InvalidInput("lambda_min_threshold: bad inputs");
  const double numer = 2.0 * feature_bound * feature_bound *
                       static_cast<double>(p) * sigma_inv_norm *
                       std::log(static_cast<double>(p) / delta);
  if (numer > static_cast<double>(total_count))
    throw PreconditionViolation(
        "lambda_min_threshold: requires 2 B_X^2 p ||Sigma^{-1}|| log(p/delta) "
        "<= N");
  return 1.0 - std::sqrt(numer / static_cast<double>(total_count));
}

}  // namespace sslasso
