#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

namespace sslasso {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Zero-based feature indices, strictly increasing.
using IndexSet = std::vector<Index>;

// A caller-supplied value violates a documented precondition.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed external data (CSV datasets, config files).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The penalized objective has no finite minimizer.
class UnboundedProblem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A bound's hypothesis (sample-size condition, scope requirement) fails,
// so evaluating the bound would be meaningless.
class PreconditionViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An inner optimization subproblem failed to reach its tolerance.
class SubproblemFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void check_support(const IndexSet& support, Index p) {
  if (support.empty()) throw InvalidInput("support set must be nonempty");
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (support[i] < 0 || support[i] >= p)
      throw InvalidInput("support index " + std::to_string(support[i]) +
                         " outside [0, " + std::to_string(p) + ")");
    if (i > 0 && support[i] <= support[i - 1])
      throw InvalidInput("support indices must be strictly increasing");
  }
}

inline bool contains(const IndexSet& support, Index j) {
  return std::binary_search(support.begin(), support.end(), j);
}

inline double l1_norm_on(const Vector& v, const IndexSet& support) {
  double s = 0.0;
  for (Index j : support) s += std::abs(v[j]);
  return s;
}

inline double l1_norm_off(const Vector& v, const IndexSet& support) {
  return v.lpNorm<1>() - l1_norm_on(v, support);
}

inline void check_symmetric(const Matrix& m, const char* what,
                            double rel_tol = 1e-12) {
  if (m.rows() != m.cols())
    throw InvalidInput(std::string(what) + ": matrix is not square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > rel_tol * scale * 10)
    throw InvalidInput(std::string(what) + ": matrix is not symmetric (gap " +
                       std::to_string(asym) + ")");
}

}  // namespace sslasso
