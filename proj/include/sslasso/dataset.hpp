#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sslasso/common.hpp"

namespace sslasso {

// Almost-sure bounds |X_ij| <= feature_bound, |Y_i| <= label_bound.
// `inferred` marks bounds read off the sample rather than supplied as
// population knowledge; bound checks that assume population bounds
// propagate this flag into their reports.
struct Bounds {
  double feature_bound = 0.0;
  double label_bound = 0.0;
  bool inferred = false;
};

// Feature rows for the whole sample, labels for the leading rows only.
// Labeled rows always come first, both in memory and in the CSV format.
struct PartiallyLabeledDataset {
  Matrix features;  // N x p
  Vector labels;    // length n <= N
  std::optional<Bounds> bounds;

  Index total_count() const { return features.rows(); }      // N
  Index labeled_count() const { return labels.size(); }      // n
  Index unlabeled_count() const {                             // m = N - n
    return features.rows() - labels.size();
  }
  Index dimension() const { return features.cols(); }        // p

  void validate() const {
    if (dimension() < 1) throw InvalidInput("dataset: p must be >= 1");
    if (labeled_count() < 1) throw InvalidInput("dataset: n must be >= 1");
    if (labeled_count() > total_count())
      throw InvalidInput("dataset: n must be <= N");
    if (bounds) {
      if (bounds->feature_bound < 0 || bounds->label_bound < 0)
        throw InvalidInput("dataset: bounds must be nonnegative");
      if (features.cwiseAbs().maxCoeff() > bounds->feature_bound)
        throw InvalidInput("dataset: |X_ij| exceeds the declared feature bound");
      if (labels.size() > 0 &&
          labels.cwiseAbs().maxCoeff() > bounds->label_bound)
        throw InvalidInput("dataset: |Y_i| exceeds the declared label bound");
    }
  }

  // Empirical max-abs bounds, flagged as inferred.
  Bounds inferred_bounds() const {
    Bounds b;
    b.feature_bound = features.cwiseAbs().maxCoeff();
    b.label_bound = labels.size() > 0 ? labels.cwiseAbs().maxCoeff() : 0.0;
    b.inferred = true;
    return b;
  }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

inline double parse_real(const std::string& field, std::size_t line_no,
                         std::size_t column_no) {
  const std::string t = trim(field);
  double value = 0.0;
  const char* begin = t.data();
  const char* end = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw ParseError("malformed numeric field '" + t + "' at line " +
                     std::to_string(line_no) + ", column " +
                     std::to_string(column_no));
  if (!std::isfinite(value))
    throw ParseError("non-finite value at line " + std::to_string(line_no) +
                     ", column " + std::to_string(column_no));
  return value;
}

}  // namespace detail

// CSV layout: header "x1,...,xp,y", one observation per row, empty y field
// for unlabeled rows. Labeled rows must precede unlabeled rows.
inline PartiallyLabeledDataset load_dataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("dataset: empty file");
  const auto header = detail::split_csv_line(line);
  if (header.size() < 2 || detail::trim(header.back()) != "y")
    throw ParseError("dataset: header must be x1,...,xp,y");
  const std::size_t p = header.size() - 1;
  for (std::size_t j = 0; j < p; ++j) {
    if (detail::trim(header[j]) != "x" + std::to_string(j + 1))
      throw ParseError("dataset: header column " + std::to_string(j + 1) +
                       " must be x" + std::to_string(j + 1));
  }

  std::vector<std::vector<double>> rows;
  std::vector<double> labels;
  bool seen_unlabeled = false;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != p + 1)
      throw ParseError("dataset: line " + std::to_string(line_no) + " has " +
                       std::to_string(fields.size()) + " fields, expected " +
                       std::to_string(p + 1));
    std::vector<double> x(p);
    for (std::size_t j = 0; j < p; ++j)
      x[j] = detail::parse_real(fields[j], line_no, j + 1);
    const std::string y_field = detail::trim(fields[p]);
    if (y_field.empty()) {
      seen_unlabeled = true;
    } else {
      if (seen_unlabeled)
        throw ParseError("dataset: labeled row at line " +
                         std::to_string(line_no) +
                         " after an unlabeled row; labeled rows must come first");
      labels.push_back(detail::parse_real(fields[p], line_no, p + 1));
    }
    rows.push_back(std::move(x));
  }
  if (rows.empty()) throw ParseError("dataset: no data rows");
  if (labels.empty()) throw ParseError("dataset: no labeled rows (n = 0)");

  PartiallyLabeledDataset d;
  d.features.resize(static_cast<Index>(rows.size()), static_cast<Index>(p));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < p; ++j)
      d.features(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  d.labels = Eigen::Map<Vector>(labels.data(), static_cast<Index>(labels.size()));
  d.validate();
  return d;
}

inline PartiallyLabeledDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("dataset: cannot open " + path.string());
  return load_dataset(in);
}

// The affine maps applied by center_scale. Features: x -> (x - offset)/scale.
// Labels are centered but never rescaled; labels_scaled records that choice.
struct CenterScaleTransform {
  Vector feature_offset;
  Vector feature_scale;
  double label_offset = 0.0;
  bool labels_scaled = false;
};

struct CenterScaleResult {
  PartiallyLabeledDataset data;
  CenterScaleTransform transform;
};

// Center and scale every feature column to mean 0 and mean-square 1 over all
// N rows; center labels over the n labeled rows. Mean-square (not unbiased
// variance) is used so that scaled columns satisfy E[(X^j)^2] = 1.
inline CenterScaleResult center_scale(const PartiallyLabeledDataset& d) {
  d.validate();
  const Index N = d.total_count();
  const Index p = d.dimension();

  CenterScaleResult out;
  out.transform.feature_offset.resize(p);
  out.transform.feature_scale.resize(p);
  out.data.features.resize(N, p);

  for (Index j = 0; j < p; ++j) {
    const double mean = d.features.col(j).mean();
    Vector centered = d.features.col(j).array() - mean;
    const double ms = centered.squaredNorm() / static_cast<double>(N);
    const double scale = std::sqrt(ms);
    const double col_mag = d.features.col(j).cwiseAbs().maxCoeff();
    if (scale <= 1e-13 * std::max(1.0, col_mag))
      throw InvalidInput("center_scale: column x" + std::to_string(j + 1) +
                         " is constant (zero variance)");
    out.transform.feature_offset[j] = mean;
    out.transform.feature_scale[j] = scale;
    out.data.features.col(j) = centered / scale;
  }

  out.transform.label_offset = d.labels.mean();
  out.data.labels = d.labels.array() - out.transform.label_offset;
  // Bounds describe the original coordinates; they do not survive the map.
  out.data.bounds.reset();
  return out;
}

enum class SampleScope { labeled, unlabeled, all, population };

inline const char* to_string(SampleScope s) {
  switch (s) {
    case SampleScope::labeled: return "labeled";
    case SampleScope::unlabeled: return "unlabeled";
    case SampleScope::all: return "all";
    case SampleScope::population: return "population";
  }
  return "?";
}

// Symmetric PSD second-moment matrix tagged with the sample it averages.
struct GramMatrix {
  Matrix matrix;
  SampleScope scope = SampleScope::all;

  void validate() const {
    check_symmetric(matrix, "GramMatrix");
    Eigen::SelfAdjointEigenSolver<Matrix> es(matrix, Eigen::EigenvaluesOnly);
    const double top = es.eigenvalues().maxCoeff();
    if (es.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, top))
      throw InvalidInput("GramMatrix: matrix is not positive semidefinite");
  }
};

// (1/count) sum of X_i X_i^T over the rows of the requested scope.
inline GramMatrix gram(const PartiallyLabeledDataset& d, SampleScope scope) {
  d.validate();
  const Index n = d.labeled_count();
  const Index N = d.total_count();
  Index begin = 0, count = 0;
  switch (scope) {
    case SampleScope::labeled: begin = 0; count = n; break;
    case SampleScope::unlabeled: begin = n; count = N - n; break;
    case SampleScope::all: begin = 0; count = N; break;
    case SampleScope::population:
      throw InvalidInput("gram: population scope is not an empirical scope");
  }
  if (count == 0)
    throw InvalidInput(std::string("gram: empty scope '") + to_string(scope) + "'");
  const auto block = d.features.middleRows(begin, count);
  GramMatrix g;
  g.matrix = (block.transpose() * block) / static_cast<double>(count);
  g.scope = scope;
  return g;
}

// b = (1/n) X_lab^T Y, the linear term shared by every estimator variant.
inline Vector labeled_moment(const PartiallyLabeledDataset& d) {
  d.validate();
  const Index n = d.labeled_count();
  return d.features.topRows(n).transpose() * d.labels /
         static_cast<double>(n);
}

}  // namespace sslasso
