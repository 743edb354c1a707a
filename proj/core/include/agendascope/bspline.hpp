#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace agendascope {

// Quantile with linear interpolation between order statistics (the
// "type 7" definition). `sorted` must be ascending and non-empty.
double quantile_sorted(std::span<const double> sorted, double p);

// Clamped B-spline basis of a given degree on [lower, upper] with the given
// interior knots. The full basis has interior.size() + degree + 1 functions
// and sums to one everywhere on [lower, upper].
class BSplineBasis {
 public:
  BSplineBasis(std::vector<double> interior_knots, double lower, double upper, int degree = 3);

  // Regression basis with `df` columns for a spline term: df - degree
  // interior knots placed at equally spaced quantiles of `values`, boundary
  // knots at the data range. Requires df > degree and a non-degenerate range.
  static BSplineBasis for_regression(std::span<const double> values, int df, int degree = 3);

  int degree() const { return degree_; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  const std::vector<double>& interior_knots() const { return interior_; }
  // Full knot sequence with degree+1 repeated boundary knots on each side.
  const std::vector<double>& knots() const { return knots_; }

  std::size_t full_size() const { return interior_.size() + static_cast<std::size_t>(degree_) + 1; }
  // Columns used in a design matrix: the full basis minus its first function.
  std::size_t df() const { return full_size() - 1; }

  // All basis functions at x; x outside [lower, upper] is clamped.
  std::vector<double> evaluate_full(double x) const;
  // Design columns at x (evaluate_full without the first function).
  std::vector<double> evaluate(double x) const;

 private:
  std::vector<double> interior_;
  double lower_;
  double upper_;
  int degree_;
  std::vector<double> knots_;
};

}  // namespace agendascope
