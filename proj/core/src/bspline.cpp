#include "agendascope/bspline.hpp"

#include <algorithm>
#include <cmath>

#include "agendascope/error.hpp"

namespace agendascope {

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InvalidArgument("quantile of empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

BSplineBasis::BSplineBasis(std::vector<double> interior_knots, double lower, double upper, int degree)
    : interior_(std::move(interior_knots)), lower_(lower), upper_(upper), degree_(degree) {
  if (degree_ < 0) throw InvalidArgument("spline degree must be >= 0");
  if (!(lower_ < upper_)) throw InvalidArgument("spline boundary knots must satisfy lower < upper");
  if (!std::is_sorted(interior_.begin(), interior_.end()))
    throw InvalidArgument("interior knots must be sorted");
  for (double k : interior_)
    if (!(k > lower_ && k < upper_)) throw InvalidArgument("interior knot outside boundary");
  knots_.assign(static_cast<std::size_t>(degree_) + 1, lower_);
  knots_.insert(knots_.end(), interior_.begin(), interior_.end());
  knots_.insert(knots_.end(), static_cast<std::size_t>(degree_) + 1, upper_);
}

BSplineBasis BSplineBasis::for_regression(std::span<const double> values, int df, int degree) {
  if (df <= degree) throw InvalidArgument("spline df must exceed the degree");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.empty() || !(sorted.front() < sorted.back()))
    throw InvalidArgument("spline covariate has no spread");
  const int n_interior = df - degree;
  std::vector<double> interior;
  for (int i = 1; i <= n_interior; ++i) {
    interior.push_back(quantile_sorted(sorted, static_cast<double>(i) / (n_interior + 1)));
  }
  const double lo = sorted.front(), hi = sorted.back();
  // Heavy ties can put a quantile on a boundary knot; keep interior knots strictly inside.
  const double eps = (hi - lo) * 1e-9;
  for (double& k : interior) k = std::clamp(k, lo + eps, hi - eps);
  return BSplineBasis(std::move(interior), lo, hi, degree);
}

std::vector<double> BSplineBasis::evaluate_full(double x) const {
  const int p = degree_;
  const std::size_t n = full_size();
  x = std::clamp(x, lower_, upper_);

  // Knot span index s with knots[s] <= x < knots[s+1], using the last
  // non-empty span at the upper boundary.
  std::size_t span;
  if (x >= upper_) {
    span = n - 1;
    while (span > static_cast<std::size_t>(p) && knots_[span] >= knots_[span + 1]) --span;
  } else {
    auto it = std::upper_bound(knots_.begin() + p, knots_.begin() + static_cast<std::ptrdiff_t>(n) + 1, x);
    span = static_cast<std::size_t>(it - knots_.begin()) - 1;
  }

  // Nonzero functions N_{span-p..span} by the triangular recurrence.
  std::vector<double> local(static_cast<std::size_t>(p) + 1, 0.0);
  std::vector<double> left(static_cast<std::size_t>(p) + 1), right(static_cast<std::size_t>(p) + 1);
  local[0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = x - knots_[span + 1 - static_cast<std::size_t>(j)];
    right[j] = knots_[span + static_cast<std::size_t>(j)] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double denom = right[r + 1] + left[j - r];
      const double temp = denom == 0.0 ? 0.0 : local[r] / denom;
      local[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    local[j] = saved;
  }

  std::vector<double> out(n, 0.0);
  for (int r = 0; r <= p; ++r) out[span - static_cast<std::size_t>(p) + static_cast<std::size_t>(r)] = local[r];
  return out;
}

std::vector<double> BSplineBasis::evaluate(double x) const {
  auto full = evaluate_full(x);
  return {full.begin() + 1, full.end()};
}

}  // namespace agendascope
