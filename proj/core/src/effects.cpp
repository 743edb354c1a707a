#include "agendascope/effects.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>

#include "agendascope/bspline.hpp"
#include "agendascope/error.hpp"
#include "agendascope/parallel.hpp"

namespace agendascope {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::pair<double, double> central_interval(std::vector<double> values, double level) {
  if (values.empty()) throw InvalidArgument("interval of empty sample");
  const double tail = (1.0 - level) / 2.0;
  std::sort(values.begin(), values.end());
  const double lo = quantile_sorted(values, tail);
  std::vector<double> neg(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) neg[i] = -values[values.size() - 1 - i];
  const double hi = -quantile_sorted(neg, tail);
  return {lo, hi};
}

namespace {

// Mean computed relative to the first element, so a constant sample returns
// that constant exactly.
double shifted_mean(const std::vector<double>& v) {
  const double base = v.front();
  double s = 0.0;
  for (double x : v) s += x - base;
  return base + s / static_cast<double>(v.size());
}

struct CompositionSetup {
  PrevalenceDesign design;
  std::vector<std::size_t> model_rows;  // model row of each design row
};

CompositionSetup prepare(const FittedModel& model, const Formula& formula, const CovariateTable& covs, int topic,
                         const std::string& target, int n_draws) {
  if (topic < 0 || topic >= model.k) throw InvalidArgument("topic index out of range");
  if (n_draws < kMinDraws) throw InvalidArgument("n_draws must be >= " + std::to_string(kMinDraws));
  if (!formula.find(target)) throw InvalidArgument("target '" + target + "' does not appear in the formula");
  if (model.nu.size() != static_cast<std::size_t>(model.eta.rows()) || model.doc_ids.size() != model.nu.size())
    throw DimensionMismatch("model posterior covariances are missing or misaligned");

  std::unordered_map<std::string, std::size_t> cov_rows;
  for (std::size_t r = 0; r < covs.rows(); ++r) cov_rows.emplace(covs.doc_ids()[r], r);
  std::vector<std::size_t> rows;
  for (const auto& id : model.doc_ids) {
    auto it = cov_rows.find(id);
    if (it == cov_rows.end()) throw InvalidArgument("no covariates for model document '" + id + "'");
    rows.push_back(it->second);
  }
  CompositionSetup s;
  s.design = build_design(formula, covs.select_rows(rows));
  s.model_rows.reserve(s.design.rows());
  for (auto r : s.design.source_rows) s.model_rows.push_back(r);
  return s;
}

// Prediction rows for each grid value of `target`.
Eigen::MatrixXd prediction_rows(const PrevalenceDesign& design, const std::string& target,
                                const std::vector<CovariateValue>& grid, const EffectOptions& options) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(design.cols()));
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto row = static_cast<Eigen::Index>(g);
    if (options.average_over_observed) {
      Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(out.cols());
      for (std::size_t r = 0; r < design.rows(); ++r) {
        auto values = design.observed_values(r);
        values[target] = grid[g];
        acc += design.encode(values);
      }
      out.row(row) = acc / static_cast<double>(design.rows());
    } else {
      auto values = design.reference_values();
      values[target] = grid[g];
      out.row(row) = design.encode(values);
    }
  }
  return out;
}

// Symmetric square root of a PSD matrix, exact zero for a zero matrix.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
  if (m.isZero(0.0)) return Eigen::MatrixXd::Zero(m.rows(), m.cols());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

// n_draws x G matrix of predicted topic proportions.
Eigen::MatrixXd composition_draws(const FittedModel& model, const CompositionSetup& setup, int topic,
                                  const Eigen::MatrixXd& predict, int n_draws, std::uint64_t seed,
                                  unsigned threads) {
  const Eigen::MatrixXd& X = setup.design.X;
  const Eigen::Index n = X.rows(), p = X.cols();
  if (n <= p) throw InsufficientData("effect regression needs more rows than columns");

  Eigen::LDLT<Eigen::MatrixXd> xtx(X.transpose() * X);
  if (xtx.info() != Eigen::Success || !xtx.isPositive() || xtx.rcond() < 1e-13)
    throw SingularDesign("X'X is singular in the effect regression");
  const Eigen::MatrixXd xtx_inv = xtx.solve(Eigen::MatrixXd::Identity(p, p));
  const Eigen::MatrixXd coef_chol = psd_sqrt(0.5 * (xtx_inv + xtx_inv.transpose()));

  std::vector<Eigen::MatrixXd> nu_sqrt(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    nu_sqrt[static_cast<std::size_t>(i)] = psd_sqrt(model.nu[setup.model_rows[static_cast<std::size_t>(i)]]);

  const Eigen::Index k1 = model.eta.cols();
  Eigen::MatrixXd out(n_draws, predict.rows());
  parallel_for(static_cast<std::size_t>(n_draws), threads, [&](std::size_t s) {
    std::mt19937_64 rng(derive_seed(seed, s));
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd y(n), z(k1);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto mr = static_cast<Eigen::Index>(setup.model_rows[static_cast<std::size_t>(i)]);
      for (Eigen::Index j = 0; j < k1; ++j) z(j) = normal(rng);
      const Eigen::VectorXd eta = model.eta.row(mr).transpose() + nu_sqrt[static_cast<std::size_t>(i)] * z;
      y(i) = softmax_with_reference(eta)(topic);
    }
    const Eigen::VectorXd b = xtx.solve(X.transpose() * y);
    const double rss = (y - X * b).squaredNorm();
    // Residuals at rounding level are an exact fit.
    const double s2 = rss <= 1e-24 * y.squaredNorm() ? 0.0 : rss / static_cast<double>(n - p);
    Eigen::VectorXd w(p);
    for (Eigen::Index j = 0; j < p; ++j) w(j) = normal(rng);
    const Eigen::VectorXd coef = s2 == 0.0 ? b : Eigen::VectorXd(b + std::sqrt(s2) * (coef_chol * w));
    out.row(static_cast<Eigen::Index>(s)) = (predict * coef).cwiseMax(0.0).cwiseMin(1.0).transpose();
  });
  return out;
}

}  // namespace

std::vector<CovariateValue> default_grid(const PrevalenceDesign& design, const CovariateTable& covs,
                                         const std::string& covariate, std::size_t points, bool log_scale) {
  const auto& col = covs.column(covariate);
  const auto* enc = design.encoding(covariate);
  if (!enc) throw InvalidArgument("covariate '" + covariate + "' is not in the design");
  std::vector<CovariateValue> grid;
  if (col.kind == ColumnKind::kCategorical) {
    for (const auto& l : enc->levels) grid.emplace_back(l);
    return grid;
  }
  if (col.kind == ColumnKind::kBoolean) return {0.0, 1.0};
  const auto& raw = design.raw.at(covariate);
  double lo = std::get<double>(raw.front()), hi = lo;
  for (const auto& v : raw) {
    lo = std::min(lo, std::get<double>(v));
    hi = std::max(hi, std::get<double>(v));
  }
  points = std::max<std::size_t>(points, 2);
  const bool use_log = log_scale && lo > 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(points - 1);
    double x = use_log ? std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo))) : lo + t * (hi - lo);
    if (i == 0) x = lo;
    if (i + 1 == points) x = hi;
    grid.emplace_back(x);
  }
  return grid;
}

EffectEstimate estimate_effect(const FittedModel& model, const Formula& formula, const CovariateTable& covs,
                               int topic, const std::string& target, const std::vector<CovariateValue>& grid,
                               int n_draws, std::uint64_t seed, const EffectOptions& options) {
  if (grid.empty()) throw InvalidArgument("effect grid is empty");
  CompositionSetup setup = prepare(model, formula, covs, topic, target, n_draws);
  const Eigen::MatrixXd predict = prediction_rows(setup.design, target, grid, options);
  const Eigen::MatrixXd draws = composition_draws(model, setup, topic, predict, n_draws, seed, options.threads);

  EffectEstimate e;
  e.topic_index = topic;
  e.covariate = target;
  e.grid = grid;
  e.n_draws = n_draws;
  const auto G = static_cast<Eigen::Index>(grid.size());
  e.mean.resize(G);
  e.ci_lower.resize(G);
  e.ci_upper.resize(G);
  std::vector<double> col(static_cast<std::size_t>(n_draws));
  for (Eigen::Index g = 0; g < G; ++g) {
    for (int s = 0; s < n_draws; ++s) col[static_cast<std::size_t>(s)] = draws(s, g);
    e.mean(g) = shifted_mean(col);
    auto [lo, hi] = central_interval(col);
    e.ci_lower(g) = lo;
    e.ci_upper(g) = hi;
  }
  return e;
}

ContrastEstimate estimate_contrast(const FittedModel& model, const Formula& formula, const CovariateTable& covs,
                                   int topic, const std::string& target, const CovariateValue& level_a,
                                   const CovariateValue& level_b, int n_draws, std::uint64_t seed,
                                   const EffectOptions& options) {
  CompositionSetup setup = prepare(model, formula, covs, topic, target, n_draws);
  const Eigen::MatrixXd predict = prediction_rows(setup.design, target, {level_a, level_b}, options);
  const Eigen::MatrixXd draws = composition_draws(model, setup, topic, predict, n_draws, seed, options.threads);

  ContrastEstimate c;
  c.topic_index = topic;
  c.covariate = target;
  c.level_a = level_a;
  c.level_b = level_b;
  c.n_draws = n_draws;
  std::vector<double> diff(static_cast<std::size_t>(n_draws));
  for (int s = 0; s < n_draws; ++s) diff[static_cast<std::size_t>(s)] = draws(s, 0) - draws(s, 1);
  c.point = shifted_mean(diff);
  c.ci = central_interval(diff);
  return c;
}

}  // namespace agendascope
