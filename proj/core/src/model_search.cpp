#include "agendascope/model_search.hpp"

#include <algorithm>

#include "agendascope/error.hpp"
#include "agendascope/parallel.hpp"

namespace agendascope {

OlsLine ols_line(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw DegenerateX("OLS needs at least two points");
  const double n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : points) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (sxx == 0.0) throw DegenerateX("all x values are equal");
  OlsLine line;
  line.slope = sxy / sxx;
  line.intercept = my - line.slope * mx;
  for (const auto& [x, y] : points) line.residuals.push_back(y - (line.intercept + line.slope * x));
  return line;
}

ModelSearchResult select_by_residual(std::vector<SearchCandidate> candidates) {
  std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) { return a.k < b.k; });
  std::vector<std::pair<double, double>> pts;
  for (const auto& c : candidates) pts.emplace_back(c.mean_coherence, c.mean_exclusivity);
  OlsLine line = ols_line(pts);

  ModelSearchResult r;
  r.slope = line.slope;
  r.intercept = line.intercept;
  r.residuals = std::move(line.residuals);
  std::size_t best = 0;
  for (std::size_t i = 1; i < r.residuals.size(); ++i)
    if (r.residuals[i] > r.residuals[best]) best = i;
  r.selected_k = candidates[best].k;
  r.candidates = std::move(candidates);
  return r;
}

std::uint64_t candidate_seed(std::uint64_t master_seed, int k) {
  return master_seed ^ static_cast<std::uint64_t>(k);
}

ModelSearchResult search(const Corpus& corpus, const PrevalenceDesign& design, std::vector<int> k_grid,
                         const FitConfig& config, const SearchOptions& options) {
  std::sort(k_grid.begin(), k_grid.end());
  k_grid.erase(std::unique(k_grid.begin(), k_grid.end()), k_grid.end());
  if (k_grid.size() < 3) throw InvalidArgument("model search needs at least 3 distinct K values");
  if (k_grid.front() < 2) throw InvalidArgument("model search K values must be >= 2");

  const bool parallel_candidates = config.threads > 1;
  std::vector<SearchCandidate> out(k_grid.size());
  parallel_for(k_grid.size(), parallel_candidates ? config.threads : 1, [&](std::size_t i) {
    const int k = k_grid[i];
    FitConfig c = config;
    c.k = k;
    c.seed = candidate_seed(config.seed, k);
    c.rel_tol = options.candidate_rel_tol;
    if (parallel_candidates) c.threads = 1;
    try {
      FittedModel m = fit(corpus, design, c);
      ModelQuality q = model_quality(m.beta, corpus, options.m_top_words, options.frex_w);
      SearchCandidate& sc = out[i];
      sc.k = k;
      sc.mean_coherence = q.mean_coherence;
      sc.mean_exclusivity = q.mean_exclusivity;
      sc.fit_ref = options.on_fit ? options.on_fit(m) : "k=" + std::to_string(k);
    } catch (const Error& e) {
      throw Error(e.kind(), "model search candidate K=" + std::to_string(k) + " failed: " + e.what());
    }
  });
  return select_by_residual(std::move(out));
}

}  // namespace agendascope
