#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "agendascope/metrics.hpp"
#include "agendascope/stm.hpp"

namespace agendascope {

struct OlsLine {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<double> residuals;  // y_i - (intercept + slope * x_i)
};

// Least-squares line through (x, y) points. Throws DegenerateX when fewer
// than two points are given or all x are equal.
OlsLine ols_line(const std::vector<std::pair<double, double>>& points);

struct SearchCandidate {
  int k = 0;
  double mean_coherence = 0.0;
  double mean_exclusivity = 0.0;
  std::string fit_ref;
};

struct ModelSearchResult {
  std::vector<SearchCandidate> candidates;  // sorted by k
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<double> residuals;
  int selected_k = 0;
};

// Regresses exclusivity on coherence across candidates and selects the
// largest residual; ties go to the smaller k. Candidates are sorted by k.
ModelSearchResult select_by_residual(std::vector<SearchCandidate> candidates);

struct SearchOptions {
  double candidate_rel_tol = 1e-4;
  int m_top_words = kDefaultTopWords;
  double frex_w = kDefaultFrexWeight;
  // Called once per fitted candidate (from worker threads when candidates run
  // in parallel); may persist the fit and return its reference string.
  std::function<std::string(const FittedModel&)> on_fit;
};

std::uint64_t candidate_seed(std::uint64_t master_seed, int k);

// Fits one model per k (seed = master seed XOR k, rel_tol = candidate_rel_tol)
// and scores each in coherence/exclusivity space. With config.threads > 1 the
// candidates run concurrently; results are assembled in k order. A failing
// candidate aborts the search with an error naming its k.
ModelSearchResult search(const Corpus& corpus, const PrevalenceDesign& design, std::vector<int> k_grid,
                         const FitConfig& config, const SearchOptions& options = {});

}  // namespace agendascope
