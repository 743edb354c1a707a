#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "agendascope/design.hpp"
#include "agendascope/error.hpp"
#include "agendascope/report.hpp"
#include "agendascope/stm.hpp"
#include "agendascope/text.hpp"

namespace agendascope::cli {

// Every violation found while validating a run configuration.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

// Topics are 1-based here, as printed in tables and labels.
struct EffectTarget {
  std::string covariate;
  std::vector<int> topics;  // empty = all topics
  std::size_t grid_points = 25;
  bool log_scale = false;
};

struct ContrastTarget {
  std::string covariate;
  CovariateValue level_a;
  CovariateValue level_b;
  std::vector<int> topics;  // empty = all topics
};

struct RunConfig {
  // Resolved against the directory of the config file.
  std::filesystem::path corpus_dir;
  std::filesystem::path metadata;
  std::filesystem::path output_dir = "agendascope-out";
  std::optional<std::filesystem::path> stopwords_file;

  std::size_t min_doc_freq = 10;
  std::size_t min_term_len = 3;

  std::optional<int> k;
  std::vector<int> k_grid;
  int max_em_iters = 200;
  double rel_tol = 1e-5;
  double candidate_rel_tol = 1e-4;
  double ridge_gamma = 1.0;
  double sigma_floor = 1e-6;
  int init_restarts = 1;
  InitMethod init = InitMethod::kClusterSeeded;

  std::string formula;

  int metrics_top_words = 20;
  int coherence_words = 10;
  double frex_w = 0.7;

  int n_draws = 500;
  bool average_over_observed = false;
  std::vector<EffectTarget> effects;
  std::vector<ContrastTarget> contrasts;

  std::size_t cloud_words = 50;
  std::vector<int> cloud_topics;  // empty = all
  std::vector<std::pair<int, int>> contrast_pairs;
  std::size_t contrast_words = 50;
  double graph_threshold = kDefaultGraphThreshold;
  CorrelationSource graph_source = CorrelationSource::kTheta;

  std::uint64_t seed = 1;
  bool deterministic = false;
  std::optional<unsigned> threads;

  PreprocessConfig preprocess() const;
  FitConfig fit_config(int k, unsigned threads) const;
};

// Parses a JSON run configuration. `overrides` are "dotted.path=value" pairs
// applied on top of the file (value parsed as JSON, else taken as a string).
// Relative paths are resolved against `base_dir`. Throws ConfigError listing
// every problem at once.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir,
                           const std::vector<std::string>& overrides = {});
RunConfig load_run_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

}  // namespace agendascope::cli
