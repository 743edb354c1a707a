#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "agendascope/corpus.hpp"
#include "agendascope/effects.hpp"
#include "agendascope/metrics.hpp"
#include "agendascope/model_search.hpp"
#include "agendascope/report.hpp"
#include "agendascope/stm.hpp"

// JSON interchange formats. Output is deterministic: fixed key order and
// shortest round-trip decimal representation of doubles. Parsers throw
// FormatError on malformed input.
namespace agendascope::json {

// {vocabulary, docs: [{id, terms: [[index, count], ...]}], covariate_schema, covariates: [{doc_id, ...}]}
std::string corpus_to_json(const Corpus& corpus);
Corpus corpus_from_json(std::string_view text);

// {k, vocabulary, beta, gamma, sigma, eta, nu, bound_trace, config, design_column_names, ...}
std::string model_to_json(const FittedModel& model);
FittedModel model_from_json(std::string_view text);

std::string search_to_json(const ModelSearchResult& result);
ModelSearchResult search_from_json(std::string_view text);
// Tab-separated plot rows: k, coherence, exclusivity, residual.
std::string search_plot_tsv(const ModelSearchResult& result);

std::string summaries_to_json(const std::vector<TopicSummary>& summaries, const ModelQuality& quality);
// Aligned text table of the top words of every topic under one metric
// ("prob", "frex", "lift" or "score").
std::string top_words_table(const std::vector<TopicSummary>& summaries, const std::string& metric);
// Tab-separated: topic, rank, prob_term, prob, frex_term, frex, lift_term, lift, score_term, score.
std::string top_words_tsv(const std::vector<TopicSummary>& summaries);

std::string effects_to_json(const std::vector<EffectEstimate>& effects,
                            const std::vector<ContrastEstimate>& contrasts);
// grid, mean, lo, hi
std::string effect_tsv(const EffectEstimate& effect);
// topic, covariate, level_a, level_b, point, lo, hi
std::string contrasts_tsv(const std::vector<ContrastEstimate>& contrasts);

std::string contrasts_to_json(const std::vector<PerspectiveContrast>& contrasts);
std::string graph_to_json(const TopicGraph& graph);
std::string clouds_to_json(const std::vector<std::pair<int, std::vector<std::pair<std::string, double>>>>& clouds);

std::string format_value(const CovariateValue& v);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace agendascope::json
