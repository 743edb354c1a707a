#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "agendascope/corpus.hpp"

namespace agendascope {

using RankedTerms = std::vector<std::pair<std::string, double>>;

struct TopicSummary {
  int topic_index = 0;
  RankedTerms top_prob;
  RankedTerms top_frex;
  RankedTerms top_lift;
  RankedTerms top_score;
};

struct ModelQuality {
  int k = 0;
  Eigen::VectorXd coherence_per_topic;
  Eigen::VectorXd exclusivity_per_topic;
  double mean_coherence = 0.0;
  double mean_exclusivity = 0.0;
  int m_top_words = 0;
};

inline constexpr double kDefaultFrexWeight = 0.7;
inline constexpr int kDefaultTopWords = 10;

// Indices of the n largest entries, descending; ties go to the lower index.
std::vector<Eigen::Index> top_indices(const Eigen::Ref<const Eigen::RowVectorXd>& row, std::size_t n);

// Per topic k with top-m terms v1..vm by beta:
//   C_k = sum_{i=2..m} sum_{j<i} log((D(v_i, v_j) + 1) / D(v_j))
// with binary document presence. Summation runs i ascending, then j
// ascending, starting from 0.0. Throws TermAbsentFromCorpus, InvalidArgument.
Eigen::VectorXd semantic_coherence(const Eigen::MatrixXd& beta, const Corpus& corpus, int m);

// e_kv = beta_kv / sum_j beta_jv.
Eigen::MatrixXd exclusivity_matrix(const Eigen::MatrixXd& beta);

// Empirical CDF of each entry within its own row: share of row entries <= it.
Eigen::MatrixXd row_ecdf(const Eigen::MatrixXd& values);

struct FrexResult {
  Eigen::MatrixXd frex;                    // K x V
  Eigen::VectorXd exclusivity_per_topic;   // mean FREX over each topic's top-m words by beta
};

// FREX_kv = 1 / (w / ECDF_k(e_kv) + (1 - w) / ECDF_k(beta_kv)).
FrexResult exclusivity_frex(const Eigen::MatrixXd& beta, double w = kDefaultFrexWeight, int m = kDefaultTopWords);

// lift_kv = beta_kv / (corpus count of v / total tokens).
Eigen::MatrixXd lift(const Eigen::MatrixXd& beta, const Corpus& corpus);

// score_kv = beta_kv * (log beta_kv - mean_j log beta_jv).
Eigen::MatrixXd score(const Eigen::MatrixXd& beta);

std::vector<TopicSummary> summarize_topics(const Eigen::MatrixXd& beta, const std::vector<std::string>& vocabulary,
                                           const Corpus& corpus, std::size_t n_words,
                                           double frex_w = kDefaultFrexWeight);

ModelQuality model_quality(const Eigen::MatrixXd& beta, const Corpus& corpus, int m = kDefaultTopWords,
                           double frex_w = kDefaultFrexWeight);

}  // namespace agendascope
