#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "agendascope/stm.hpp"

namespace agendascope {

struct ContrastEntry {
  std::string term;
  double delta = 0.0;  // (beta_a - beta_b) / max_v |beta_a - beta_b|, in [-1, 1]
  double size = 0.0;   // max(beta_a, beta_b)
};

struct PerspectiveContrast {
  int topic_a = 0;
  int topic_b = 0;
  std::vector<ContrastEntry> entries;  // top-n terms by size, descending
};

// Identical topics give all-zero deltas. Throws InvalidArgument for a == b or
// an out-of-range topic.
PerspectiveContrast perspective_contrast(const FittedModel& model, int a, int b, std::size_t n = 50);

enum class CorrelationSource {
  kTheta,  // Pearson correlation of document-topic proportions
  kSigma,  // correlation implied by the logistic-normal covariance (topics 0..K-2 only)
};

struct TopicEdge {
  int i = 0;
  int j = 0;
  double correlation = 0.0;
};

struct TopicGraph {
  std::vector<int> nodes;
  std::vector<std::string> labels;
  std::vector<TopicEdge> edges;  // i < j, correlation > threshold
  double threshold = 0.0;
};

inline constexpr double kDefaultGraphThreshold = 0.05;

// Pearson correlation matrix of the columns of a D x K matrix. Pairs involving
// a constant column are NaN.
Eigen::MatrixXd column_correlation(const Eigen::MatrixXd& m);

// Keeps edges with correlation > threshold. Labels default to the top three
// terms of each topic. Throws InvalidArgument unless -1 < threshold < 1.
TopicGraph topic_graph(const FittedModel& model, double threshold = kDefaultGraphThreshold,
                       CorrelationSource source = CorrelationSource::kTheta);

std::string to_dot(const TopicGraph& graph);

// Top-n (term, probability) pairs of one topic, descending, ties by
// vocabulary index (same ranking as the metrics top-probability lists).
std::vector<std::pair<std::string, double>> wordcloud_data(const FittedModel& model, int topic, std::size_t n);

}  // namespace agendascope
