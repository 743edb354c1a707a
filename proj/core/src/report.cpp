#include "agendascope/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "agendascope/error.hpp"
#include "agendascope/metrics.hpp"

namespace agendascope {

namespace {

void check_topic(const FittedModel& model, int t) {
  if (t < 0 || t >= model.k) throw InvalidArgument("topic " + std::to_string(t) + " out of range");
}

}  // namespace

PerspectiveContrast perspective_contrast(const FittedModel& model, int a, int b, std::size_t n) {
  check_topic(model, a);
  check_topic(model, b);
  if (a == b) throw InvalidArgument("perspective contrast needs two distinct topics");
  const Eigen::RowVectorXd ra = model.beta.row(a), rb = model.beta.row(b);
  const Eigen::RowVectorXd diff = ra - rb;
  const double max_abs = diff.cwiseAbs().maxCoeff();
  const Eigen::RowVectorXd size = ra.cwiseMax(rb);

  PerspectiveContrast out;
  out.topic_a = a;
  out.topic_b = b;
  for (auto v : top_indices(size, n)) {
    ContrastEntry e;
    e.term = model.vocabulary[static_cast<std::size_t>(v)];
    e.delta = max_abs > 0.0 ? diff(v) / max_abs : 0.0;
    e.size = size(v);
    out.entries.push_back(std::move(e));
  }
  return out;
}

Eigen::MatrixXd column_correlation(const Eigen::MatrixXd& m) {
  const Eigen::Index K = m.cols();
  const Eigen::MatrixXd centered = m.rowwise() - m.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered;
  Eigen::MatrixXd out(K, K);
  for (Eigen::Index i = 0; i < K; ++i)
    for (Eigen::Index j = 0; j < K; ++j) {
      const double denom = std::sqrt(cov(i, i) * cov(j, j));
      out(i, j) = denom > 0.0 ? std::clamp(cov(i, j) / denom, -1.0, 1.0) : std::numeric_limits<double>::quiet_NaN();
    }
  return out;
}

TopicGraph topic_graph(const FittedModel& model, double threshold, CorrelationSource source) {
  if (!(threshold > -1.0 && threshold < 1.0)) throw InvalidArgument("graph threshold must lie in (-1, 1)");
  TopicGraph g;
  g.threshold = threshold;
  for (int k = 0; k < model.k; ++k) {
    g.nodes.push_back(k);
    std::string label;
    for (auto v : top_indices(model.beta.row(k), 3)) {
      if (!label.empty()) label += ", ";
      label += model.vocabulary[static_cast<std::size_t>(v)];
    }
    g.labels.push_back("Topic " + std::to_string(k + 1) + ": " + label);
  }

  Eigen::MatrixXd corr;
  if (source == CorrelationSource::kTheta) {
    corr = column_correlation(model.theta);
  } else {
    const Eigen::VectorXd sd = model.sigma.diagonal().cwiseSqrt();
    corr = model.sigma.cwiseQuotient(sd * sd.transpose());
  }
  for (Eigen::Index i = 0; i < corr.rows(); ++i)
    for (Eigen::Index j = i + 1; j < corr.cols(); ++j) {
      const double c = corr(i, j);
      if (std::isfinite(c) && c > threshold) g.edges.push_back({static_cast<int>(i), static_cast<int>(j), c});
    }
  return g;
}

std::string to_dot(const TopicGraph& graph) {
  std::ostringstream out;
  out.precision(6);
  out << "graph topics {\n";
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    std::string label = graph.labels[i];
    std::string escaped;
    for (char c : label) {
      if (c == '"' || c == '\\') escaped.push_back('\\');
      escaped.push_back(c);
    }
    out << "  t" << graph.nodes[i] << " [label=\"" << escaped << "\"];\n";
  }
  for (const auto& e : graph.edges)
    out << "  t" << e.i << " -- t" << e.j << " [weight=" << e.correlation << ", label=\"" << e.correlation
        << "\"];\n";
  out << "}\n";
  return out.str();
}

std::vector<std::pair<std::string, double>> wordcloud_data(const FittedModel& model, int topic, std::size_t n) {
  check_topic(model, topic);
  if (n > static_cast<std::size_t>(model.beta.cols())) throw InvalidArgument("n exceeds vocabulary size");
  std::vector<std::pair<std::string, double>> out;
  for (auto v : top_indices(model.beta.row(topic), n))
    out.emplace_back(model.vocabulary[static_cast<std::size_t>(v)], model.beta(topic, v));
  return out;
}

}  // namespace agendascope
