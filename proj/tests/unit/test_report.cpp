#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "agendascope/error.hpp"
#include "agendascope/metrics.hpp"
#include "agendascope/report.hpp"

using namespace agendascope;

namespace {

FittedModel model_with(const Eigen::MatrixXd& beta, const Eigen::MatrixXd& theta = {}) {
  FittedModel m;
  m.k = static_cast<int>(beta.rows());
  m.beta = beta;
  m.theta = theta;
  for (Eigen::Index v = 0; v < beta.cols(); ++v) m.vocabulary.push_back("t" + std::to_string(100 + v));
  return m;
}

Eigen::MatrixXd random_simplex_rows(std::mt19937_64& rng, int rows, int cols) {
  std::gamma_distribution<double> g(0.7, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = g(rng) + 1e-9;
    m.row(r) /= m.row(r).sum();
  }
  return m;
}

std::vector<std::pair<int, int>> edge_pairs(const TopicGraph& g) {
  std::vector<std::pair<int, int>> out;
  for (const auto& e : g.edges) out.emplace_back(e.i, e.j);
  return out;
}

}  // namespace

TEST_CASE("perspective contrast") {
  Eigen::MatrixXd beta(2, 3);
  beta << 0.5, 0.3, 0.2, 0.1, 0.3, 0.6;
  const auto m = model_with(beta);
  const auto pc = perspective_contrast(m, 0, 1, 3);
  REQUIRE(pc.entries.size() == 3);
  // Sorted by size: t102 (0.6), t100 (0.5), t101 (0.3).
  CHECK(pc.entries[0].term == "t102");
  CHECK(std::abs(pc.entries[0].delta + 1.0) <= 1e-12);
  CHECK(pc.entries[1].term == "t100");
  CHECK(pc.entries[1].delta == 1.0);
  CHECK(pc.entries[2].delta == 0.0);
  CHECK(pc.entries[0].size == 0.6);

  Eigen::MatrixXd same(2, 3);
  same << 0.2, 0.3, 0.5, 0.2, 0.3, 0.5;
  for (const auto& e : perspective_contrast(model_with(same), 0, 1).entries) CHECK(e.delta == 0.0);

  CHECK_THROWS_AS(perspective_contrast(m, 1, 1), InvalidArgument);
  CHECK_THROWS_AS(perspective_contrast(m, 0, 2), InvalidArgument);
  CHECK_THROWS_AS(perspective_contrast(m, -1, 0), InvalidArgument);

  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto r = model_with(random_simplex_rows(rng, 3, 40));
    const auto full = perspective_contrast(r, 0, 2, 40);
    double lo = 0.0, hi = 0.0;
    for (const auto& e : full.entries) {
      CHECK((e.delta >= -1.0 && e.delta <= 1.0));
      lo = std::min(lo, e.delta);
      hi = std::max(hi, e.delta);
    }
    CHECK(std::max(-lo, hi) == 1.0);
    const auto top = perspective_contrast(r, 0, 2, 10);
    CHECK(top.entries.size() == 10);
    for (std::size_t i = 1; i < top.entries.size(); ++i) CHECK(top.entries[i - 1].size >= top.entries[i].size);
  }
}

TEST_CASE("topic graph") {
  SUBCASE("two documents give perfect correlations") {
    Eigen::MatrixXd theta(2, 3);
    theta << 0.6, 0.3, 0.1, 0.2, 0.1, 0.7;
    const auto g = topic_graph(model_with(Eigen::MatrixXd::Constant(3, 4, 0.25), theta), 0.05);
    const Eigen::MatrixXd c = column_correlation(theta);
    for (Eigen::Index i = 0; i < 3; ++i)
      for (Eigen::Index j = 0; j < 3; ++j) CHECK(std::abs(std::abs(c(i, j)) - 1.0) <= 1e-12);
    CHECK(edge_pairs(g) == std::vector<std::pair<int, int>>{{0, 1}});
  }
  SUBCASE("co-rising blocks connect only within the block") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0), split(0.4, 0.6);
    Eigen::MatrixXd theta(200, 4);
    for (int d = 0; d < 200; ++d) {
      const double b = u(rng), a = split(rng), c = split(rng);
      theta.row(d) << b * a, b * (1 - a), (1 - b) * c, (1 - b) * (1 - c);
    }
    std::mt19937_64 brng(1);
    const auto g = topic_graph(model_with(random_simplex_rows(brng, 4, 10), theta), 0.3);
    CHECK(edge_pairs(g) == std::vector<std::pair<int, int>>{{0, 1}, {2, 3}});
    for (const auto& e : g.edges) CHECK((e.correlation > 0.3 && e.correlation <= 1.0));
  }
  SUBCASE("a high threshold drops everything") {
    std::mt19937_64 rng(2);
    const auto m = model_with(random_simplex_rows(rng, 5, 10), random_simplex_rows(rng, 100, 5));
    CHECK(topic_graph(m, 0.999).edges.empty());
    CHECK_THROWS_AS(topic_graph(m, 1.0), InvalidArgument);
    CHECK_THROWS_AS(topic_graph(m, -1.0), InvalidArgument);
  }
  SUBCASE("document order does not matter") {
    std::mt19937_64 rng(5);
    const Eigen::MatrixXd theta = random_simplex_rows(rng, 60, 5);
    const auto beta = random_simplex_rows(rng, 5, 10);
    std::vector<int> perm(60);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::MatrixXd shuffled(60, 5);
    for (int d = 0; d < 60; ++d) shuffled.row(d) = theta.row(perm[static_cast<std::size_t>(d)]);
    const auto a = topic_graph(model_with(beta, theta), -0.5);
    const auto b = topic_graph(model_with(beta, shuffled), -0.5);
    REQUIRE(edge_pairs(a) == edge_pairs(b));
    for (std::size_t i = 0; i < a.edges.size(); ++i)
      CHECK(std::abs(a.edges[i].correlation - b.edges[i].correlation) <= 1e-12);
    CHECK(to_dot(a) == to_dot(topic_graph(model_with(beta, theta), -0.5)));
  }
  SUBCASE("covariance source") {
    auto m = model_with(Eigen::MatrixXd::Constant(3, 4, 0.25));
    m.sigma.resize(2, 2);
    m.sigma << 4.0, 1.2, 1.2, 1.0;
    const auto g = topic_graph(m, 0.05, CorrelationSource::kSigma);
    REQUIRE(g.edges.size() == 1);
    CHECK(g.edges[0].correlation == doctest::Approx(0.6));
    CHECK(g.nodes.size() == 3);
  }
  SUBCASE("labels and DOT output") {
    Eigen::MatrixXd beta(2, 4);
    beta << 0.4, 0.3, 0.2, 0.1, 0.1, 0.2, 0.3, 0.4;
    Eigen::MatrixXd theta(3, 2);
    theta << 0.2, 0.8, 0.5, 0.5, 0.9, 0.1;
    const auto g = topic_graph(model_with(beta, theta));
    CHECK(g.labels[0] == "Topic 1: t100, t101, t102");
    CHECK(g.labels[1] == "Topic 2: t103, t102, t101");
    const auto dot = to_dot(g);
    CHECK(dot.rfind("graph topics {", 0) == 0);
    CHECK(dot.find("t0 [label=\"Topic 1: t100, t101, t102\"]") != std::string::npos);
    CHECK(dot.find("--") == std::string::npos);
  }
}

TEST_CASE("word cloud data") {
  std::mt19937_64 rng(6);
  const auto beta = random_simplex_rows(rng, 3, 25);
  const auto m = model_with(beta);
  const auto all = wordcloud_data(m, 1, 25);
  REQUIRE(all.size() == 25);
  double total = 0.0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    total += all[i].second;
    if (i) CHECK(all[i - 1].second >= all[i].second);
  }
  CHECK(total == doctest::Approx(1.0));
  const auto top = wordcloud_data(m, 1, 7);
  double part = 0.0;
  for (const auto& [t, p] : top) part += p;
  CHECK(part <= 1.0);

  // Same ranking as the metrics top-probability list.
  Corpus c;
  c.vocabulary = m.vocabulary;
  DocTerms dt;
  for (int v = 0; v < 25; ++v) {
    dt.terms.push_back(v);
    dt.counts.push_back(1);
  }
  c.docs.push_back(dt);
  c.doc_ids.push_back("d");
  const auto summaries = summarize_topics(beta, m.vocabulary, c, 7);
  for (int k = 0; k < 3; ++k) {
    const auto cloud = wordcloud_data(m, k, 7);
    REQUIRE(cloud.size() == summaries[static_cast<std::size_t>(k)].top_prob.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      CHECK(cloud[i].first == summaries[static_cast<std::size_t>(k)].top_prob[i].first);
      CHECK(cloud[i].second == summaries[static_cast<std::size_t>(k)].top_prob[i].second);
    }
  }

  // Two disjoint blocks: each topic's cloud holds only its own block.
  Eigen::MatrixXd block = Eigen::MatrixXd::Constant(2, 8, 1e-12);
  block.block(0, 0, 1, 4).setConstant(0.25);
  block.block(1, 4, 1, 4).setConstant(0.25);
  const auto bm = model_with(block);
  for (const auto& [t, p] : wordcloud_data(bm, 0, 4)) CHECK(t < "t104");
  for (const auto& [t, p] : wordcloud_data(bm, 1, 4)) CHECK(t >= "t104");
}
