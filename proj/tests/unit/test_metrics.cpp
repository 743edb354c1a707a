#include <doctest.h>

#include <algorithm>
#include <numeric>

#include <cmath>
#include <random>

#include "agendascope/error.hpp"
#include "agendascope/metrics.hpp"
#include "support/toy.hpp"

using namespace agendascope;
using agendascope::testing::toy_corpus;

namespace {

std::vector<Eigen::Index> ranking(const Eigen::RowVectorXd& row) {
  return top_indices(row, static_cast<std::size_t>(row.size()));
}

}  // namespace

TEST_CASE("top_indices breaks ties by index") {
  Eigen::RowVectorXd r(5);
  r << 0.2, 0.5, 0.2, 0.5, 0.1;
  CHECK(top_indices(r, 5) == std::vector<Eigen::Index>{1, 3, 0, 2, 4});
  CHECK(top_indices(r, 2) == std::vector<Eigen::Index>{1, 3});
  CHECK(top_indices(r, 9).size() == 5);
}

TEST_CASE("semantic coherence") {
  SUBCASE("two words sharing every document") {
    const auto c = toy_corpus(3, {{0, 1}, {0, 1, 2}, {1, 0, 0}});
    Eigen::MatrixXd beta(1, 3);
    beta << 0.5, 0.4, 0.1;
    CHECK(semantic_coherence(beta, c, 2)(0) == doctest::Approx(std::log(4.0 / 3.0)).epsilon(1e-15));
  }
  SUBCASE("words that never co-occur in singleton documents") {
    const auto c = toy_corpus(3, {{0}, {1}, {2}});
    Eigen::MatrixXd beta(1, 3);
    beta << 0.5, 0.3, 0.2;
    CHECK(semantic_coherence(beta, c, 2)(0) == 0.0);
    CHECK(semantic_coherence(beta, c, 3)(0) == 0.0);
  }
  SUBCASE("counts do not matter, only presence") {
    const auto a = toy_corpus(3, {{0, 1}, {0, 2}, {1, 2}});
    const auto b = toy_corpus(3, {{0, 0, 0, 1}, {0, 2, 2}, {1, 1, 2}});
    Eigen::MatrixXd beta(2, 3);
    beta << 0.5, 0.3, 0.2, 0.1, 0.3, 0.6;
    CHECK(semantic_coherence(beta, a, 3) == semantic_coherence(beta, b, 3));
  }
  SUBCASE("matches the brute-force oracle exactly") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
      const int D = 2 + trial % 9, V = 4 + trial % 17, K = 1 + trial % 4;
      const auto c = testing::random_toy_corpus(rng, D, V);
      const auto beta = testing::random_beta(rng, K, V);
      for (int m : {2, std::min(V, 5), V}) {
        const auto got = semantic_coherence(beta, c, m);
        const auto want = testing::brute_force_coherence(beta, c, m);
        for (int k = 0; k < K; ++k) CHECK(got(k) == want[static_cast<std::size_t>(k)]);
      }
    }
  }
  SUBCASE("errors") {
    const auto c = toy_corpus(3, {{0, 1}, {1}});
    Eigen::MatrixXd beta(1, 3);
    beta << 0.2, 0.3, 0.5;
    CHECK_THROWS_AS(semantic_coherence(beta, c, 2), TermAbsentFromCorpus);
    CHECK_THROWS_AS(semantic_coherence(beta, c, 1), InvalidArgument);
    CHECK_THROWS_AS(semantic_coherence(beta, c, 4), InvalidArgument);
  }
}

TEST_CASE("exclusivity and FREX") {
  std::mt19937_64 rng(3);
  SUBCASE("exclusivity sums to one over topics") {
    for (int trial = 0; trial < 20; ++trial) {
      const auto beta = testing::random_beta(rng, 2 + trial % 6, 30);
      const Eigen::MatrixXd e = exclusivity_matrix(beta);
      CHECK((e.colwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
    }
  }
  SUBCASE("single topic") {
    const auto beta = testing::random_beta(rng, 1, 25);
    CHECK((exclusivity_matrix(beta).array() == 1.0).all());
    const auto f = exclusivity_frex(beta, 0.7, 10);
    const Eigen::MatrixXd ecdf = row_ecdf(beta);
    for (Eigen::Index v = 0; v < 25; ++v)
      CHECK(f.frex(0, v) == doctest::Approx(1.0 / (0.7 + 0.3 / ecdf(0, v))).epsilon(1e-14));
    CHECK(ranking(f.frex.row(0)) == ranking(beta.row(0)));
  }
  SUBCASE("weight limits") {
    for (int trial = 0; trial < 20; ++trial) {
      const auto beta = testing::random_beta(rng, 3 + trial % 5, 40);
      const Eigen::MatrixXd e = exclusivity_matrix(beta);
      const auto f0 = exclusivity_frex(beta, 0.0);
      const auto f1 = exclusivity_frex(beta, 1.0);
      for (Eigen::Index k = 0; k < beta.rows(); ++k) {
        CHECK(ranking(f0.frex.row(k)) == ranking(beta.row(k)));
        CHECK(ranking(f1.frex.row(k)) == ranking(e.row(k)));
      }
    }
  }
  SUBCASE("row ECDF") {
    Eigen::MatrixXd x(1, 4);
    x << 0.3, 0.1, 0.3, 0.5;
    Eigen::MatrixXd want(1, 4);
    want << 0.75, 0.25, 0.75, 1.0;
    CHECK(row_ecdf(x) == want);
  }
  SUBCASE("per-topic exclusivity is the mean FREX of the top words") {
    const auto beta = testing::random_beta(rng, 4, 30);
    const auto f = exclusivity_frex(beta, 0.7, 10);
    for (Eigen::Index k = 0; k < 4; ++k) {
      double s = 0.0;
      for (auto v : top_indices(beta.row(k), 10)) s += f.frex(k, v);
      CHECK(f.exclusivity_per_topic(k) == doctest::Approx(s / 10).epsilon(1e-14));
    }
  }
}

TEST_CASE("lift") {
  // term totals 2, 3, 5 over 10 tokens
  const auto c = toy_corpus(3, {{0, 1, 2, 2}, {0, 1, 1, 2, 2, 2}});
  Eigen::MatrixXd beta(2, 3);
  beta << 0.5, 0.3, 0.2, 0.1, 0.2, 0.7;
  const Eigen::MatrixXd l = lift(beta, c);
  Eigen::MatrixXd want(2, 3);
  want << 0.5 / 0.2, 0.3 / 0.3, 0.2 / 0.5, 0.1 / 0.2, 0.2 / 0.3, 0.7 / 0.5;
  CHECK((l - want).cwiseAbs().maxCoeff() <= 1e-12);

  const auto flat = toy_corpus(4, {{0, 1, 2, 3}, {3, 2, 1, 0}});
  const Eigen::MatrixXd u = lift(Eigen::MatrixXd::Constant(2, 4, 0.25), flat);
  CHECK((u.array() == u(0, 0)).all());

  // A rare term with a large topic weight ranks first by lift.
  const auto rare = toy_corpus(4, {{0, 0, 0, 1, 1, 1, 2, 2, 2, 3}});
  Eigen::MatrixXd b2(1, 4);
  b2 << 0.3, 0.3, 0.2, 0.2;
  CHECK(top_indices(lift(b2, rare).row(0), 1)[0] == 3);
}

TEST_CASE("score") {
  Eigen::MatrixXd beta(2, 2);
  beta << 0.8, 0.2, 0.2, 0.8;
  const Eigen::MatrixXd s = score(beta);
  CHECK(std::abs(s(0, 0) - 0.8 * (std::log(0.8) - 0.5 * (std::log(0.8) + std::log(0.2)))) <= 1e-12);
  CHECK(std::abs(s(0, 1) - 0.2 * (std::log(0.2) - 0.5 * (std::log(0.2) + std::log(0.8)))) <= 1e-12);

  Eigen::MatrixXd same(3, 4);
  same.rowwise() = Eigen::RowVector4d(0.1, 0.2, 0.3, 0.4);
  CHECK(score(same).cwiseAbs().maxCoeff() == 0.0);

  std::mt19937_64 rng(5);
  const auto b = testing::random_beta(rng, 4, 12);
  Eigen::PermutationMatrix<Eigen::Dynamic> p(4);
  p.indices() << 2, 0, 3, 1;
  CHECK(((p * score(b)) - score(p * b)).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("keyword rankings follow a vocabulary reordering") {
  std::mt19937_64 rng(8);
  const int V = 15;
  const auto corpus = testing::random_toy_corpus(rng, 8, V);
  const auto beta = testing::random_beta(rng, 3, V);

  std::vector<int> perm(V);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  // Column v of the reordered model is column perm[v] of the original.
  Eigen::MatrixXd pbeta(3, V);
  std::vector<std::string> pvocab(V);
  std::vector<int> where(V);
  for (int v = 0; v < V; ++v) {
    pbeta.col(v) = beta.col(perm[static_cast<std::size_t>(v)]);
    pvocab[static_cast<std::size_t>(v)] = corpus.vocabulary[static_cast<std::size_t>(perm[static_cast<std::size_t>(v)])];
    where[static_cast<std::size_t>(perm[static_cast<std::size_t>(v)])] = v;
  }
  std::vector<std::vector<int>> tokens;
  for (const auto& d : corpus.docs) {
    std::vector<int> t;
    for (std::size_t j = 0; j < d.terms.size(); ++j)
      for (int n = 0; n < d.counts[j]; ++n) t.push_back(where[static_cast<std::size_t>(d.terms[j])]);
    tokens.push_back(t);
  }
  auto pcorpus = toy_corpus(V, tokens);
  pcorpus.vocabulary = pvocab;

  const auto a = summarize_topics(beta, corpus.vocabulary, corpus, 8);
  const auto b = summarize_topics(pbeta, pvocab, pcorpus, 8);
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].top_prob == b[k].top_prob);
    CHECK(a[k].top_frex == b[k].top_frex);
    CHECK(a[k].top_lift == b[k].top_lift);
    CHECK(a[k].top_score == b[k].top_score);
  }
}

TEST_CASE("topic summaries and model quality") {
  std::mt19937_64 rng(21);
  const auto corpus = testing::random_toy_corpus(rng, 10, 20);
  const auto beta = testing::random_beta(rng, 3, 20);
  const auto s = summarize_topics(beta, corpus.vocabulary, corpus, 6);
  REQUIRE(s.size() == 3);
  for (const auto& t : s) {
    for (const auto* list : {&t.top_prob, &t.top_frex, &t.top_lift, &t.top_score}) {
      REQUIRE(list->size() == 6);
      for (std::size_t i = 1; i < list->size(); ++i) CHECK((*list)[i - 1].second >= (*list)[i].second);
    }
    for (const auto& [term, p] : t.top_prob) CHECK((p > 0.0 && p <= 1.0));
  }
  const auto q = model_quality(beta, corpus, 5);
  CHECK(q.k == 3);
  CHECK(q.m_top_words == 5);
  CHECK(q.mean_coherence == doctest::Approx(q.coherence_per_topic.mean()));
  CHECK(q.mean_exclusivity == doctest::Approx(q.exclusivity_per_topic.mean()));
}
