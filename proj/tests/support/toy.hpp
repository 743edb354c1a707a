#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "agendascope/corpus.hpp"

namespace agendascope::testing {

// Builds a corpus straight from per-document token lists over term indices
// 0..vocab-1. Vocabulary entries are "w00", "w01", ... so they sort by index.
inline Corpus toy_corpus(int vocab, const std::vector<std::vector<int>>& tokens) {
  Corpus c;
  for (int v = 0; v < vocab; ++v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "w%02d", v);
    c.vocabulary.emplace_back(buf);
  }
  for (std::size_t d = 0; d < tokens.size(); ++d) {
    std::map<int, int> counts;
    for (int t : tokens[d]) ++counts[t];
    DocTerms dt;
    for (auto [t, n] : counts) {
      dt.terms.push_back(t);
      dt.counts.push_back(n);
    }
    c.docs.push_back(std::move(dt));
    c.doc_ids.push_back("doc" + std::to_string(d));
  }
  c.covariates = CovariateTable(c.doc_ids);
  return c;
}

// Random corpus in which every term occurs at least once.
inline Corpus random_toy_corpus(std::mt19937_64& rng, int docs, int vocab) {
  std::vector<std::vector<int>> tokens(static_cast<std::size_t>(docs));
  std::uniform_int_distribution<int> pick_doc(0, docs - 1), pick_term(0, vocab - 1), len(1, 12);
  for (int v = 0; v < vocab; ++v) tokens[static_cast<std::size_t>(pick_doc(rng))].push_back(v);
  for (auto& t : tokens) {
    const int n = len(rng);
    for (int i = 0; i < n; ++i) t.push_back(pick_term(rng));
  }
  return toy_corpus(vocab, tokens);
}

inline Eigen::MatrixXd random_beta(std::mt19937_64& rng, int k, int v, double shape = 0.5) {
  std::gamma_distribution<double> g(shape, 1.0);
  Eigen::MatrixXd b(k, v);
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < v; ++j) b(i, j) = g(rng) + 1e-9;
    b.row(i) /= b.row(i).sum();
  }
  return b;
}

// Straightforward coherence: dense presence table, stable sort for the top
// words, the same summation order as the definition.
inline std::vector<double> brute_force_coherence(const Eigen::MatrixXd& beta, const Corpus& corpus, int m) {
  const std::size_t D = corpus.num_docs(), V = corpus.vocab_size();
  std::vector<std::vector<bool>> present(D, std::vector<bool>(V, false));
  for (std::size_t d = 0; d < D; ++d)
    for (auto t : corpus.docs[d].terms) present[d][static_cast<std::size_t>(t)] = true;
  std::vector<double> out;
  for (Eigen::Index k = 0; k < beta.rows(); ++k) {
    std::vector<std::size_t> order(V);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return beta(k, static_cast<Eigen::Index>(a)) > beta(k, static_cast<Eigen::Index>(b));
    });
    double c = 0.0;
    for (int i = 1; i < m; ++i)
      for (int j = 0; j < i; ++j) {
        int both = 0, dj = 0;
        for (std::size_t d = 0; d < D; ++d) {
          both += present[d][order[static_cast<std::size_t>(i)]] && present[d][order[static_cast<std::size_t>(j)]];
          dj += present[d][order[static_cast<std::size_t>(j)]];
        }
        c += std::log((static_cast<double>(both) + 1.0) / static_cast<double>(dj));
      }
    out.push_back(c);
  }
  return out;
}

}  // namespace agendascope::testing
