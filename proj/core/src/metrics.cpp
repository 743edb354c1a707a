#include "agendascope/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "agendascope/error.hpp"

namespace agendascope {

std::vector<Eigen::Index> top_indices(const Eigen::Ref<const Eigen::RowVectorXd>& row, std::size_t n) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(row.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  n = std::min(n, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n), idx.end(),
                    [&](Eigen::Index a, Eigen::Index b) { return row(a) > row(b) || (row(a) == row(b) && a < b); });
  idx.resize(n);
  return idx;
}

Eigen::VectorXd semantic_coherence(const Eigen::MatrixXd& beta, const Corpus& corpus, int m) {
  if (m < 2) throw InvalidArgument("coherence requires m >= 2");
  if (m > beta.cols()) throw InvalidArgument("coherence requires m <= V");
  if (static_cast<std::size_t>(beta.cols()) != corpus.vocab_size())
    throw DimensionMismatch("beta columns do not match the corpus vocabulary");

  // Sorted document lists per term.
  std::vector<std::vector<std::int32_t>> postings(corpus.vocab_size());
  for (std::size_t d = 0; d < corpus.num_docs(); ++d)
    for (auto t : corpus.docs[d].terms) postings[static_cast<std::size_t>(t)].push_back(static_cast<std::int32_t>(d));

  auto co_count = [](const std::vector<std::int32_t>& a, const std::vector<std::int32_t>& b) {
    std::size_t i = 0, j = 0, n = 0;
    while (i < a.size() && j < b.size()) {
      if (a[i] < b[j]) {
        ++i;
      } else if (b[j] < a[i]) {
        ++j;
      } else {
        ++n;
        ++i;
        ++j;
      }
    }
    return n;
  };

  Eigen::VectorXd out(beta.rows());
  for (Eigen::Index k = 0; k < beta.rows(); ++k) {
    auto top = top_indices(beta.row(k), static_cast<std::size_t>(m));
    for (auto v : top)
      if (postings[static_cast<std::size_t>(v)].empty())
        throw TermAbsentFromCorpus("top term '" + corpus.vocabulary[static_cast<std::size_t>(v)] +
                                   "' of topic " + std::to_string(k) + " occurs in no document");
    double c = 0.0;
    for (std::size_t i = 1; i < top.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        const auto& pi = postings[static_cast<std::size_t>(top[i])];
        const auto& pj = postings[static_cast<std::size_t>(top[j])];
        c += std::log((static_cast<double>(co_count(pi, pj)) + 1.0) / static_cast<double>(pj.size()));
      }
    }
    out(k) = c;
  }
  return out;
}

Eigen::MatrixXd exclusivity_matrix(const Eigen::MatrixXd& beta) {
  Eigen::MatrixXd e = beta;
  for (Eigen::Index v = 0; v < beta.cols(); ++v) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < beta.rows(); ++k) s += beta(k, v);
    e.col(v) /= s;
  }
  return e;
}

Eigen::MatrixXd row_ecdf(const Eigen::MatrixXd& values) {
  const Eigen::Index V = values.cols();
  Eigen::MatrixXd out(values.rows(), V);
  std::vector<double> sorted(static_cast<std::size_t>(V));
  for (Eigen::Index k = 0; k < values.rows(); ++k) {
    for (Eigen::Index v = 0; v < V; ++v) sorted[static_cast<std::size_t>(v)] = values(k, v);
    std::sort(sorted.begin(), sorted.end());
    for (Eigen::Index v = 0; v < V; ++v) {
      auto le = std::upper_bound(sorted.begin(), sorted.end(), values(k, v)) - sorted.begin();
      out(k, v) = static_cast<double>(le) / static_cast<double>(V);
    }
  }
  return out;
}

FrexResult exclusivity_frex(const Eigen::MatrixXd& beta, double w, int m) {
  if (!(w >= 0.0 && w <= 1.0)) throw InvalidArgument("FREX weight must lie in [0, 1]");
  const Eigen::MatrixXd ex_cdf = row_ecdf(exclusivity_matrix(beta));
  const Eigen::MatrixXd fr_cdf = row_ecdf(beta);
  FrexResult r;
  r.frex = (w / ex_cdf.array() + (1.0 - w) / fr_cdf.array()).inverse().matrix();
  r.exclusivity_per_topic.resize(beta.rows());
  for (Eigen::Index k = 0; k < beta.rows(); ++k) {
    auto top = top_indices(beta.row(k), static_cast<std::size_t>(std::max(m, 1)));
    double s = 0.0;
    for (auto v : top) s += r.frex(k, v);
    r.exclusivity_per_topic(k) = s / static_cast<double>(top.size());
  }
  return r;
}

Eigen::MatrixXd lift(const Eigen::MatrixXd& beta, const Corpus& corpus) {
  if (static_cast<std::size_t>(beta.cols()) != corpus.vocab_size())
    throw DimensionMismatch("beta columns do not match the corpus vocabulary");
  const auto totals = corpus.term_totals();
  double n = 0.0;
  for (auto t : totals) n += static_cast<double>(t);
  Eigen::MatrixXd out = beta;
  for (Eigen::Index v = 0; v < beta.cols(); ++v)
    out.col(v) /= static_cast<double>(totals[static_cast<std::size_t>(v)]) / n;
  return out;
}

Eigen::MatrixXd score(const Eigen::MatrixXd& beta) {
  // Scalar loops: vectorized log and column reductions round differently
  // depending on a column's position, which would break equivariance.
  const Eigen::Index K = beta.rows(), V = beta.cols();
  Eigen::MatrixXd out(K, V);
  for (Eigen::Index v = 0; v < V; ++v) {
    double mean_log = 0.0;
    for (Eigen::Index k = 0; k < K; ++k) mean_log += std::log(beta(k, v));
    mean_log /= static_cast<double>(K);
    for (Eigen::Index k = 0; k < K; ++k) out(k, v) = beta(k, v) * (std::log(beta(k, v)) - mean_log);
  }
  return out;
}

namespace {

RankedTerms ranked(const Eigen::Ref<const Eigen::RowVectorXd>& row, const std::vector<std::string>& vocab,
                   std::size_t n) {
  RankedTerms out;
  for (auto v : top_indices(row, n)) out.emplace_back(vocab[static_cast<std::size_t>(v)], row(v));
  return out;
}

}  // namespace

std::vector<TopicSummary> summarize_topics(const Eigen::MatrixXd& beta, const std::vector<std::string>& vocabulary,
                                           const Corpus& corpus, std::size_t n_words, double frex_w) {
  const auto frex = exclusivity_frex(beta, frex_w);
  const auto lifts = lift(beta, corpus);
  const auto scores = score(beta);
  std::vector<TopicSummary> out;
  for (Eigen::Index k = 0; k < beta.rows(); ++k) {
    TopicSummary s;
    s.topic_index = static_cast<int>(k);
    s.top_prob = ranked(beta.row(k), vocabulary, n_words);
    s.top_frex = ranked(frex.frex.row(k), vocabulary, n_words);
    s.top_lift = ranked(lifts.row(k), vocabulary, n_words);
    s.top_score = ranked(scores.row(k), vocabulary, n_words);
    out.push_back(std::move(s));
  }
  return out;
}

ModelQuality model_quality(const Eigen::MatrixXd& beta, const Corpus& corpus, int m, double frex_w) {
  ModelQuality q;
  q.k = static_cast<int>(beta.rows());
  q.m_top_words = m;
  q.coherence_per_topic = semantic_coherence(beta, corpus, m);
  q.exclusivity_per_topic = exclusivity_frex(beta, frex_w, m).exclusivity_per_topic;
  q.mean_coherence = q.coherence_per_topic.mean();
  q.mean_exclusivity = q.exclusivity_per_topic.mean();
  return q;
}

}  // namespace agendascope
