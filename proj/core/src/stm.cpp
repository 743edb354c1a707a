#include "agendascope/stm.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "agendascope/error.hpp"
#include "agendascope/parallel.hpp"

namespace agendascope {

namespace {

constexpr double kBetaFloor = 1e-12;
constexpr double kDirichletConcentration = 0.1;
constexpr int kMaxNewtonIters = 100;
constexpr double kGradTol = 1e-8;
constexpr double kInitialSigmaScale = 20.0;
constexpr double kDirichletMix = 0.1;

std::uint64_t restart_seed(std::uint64_t seed, int restart) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(restart);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

void FitConfig::validate() const {
  if (k < 2) throw InvalidArgument("K must be >= 2");
  if (!(rel_tol > 0)) throw InvalidArgument("rel_tol must be > 0");
  if (max_em_iters < 1) throw InvalidArgument("max_em_iters must be >= 1");
  if (!(ridge_gamma >= 0)) throw InvalidArgument("ridge_gamma must be >= 0");
  if (!(sigma_floor > 0)) throw InvalidArgument("sigma_floor must be > 0");
  if (init_restarts < 1) throw InvalidArgument("init_restarts must be >= 1");
  if (init_lloyd_iters < 0) throw InvalidArgument("init_lloyd_iters must be >= 0");
}

Eigen::VectorXd softmax_with_reference(const Eigen::Ref<const Eigen::VectorXd>& eta) {
  const Eigen::Index k1 = eta.size();
  double m = 0.0;
  for (Eigen::Index i = 0; i < k1; ++i) m = std::max(m, eta(i));
  Eigen::VectorXd out(k1 + 1);
  double z = 0.0;
  for (Eigen::Index i = 0; i < k1; ++i) {
    out(i) = std::exp(eta(i) - m);
    z += out(i);
  }
  out(k1) = std::exp(-m);
  z += out(k1);
  return out / z;
}

InitialParams init_params(const Corpus& corpus, const FitConfig& config) {
  const auto V = static_cast<Eigen::Index>(corpus.vocab_size());
  const Eigen::Index K = config.k;
  if (K < 2) throw InvalidArgument("K must be >= 2");
  if (K > V)
    throw KExceedsVocabulary("K = " + std::to_string(K) + " exceeds vocabulary size " + std::to_string(V));

  std::mt19937_64 rng(config.seed);
  std::gamma_distribution<double> draw(kDirichletConcentration, 1.0);
  InitialParams p;
  p.beta.resize(K, V);
  for (Eigen::Index k = 0; k < K; ++k) {
    for (Eigen::Index v = 0; v < V; ++v) p.beta(k, v) = draw(rng);
    p.beta.row(k) /= p.beta.row(k).sum();
    p.beta.row(k) = p.beta.row(k).cwiseMax(kBetaFloor);
    p.beta.row(k) /= p.beta.row(k).sum();
  }
  p.eta = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(corpus.num_docs()), K - 1);
  return p;
}

void seed_from_clusters(const Corpus& corpus, const FitConfig& config, InitialParams& init) {
  const Eigen::Index K = init.beta.rows(), V = init.beta.cols();
  const std::size_t D = corpus.num_docs();
  if (D == 0 || static_cast<std::size_t>(K) > D) return;

  std::vector<double> len(D), sqnorm(D);
  for (std::size_t d = 0; d < D; ++d) {
    const auto& c = corpus.docs[d].counts;
    double n = 0.0, q = 0.0;
    for (auto x : c) {
      n += x;
      q += static_cast<double>(x) * x;
    }
    len[d] = n;
    sqnorm[d] = q / (n * n);
  }
  auto dist = [&](std::size_t d, const Eigen::VectorXd& c, double c_sq) {
    const auto& doc = corpus.docs[d];
    double dot = 0.0;
    for (std::size_t j = 0; j < doc.terms.size(); ++j) dot += doc.counts[j] * c(doc.terms[j]);
    return std::max(0.0, sqnorm[d] - 2.0 * dot / len[d] + c_sq);
  };
  auto doc_vector = [&](std::size_t d) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(V);
    const auto& doc = corpus.docs[d];
    for (std::size_t j = 0; j < doc.terms.size(); ++j) v(doc.terms[j]) = doc.counts[j] / len[d];
    return v;
  };

  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<Eigen::VectorXd> centers;
  std::vector<double> nearest(D, std::numeric_limits<double>::infinity());
  centers.push_back(doc_vector(std::uniform_int_distribution<std::size_t>(0, D - 1)(rng)));
  while (static_cast<Eigen::Index>(centers.size()) < K) {
    const double c_sq = centers.back().squaredNorm();
    for (std::size_t d = 0; d < D; ++d) nearest[d] = std::min(nearest[d], dist(d, centers.back(), c_sq));
    double total = 0.0;
    for (double x : nearest) total += x;
    std::size_t pick = 0;
    if (total > 0) {
      double u = std::uniform_real_distribution<double>(0.0, total)(rng);
      while (pick + 1 < D && u >= nearest[pick]) u -= nearest[pick++];
    }
    centers.push_back(doc_vector(pick));
  }

  for (int it = 0; it < config.init_lloyd_iters; ++it) {
    std::vector<double> c_sq(centers.size());
    for (std::size_t k = 0; k < centers.size(); ++k) c_sq[k] = centers[k].squaredNorm();
    std::vector<Eigen::VectorXd> sum(centers.size(), Eigen::VectorXd::Zero(V));
    std::vector<int> members(centers.size(), 0);
    for (std::size_t d = 0; d < D; ++d) {
      std::size_t best = 0;
      double best_dist = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < centers.size(); ++k) {
        const double q = dist(d, centers[k], c_sq[k]);
        if (q < best_dist) {
          best_dist = q;
          best = k;
        }
      }
      const auto& doc = corpus.docs[d];
      for (std::size_t j = 0; j < doc.terms.size(); ++j) sum[best](doc.terms[j]) += doc.counts[j] / len[d];
      ++members[best];
    }
    for (std::size_t k = 0; k < centers.size(); ++k)
      if (members[k] > 0) centers[k] = sum[k] / members[k];  // an empty cluster keeps its center
  }

  for (Eigen::Index k = 0; k < K; ++k) {
    init.beta.row(k) = centers[static_cast<std::size_t>(k)].transpose() + kDirichletMix * init.beta.row(k);
    init.beta.row(k) /= init.beta.row(k).sum();
    init.beta.row(k) = init.beta.row(k).cwiseMax(kBetaFloor);
    init.beta.row(k) /= init.beta.row(k).sum();
  }
}

namespace {

struct DocState {
  double objective;
  Eigen::VectorXd theta;  // K
  Eigen::MatrixXd phi;    // K x n, token responsibilities per unique word
  double data_loglik;
};

DocState evaluate(const Eigen::VectorXd& eta, const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma_inv,
                  const Eigen::MatrixXd& lb, const Eigen::VectorXd& counts) {
  const Eigen::Index K = lb.rows(), n = lb.cols();
  DocState s;
  s.theta = softmax_with_reference(eta);
  Eigen::VectorXd log_theta(K);
  for (Eigen::Index k = 0; k < K; ++k) log_theta(k) = std::log(s.theta(k));
  s.phi.resize(K, n);
  double ll = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    auto a = s.phi.col(j);
    a = lb.col(j) + log_theta;
    const double m = a.maxCoeff();
    a = (a.array() - m).exp();
    const double z = a.sum();
    a /= z;
    ll += counts(j) * (m + std::log(z));
  }
  const Eigen::VectorXd diff = eta - mu;
  s.data_loglik = ll;
  s.objective = ll - 0.5 * diff.dot(sigma_inv * diff);
  return s;
}

// Negative Hessian of the per-document objective (K-1 free coordinates).
Eigen::MatrixXd negative_hessian(const DocState& s, const Eigen::MatrixXd& sigma_inv, const Eigen::VectorXd& counts,
                                 double total) {
  const Eigen::Index k1 = sigma_inv.rows();
  const auto theta = s.theta.head(k1);
  const auto phi = s.phi.topRows(k1);
  Eigen::MatrixXd h = sigma_inv;
  h.noalias() += total * (Eigen::MatrixXd(theta.asDiagonal()) - theta * theta.transpose());
  const Eigen::VectorXd weighted_phi = phi * counts;  // sum_v c_v phi_v
  h.diagonal() -= weighted_phi;
  const Eigen::MatrixXd phi_c = phi * counts.cwiseSqrt().asDiagonal();
  h.noalias() += phi_c * phi_c.transpose();
  return 0.5 * (h + h.transpose());
}

Eigen::VectorXd gradient(const DocState& s, const Eigen::VectorXd& eta, const Eigen::VectorXd& mu,
                         const Eigen::MatrixXd& sigma_inv, const Eigen::VectorXd& counts, double total) {
  const Eigen::Index k1 = eta.size();
  return -(sigma_inv * (eta - mu)) + s.phi.topRows(k1) * counts - total * s.theta.head(k1);
}

}  // namespace

DocPosterior e_step_doc(const DocTerms& doc, const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma_inv,
                        const Eigen::MatrixXd& log_beta, const Eigen::VectorXd* start, Eigen::MatrixXd* word_topic) {
  const Eigen::Index K = log_beta.rows();
  const Eigen::Index k1 = K - 1;
  const auto n = static_cast<Eigen::Index>(doc.unique());
  if (n == 0) throw InvalidArgument("e_step_doc: document has no tokens");
  if (mu.size() != k1 || sigma_inv.rows() != k1 || sigma_inv.cols() != k1)
    throw DimensionMismatch("e_step_doc: mu/sigma_inv do not have K-1 dimensions");

  Eigen::MatrixXd lb(K, n);
  Eigen::VectorXd counts(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    lb.col(j) = log_beta.col(doc.terms[static_cast<std::size_t>(j)]);
    counts(j) = doc.counts[static_cast<std::size_t>(j)];
  }
  const double total = counts.sum();

  Eigen::VectorXd eta = start ? *start : mu;
  DocState s = evaluate(eta, mu, sigma_inv, lb, counts);
  DocPosterior post;

  for (int it = 0; it < kMaxNewtonIters; ++it) {
    Eigen::VectorXd g = gradient(s, eta, mu, sigma_inv, counts, total);
    if (g.lpNorm<Eigen::Infinity>() < kGradTol * std::max(1.0, total)) break;
    ++post.newton_iterations;

    Eigen::MatrixXd h = negative_hessian(s, sigma_inv, counts, total);
    // Damp until the Newton system is positive definite.
    double damping = 0.0;
    Eigen::VectorXd step;
    for (int tries = 0; tries < 60; ++tries) {
      Eigen::MatrixXd hd = h;
      hd.diagonal().array() += damping;
      Eigen::LLT<Eigen::MatrixXd> llt(hd);
      if (llt.info() == Eigen::Success) {
        step = llt.solve(g);
        if (step.allFinite()) break;
      }
      damping = damping == 0.0 ? 1e-6 * std::max(1.0, h.diagonal().cwiseAbs().maxCoeff()) : damping * 10.0;
      step.resize(0);
    }
    if (step.size() == 0) step = g;

    // Backtracking line search on the objective.
    double t = 1.0;
    const double slope = g.dot(step);
    bool accepted = false;
    for (int ls = 0; ls < 50; ++ls) {
      Eigen::VectorXd cand = eta + t * step;
      DocState cs = evaluate(cand, mu, sigma_inv, lb, counts);
      if (std::isfinite(cs.objective) && cs.objective >= s.objective + 1e-4 * t * slope) {
        eta = std::move(cand);
        s = std::move(cs);
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    if ((t * step).lpNorm<Eigen::Infinity>() < 1e-12) break;
  }

  post.eta = eta;
  const Eigen::MatrixXd h = negative_hessian(s, sigma_inv, counts, total);
  Eigen::LLT<Eigen::MatrixXd> llt(h);
  double logdet_h = 0.0;
  if (llt.info() == Eigen::Success && (llt.matrixL().toDenseMatrix().diagonal().array() > 0).all()) {
    post.nu = llt.solve(Eigen::MatrixXd::Identity(k1, k1));
    logdet_h = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  } else {
    post.hessian_fallback = true;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    const double floor_ev = 1e-6 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(floor_ev);
    post.nu = es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    logdet_h = ev.array().log().sum();
  }
  post.nu = 0.5 * (post.nu + post.nu.transpose().eval());

  post.phi_sums = s.phi * counts;
  if (word_topic) *word_topic = s.phi * counts.asDiagonal();

  // Laplace-approximate contribution: data log-likelihood at the mode, the
  // expected log prior under N(eta, nu), and the Gaussian entropy. The
  // -1/2 log|Sigma| term is added by the caller.
  const Eigen::VectorXd diff = eta - mu;
  post.bound = s.data_loglik - 0.5 * diff.dot(sigma_inv * diff) - 0.5 * logdet_h;
  return post;
}

Eigen::MatrixXd ridge_regression(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, double ridge) {
  Eigen::MatrixXd xtx = X.transpose() * X;
  for (Eigen::Index j = 1; j < xtx.rows(); ++j) xtx(j, j) += ridge;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(xtx);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.rcond() < 1e-13)
    throw SingularDesign("X'X + ridge is not invertible (rcond " + std::to_string(ldlt.rcond()) + ")");
  return ldlt.solve(X.transpose() * Y);
}

MStepResult m_step(const std::vector<DocPosterior>& posteriors, const Eigen::MatrixXd& expected_counts,
                   const Eigen::MatrixXd& X, const FitConfig& config) {
  const auto D = static_cast<Eigen::Index>(posteriors.size());
  if (D == 0 || X.rows() != D) throw DimensionMismatch("m_step: posteriors do not cover the design rows");
  const Eigen::Index k1 = posteriors.front().eta.size();

  MStepResult out;
  out.beta = expected_counts.cwiseMax(kBetaFloor);
  for (Eigen::Index k = 0; k < out.beta.rows(); ++k) out.beta.row(k) /= out.beta.row(k).sum();

  Eigen::MatrixXd eta(D, k1);
  for (Eigen::Index d = 0; d < D; ++d) eta.row(d) = posteriors[static_cast<std::size_t>(d)].eta.transpose();
  out.gamma = ridge_regression(X, eta, config.ridge_gamma);

  const Eigen::MatrixXd resid = eta - X * out.gamma;
  Eigen::MatrixXd sigma = resid.transpose() * resid;
  for (const auto& p : posteriors) sigma += p.nu;
  sigma /= static_cast<double>(D);
  sigma = 0.5 * (sigma + sigma.transpose().eval());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(config.sigma_floor);
  out.sigma = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  out.sigma = 0.5 * (out.sigma + out.sigma.transpose().eval());
  return out;
}

void validate_design(const Corpus& corpus, const PrevalenceDesign& design) {
  const Eigen::MatrixXd& X = design.X;
  if (static_cast<std::size_t>(X.rows()) != corpus.num_docs())
    throw DimensionMismatch("design has " + std::to_string(X.rows()) + " rows, corpus has " +
                            std::to_string(corpus.num_docs()) + " documents");
  if (!design.row_ids.empty() && design.row_ids != corpus.doc_ids)
    throw DimensionMismatch("design rows are not aligned with corpus documents");
  if (X.cols() < 1 || !(X.col(0).array() == 1.0).all())
    throw DimensionMismatch("first design column must be the all-ones intercept");
  if (!X.allFinite()) throw DimensionMismatch("design contains non-finite entries");
  for (Eigen::Index j = 1; j < X.cols(); ++j) {
    if ((X.col(j).array() == X(0, j)).all()) {
      std::string name = static_cast<std::size_t>(j) < design.column_names.size()
                             ? design.column_names[static_cast<std::size_t>(j)]
                             : std::to_string(j);
      throw DimensionMismatch("design column '" + name + "' is constant");
    }
  }
}

FittedModel fit(const Corpus& corpus, const PrevalenceDesign& design, const FitConfig& config) {
  config.validate();
  FittedModel best;
  for (int r = 0; r < config.init_restarts; ++r) {
    FitConfig start = config;
    if (r > 0) start.seed = restart_seed(config.seed, r);
    InitialParams init = init_params(corpus, start);
    if (config.init == InitMethod::kClusterSeeded) seed_from_clusters(corpus, start, init);
    FittedModel m = fit_from(corpus, design, config, std::move(init));
    if (r == 0 || m.bound_trace.back() > best.bound_trace.back()) best = std::move(m);
  }
  return best;
}

FittedModel fit_from(const Corpus& corpus, const PrevalenceDesign& design, const FitConfig& config,
                     InitialParams init) {
  config.validate();
  validate_design(corpus, design);
  const Eigen::MatrixXd& X = design.X;
  if (init.beta.rows() != config.k || static_cast<std::size_t>(init.beta.cols()) != corpus.vocab_size())
    throw DimensionMismatch("initial beta must be K x V");
  const Eigen::Index K = config.k, k1 = K - 1;
  const auto V = static_cast<Eigen::Index>(corpus.vocab_size());
  const std::size_t D = corpus.num_docs();

  Eigen::MatrixXd beta = std::move(init.beta);
  Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(X.cols(), k1);
  Eigen::MatrixXd sigma = kInitialSigmaScale * Eigen::MatrixXd::Identity(k1, k1);
  std::vector<DocPosterior> posteriors(D);
  const bool have_eta = init.eta.rows() == static_cast<Eigen::Index>(D) && init.eta.cols() == k1;
  for (std::size_t d = 0; d < D; ++d)
    posteriors[d].eta = have_eta ? Eigen::VectorXd(init.eta.row(static_cast<Eigen::Index>(d)).transpose())
                                 : Eigen::VectorXd::Zero(k1);

  const auto parts = fixed_partitions(D, config.reduce_partitions);
  std::vector<Eigen::MatrixXd> partial(parts.size());

  FittedModel model;
  model.config = config;
  bool first = true;
  Eigen::MatrixXd prev_beta, prev_gamma, prev_sigma;
  std::vector<DocPosterior> prev_posteriors;
  for (int iter = 0; iter < config.max_em_iters; ++iter) {
    const Eigen::MatrixXd log_beta = beta.array().log().matrix();
    Eigen::LLT<Eigen::MatrixXd> sigma_llt(sigma);
    const Eigen::MatrixXd sigma_inv = sigma_llt.solve(Eigen::MatrixXd::Identity(k1, k1));
    const double logdet_sigma = 2.0 * sigma_llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const Eigen::MatrixXd mu = X * gamma;

    parallel_for(parts.size(), config.threads, [&](std::size_t p) {
      Eigen::MatrixXd& acc = partial[p];
      acc.setZero(K, V);
      Eigen::MatrixXd wt;
      for (std::size_t d = parts[p].first; d < parts[p].second; ++d) {
        const Eigen::VectorXd mu_d = mu.row(static_cast<Eigen::Index>(d)).transpose();
        const Eigen::VectorXd start = posteriors[d].eta;
        posteriors[d] = e_step_doc(corpus.docs[d], mu_d, sigma_inv, log_beta, &start, &wt);
        const auto& terms = corpus.docs[d].terms;
        for (std::size_t j = 0; j < terms.size(); ++j) acc.col(terms[j]) += wt.col(static_cast<Eigen::Index>(j));
      }
    });

    double bound = 0.0;
    int fallbacks = 0;
    for (const auto& p : posteriors) {
      bound += p.bound - 0.5 * logdet_sigma;
      fallbacks += p.hessian_fallback ? 1 : 0;
    }
    if (!std::isfinite(bound)) throw NonFiniteObjective(iter);
    // The Laplace objective is not guaranteed to rise. A step that lowers it
    // is undone and the run ends at the previous iterate.
    if (!first && bound < model.bound_trace.back()) {
      beta = std::move(prev_beta);
      gamma = std::move(prev_gamma);
      sigma = std::move(prev_sigma);
      posteriors = std::move(prev_posteriors);
      model.converged = true;
      model.rejected_final_step = true;
      break;
    }
    model.bound_trace.push_back(bound);
    model.hessian_fallbacks = fallbacks;
    prev_beta = beta;
    prev_gamma = gamma;
    prev_sigma = sigma;
    prev_posteriors = posteriors;

    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(K, V);
    for (const auto& a : partial) expected += a;
    MStepResult m = m_step(posteriors, expected, X, config);
    beta = std::move(m.beta);
    gamma = std::move(m.gamma);
    sigma = std::move(m.sigma);

    if (!first) {
      const double prev = model.bound_trace[model.bound_trace.size() - 2];
      if (std::abs(bound - prev) / std::abs(prev) < config.rel_tol) {
        model.converged = true;
        break;
      }
    }
    first = false;
  }

  model.k = config.k;
  model.vocabulary = corpus.vocabulary;
  model.beta = std::move(beta);
  model.gamma = std::move(gamma);
  model.sigma = std::move(sigma);
  model.eta.resize(static_cast<Eigen::Index>(D), k1);
  model.theta.resize(static_cast<Eigen::Index>(D), K);
  model.nu.reserve(D);
  for (std::size_t d = 0; d < D; ++d) {
    const auto row = static_cast<Eigen::Index>(d);
    model.eta.row(row) = posteriors[d].eta.transpose();
    model.theta.row(row) = softmax_with_reference(posteriors[d].eta).transpose();
    model.nu.push_back(std::move(posteriors[d].nu));
  }
  model.design_column_names = design.column_names;
  model.doc_ids = corpus.doc_ids;
  return model;
}

}  // namespace agendascope
