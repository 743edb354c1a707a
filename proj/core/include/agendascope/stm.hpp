#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "agendascope/corpus.hpp"
#include "agendascope/design.hpp"

namespace agendascope {

enum class InitMethod {
  kDirichlet,      // init_params as drawn
  kClusterSeeded,  // k-means centroids of document word distributions, mixed with the Dirichlet draw
};

struct FitConfig {
  int k = 0;
  std::uint64_t seed = 0;
  int max_em_iters = 200;
  double rel_tol = 1e-5;
  double ridge_gamma = 1.0;
  double sigma_floor = 1e-6;
  unsigned threads = 1;
  // Document partitions for the M-step reduction. Partial sums are combined in
  // partition order, so results do not depend on `threads`.
  std::size_t reduce_partitions = 16;
  InitMethod init = InitMethod::kClusterSeeded;
  int init_lloyd_iters = 10;
  // Independent starts; the fit with the highest final bound is kept (earliest
  // on ties). Start 0 uses `seed`, later starts derive theirs from it.
  int init_restarts = 1;

  // Throws InvalidArgument listing the violated constraint.
  void validate() const;
};

// Laplace-approximate posterior of one document's topic logits.
struct DocPosterior {
  Eigen::VectorXd eta;       // mode, K-1 free coordinates (K-th pinned at 0)
  Eigen::MatrixXd nu;        // inverse negative Hessian at the mode
  Eigen::VectorXd phi_sums;  // expected token count per topic (K)
  double bound = 0.0;        // this document's approximate objective
  int newton_iterations = 0;
  bool hessian_fallback = false;  // negative Hessian was not PD; eigenvalues were floored
};

struct FittedModel {
  int k = 0;
  std::vector<std::string> vocabulary;
  Eigen::MatrixXd beta;   // K x V, rows on the simplex
  Eigen::MatrixXd gamma;  // P x (K-1)
  Eigen::MatrixXd sigma;  // (K-1) x (K-1)
  Eigen::MatrixXd eta;    // D x (K-1)
  std::vector<Eigen::MatrixXd> nu;  // D matrices, (K-1) x (K-1)
  Eigen::MatrixXd theta;  // D x K, softmax of eta with a zero appended
  // Laplace-approximate objective after each E-step (not an exact ELBO).
  std::vector<double> bound_trace;
  FitConfig config;
  std::vector<std::string> design_column_names;
  std::vector<std::string> doc_ids;
  std::string formula;
  bool converged = false;
  // The last EM step lowered the objective and was undone.
  bool rejected_final_step = false;
  int hessian_fallbacks = 0;  // over the final E-step
};

// softmax of (eta, 0).
Eigen::VectorXd softmax_with_reference(const Eigen::Ref<const Eigen::VectorXd>& eta);

struct InitialParams {
  Eigen::MatrixXd beta;  // K x V
  Eigen::MatrixXd eta;   // D x (K-1), zeros
};

// Topic-word rows drawn from a symmetric Dirichlet(0.1) with the config seed.
// Throws KExceedsVocabulary when K > V.
InitialParams init_params(const Corpus& corpus, const FitConfig& config);

// Replaces each Dirichlet row of `init` by the normalized sum of a k-means
// centroid (k-means++ seeding from config.seed, then init_lloyd_iters Lloyd
// passes over document word distributions) and 0.1 times the drawn row.
void seed_from_clusters(const Corpus& corpus, const FitConfig& config, InitialParams& init);

// Maximizes
//   -1/2 (eta - mu)' Sigma^-1 (eta - mu) + sum_v c_v log(sum_k theta_k beta_kv)
// by damped Newton steps from `start` (mu when null). `log_beta` is K x V.
// When `word_topic` is non-null it receives the K x unique matrix of expected
// counts c_v * phi_vk at the mode, columns ordered as doc.terms.
DocPosterior e_step_doc(const DocTerms& doc, const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma_inv,
                        const Eigen::MatrixXd& log_beta, const Eigen::VectorXd* start = nullptr,
                        Eigen::MatrixXd* word_topic = nullptr);

struct MStepResult {
  Eigen::MatrixXd beta;
  Eigen::MatrixXd gamma;
  Eigen::MatrixXd sigma;
};

// `expected_counts` is the K x V sum of word_topic over documents.
// beta: floored at 1e-12 and row-normalized. gamma: ridge regression of eta
// on X, intercept unpenalized. sigma: mean residual outer product plus mean
// nu, eigenvalues floored at sigma_floor. Throws SingularDesign.
MStepResult m_step(const std::vector<DocPosterior>& posteriors, const Eigen::MatrixXd& expected_counts,
                   const Eigen::MatrixXd& X, const FitConfig& config);

// Ridge solve used by m_step: (X'X + ridge * I_without_intercept)^-1 X'Y.
Eigen::MatrixXd ridge_regression(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, double ridge);

// Checks the prevalence design invariants (intercept first, finite entries,
// no constant non-intercept column) and row alignment with the corpus.
// Throws DimensionMismatch.
void validate_design(const Corpus& corpus, const PrevalenceDesign& design);

// Variational EM. Stops when the relative change of the approximate objective
// drops below rel_tol or after max_em_iters iterations.
// Throws DimensionMismatch, KExceedsVocabulary, NonFiniteObjective.
FittedModel fit(const Corpus& corpus, const PrevalenceDesign& design, const FitConfig& config);

// fit() from caller-supplied starting values instead of init_params.
FittedModel fit_from(const Corpus& corpus, const PrevalenceDesign& design, const FitConfig& config,
                     InitialParams init);

}  // namespace agendascope
