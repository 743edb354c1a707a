#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "agendascope/design.hpp"
#include "agendascope/formula.hpp"
#include "agendascope/stm.hpp"

namespace agendascope {

struct EffectEstimate {
  int topic_index = 0;
  std::string covariate;
  std::vector<CovariateValue> grid;
  Eigen::VectorXd mean;
  Eigen::VectorXd ci_lower;  // 2.5% quantile across draws
  Eigen::VectorXd ci_upper;  // 97.5% quantile across draws
  int n_draws = 0;
};

struct ContrastEstimate {
  int topic_index = 0;
  std::string covariate;
  CovariateValue level_a;
  CovariateValue level_b;
  double point = 0.0;  // mean over draws of prediction(a) - prediction(b)
  std::pair<double, double> ci{0.0, 0.0};
  int n_draws = 0;
};

struct EffectOptions {
  // Predict at the observed covariate rows (target replaced) and average,
  // instead of holding the other covariates at their means/modes.
  bool average_over_observed = false;
  unsigned threads = 1;
};

inline constexpr int kMinDraws = 100;

// Stream-specific seed: SplitMix64 of (seed, stream).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Equally spaced grid over the observed range of a numeric covariate, or
// log-spaced when log_scale is set and the minimum is positive. Categorical
// covariates get their observed levels. Boolean covariates get {0, 1}.
std::vector<CovariateValue> default_grid(const PrevalenceDesign& design, const CovariateTable& covs,
                                         const std::string& covariate, std::size_t points, bool log_scale);

// Method of composition: each draw samples every document's logits from
// N(eta_d, nu_d), maps them to topic proportions, regresses the chosen
// topic's proportion on the design by OLS, samples coefficients from
// N(b, s^2 (X'X)^-1), and predicts at every grid point (clamped to [0, 1]).
// Throws InvalidArgument, UnknownCovariate, SingularDesign.
EffectEstimate estimate_effect(const FittedModel& model, const Formula& formula, const CovariateTable& covs,
                               int topic, const std::string& target, const std::vector<CovariateValue>& grid,
                               int n_draws, std::uint64_t seed, const EffectOptions& options = {});

ContrastEstimate estimate_contrast(const FittedModel& model, const Formula& formula, const CovariateTable& covs,
                                   int topic, const std::string& target, const CovariateValue& level_a,
                                   const CovariateValue& level_b, int n_draws, std::uint64_t seed,
                                   const EffectOptions& options = {});

// Lower and upper (1 - level)/2 tail quantiles. The upper bound is computed
// as the negated lower quantile of the negated sample, so negating the input
// swaps and negates the bounds exactly.
std::pair<double, double> central_interval(std::vector<double> values, double level = 0.95);

}  // namespace agendascope
