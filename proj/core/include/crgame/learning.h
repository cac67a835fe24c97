// Copyright 2026 The crgame Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Bayesian filtering of the demand coefficients under censored sales and
// discrete belief updating over the rival's type.
//
// The demand posterior is normal–inverse-gamma:
//
//   sigma^2 ~ InvGamma(a, b),   beta | sigma^2 ~ N(m, sigma^2 * S).
//
// S is therefore a covariance *scale*; the marginal covariance of beta is
// S * b / (a - 1). Under VarianceMode::kKnown the noise variance is pinned at
// a fixed value and (a, b) are carried along but never sampled.

#ifndef CRGAME_LEARNING_H_
#define CRGAME_LEARNING_H_

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "crgame/market.h"
#include "crgame/rng.h"

namespace crgame::learning {

using market::Covariate;
using Matrix4 = Eigen::Matrix<double, market::kNumCoefficients,
                              market::kNumCoefficients>;

struct PosteriorHyper {
  Covariate m = Covariate::Zero();
  Matrix4 S = Matrix4::Identity();
  double a = 3.0;
  double b = 1.0;

  // Throws NumericalError unless S is symmetric positive definite and
  // a, b > 0.
  void Validate() const;
  // E[sigma^2] = b / (a - 1); requires a > 1.
  double ExpectedVariance() const;
  friend bool operator==(const PosteriorHyper&, const PosteriorHyper&) =
      default;
};

enum class VarianceMode { kLearned, kKnown };
enum class ImputationMode { kSingleImputation, kGibbsEveryPeriod };

struct LearningOptions {
  VarianceMode variance_mode = VarianceMode::kLearned;
  // Noise sd used when variance_mode == kKnown.
  double known_sigma = 4.5;
  ImputationMode imputation = ImputationMode::kSingleImputation;
  int gibbs_burn_in = 500;
  int gibbs_retained = 1500;

  double NoiseVariance(const PosteriorHyper& hyper) const;
};

// Builds the prior from coefficient means and marginal standard deviations:
// S is scaled so that the prior covariance of beta equals diag(sd^2) at the
// prior mean noise variance b0 / (a0 - 1).
PosteriorHyper MakePrior(const Covariate& mean, const Covariate& sd, double a0,
                         double b0);

// The prior used throughout the reference experiment: mean
// (35, -2, 0.5, 3), sds (10, 2, 2, 4), a0 = 3, b0 = 40.5.
PosteriorHyper ReferencePrior();

struct ObservationRecord {
  Covariate covariate = Covariate::Zero();
  // Learning signal: the latent demand for uncensored records, the stock
  // level for censored ones.
  double sales = 0.0;
  double stock = 0.0;
  bool censored = false;
};

// Exact one-observation normal–inverse-gamma update on an uncensored demand
// value. Retries with diagonal jitter if the updated S fails to factor and
// throws NumericalError if that also fails.
PosteriorHyper ConjugateUpdate(const PosteriorHyper& hyper,
                               const Covariate& covariate, double demand);

// Draws latent demand from N(x'm, sigma_draw^2) restricted to [stock, inf).
double SampleTruncatedLatent(const PosteriorHyper& hyper,
                             const Covariate& covariate, double stock,
                             double sigma_draw, RandomStream& rng);

// Data-augmentation Gibbs sampler over the full history. Runs
// options.gibbs_burn_in warm-up sweeps followed by `sweeps` retained sweeps
// and moment-matches the retained draws back to hyperparameters. Returns
// `prior` unchanged for an empty history.
PosteriorHyper GibbsRefresh(const PosteriorHyper& prior,
                            std::span<const ObservationRecord> history,
                            int sweeps, RandomStream& rng,
                            const LearningOptions& options = {});

// Single-imputation online step: uncensored records are conjugate-updated
// directly; censored records impute one latent draw from the current
// posterior predictive truncated at the stock level.
PosteriorHyper OnlineUpdate(const PosteriorHyper& hyper,
                            const ObservationRecord& record, RandomStream& rng,
                            const LearningOptions& options = {});

// Stateful wrapper dispatching between the two imputation modes. The
// Gibbs-every-period mode retains the full history and refreshes from the
// prior each time.
class DemandLearner {
 public:
  DemandLearner(PosteriorHyper prior, LearningOptions options);

  void Observe(const ObservationRecord& record, RandomStream& rng);
  // Observes several records made in the same period; in Gibbs mode the
  // refresh runs once after all of them are appended.
  void ObserveAll(std::span<const ObservationRecord> records,
                  RandomStream& rng);

  const PosteriorHyper& posterior() const { return posterior_; }
  const PosteriorHyper& prior() const { return prior_; }
  const std::vector<ObservationRecord>& history() const { return history_; }

 private:
  PosteriorHyper prior_;
  PosteriorHyper posterior_;
  LearningOptions options_;
  std::vector<ObservationRecord> history_;
};

// Joint draw of (beta, sigma^2) from the posterior.
struct CoefficientDraw {
  Covariate beta;
  double variance;
};
CoefficientDraw SampleCoefficients(const PosteriorHyper& hyper,
                                   const LearningOptions& options,
                                   RandomStream& rng);

// Caches the Cholesky factor of S for repeated draws from one posterior.
class CoefficientSampler {
 public:
  CoefficientSampler(const PosteriorHyper& hyper,
                     const LearningOptions& options);
  CoefficientDraw Draw(RandomStream& rng) const;

 private:
  PosteriorHyper hyper_;
  Matrix4 chol_;
  bool known_variance_;
  double known_variance_value_;
};

// Mean over the four coefficients of (m_k - truth_k)^2; sigma is excluded.
double PosteriorMse(const PosteriorHyper& hyper,
                    const market::DemandParams& truth);

// Discrete posterior over the rival's possible types.
struct TypeBelief {
  std::vector<double> probs;

  // Throws InvalidArgument unless entries are >= 0 and sum to 1 (1e-12).
  void Validate() const;
};

struct TypeBeliefUpdate {
  TypeBelief belief;
  // True when every likelihood was zero; the prior is returned unchanged.
  bool degenerate_evidence = false;
};

// Bayes' rule: posterior[k] ∝ belief[k] * likelihoods[k].
TypeBeliefUpdate UpdateTypeBelief(const TypeBelief& belief,
                                  std::span<const double> likelihoods);

using ActionLikelihood =
    std::function<double(const market::Action& action, int type_index)>;

TypeBeliefUpdate UpdateTypeBelief(const TypeBelief& belief,
                                  const market::Action& observed_rival_action,
                                  const ActionLikelihood& action_model);

}  // namespace crgame::learning

#endif  // CRGAME_LEARNING_H_
