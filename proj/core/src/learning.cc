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

#include "crgame/learning.h"

#include <cmath>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "crgame/numerics.h"
#include "crgame/truncated_normal.h"

namespace crgame::learning {
namespace {

constexpr int kP = market::kNumCoefficients;

bool IsPositiveDefinite(const Matrix4& s) {
  Eigen::LLT<Matrix4> llt(s);
  return llt.info() == Eigen::Success;
}

Matrix4 CholeskyOrThrow(const Matrix4& s) {
  Eigen::LLT<Matrix4> llt(s);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("posterior scale matrix is not positive definite");
  }
  return llt.matrixL();
}

Covariate StandardNormalVector(RandomStream& rng) {
  Covariate z;
  for (int k = 0; k < kP; ++k) z(k) = rng.Normal();
  return z;
}

}  // namespace

void PosteriorHyper::Validate() const {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw NumericalError("posterior: shape and rate must be positive");
  }
  if (!S.isApprox(S.transpose(), 1e-10) || !IsPositiveDefinite(S)) {
    throw NumericalError("posterior: S must be symmetric positive definite");
  }
}

double PosteriorHyper::ExpectedVariance() const {
  if (!(a > 1.0)) throw NumericalError("posterior: E[sigma^2] needs a > 1");
  return b / (a - 1.0);
}

double LearningOptions::NoiseVariance(const PosteriorHyper& hyper) const {
  return variance_mode == VarianceMode::kKnown ? known_sigma * known_sigma
                                               : hyper.ExpectedVariance();
}

PosteriorHyper MakePrior(const Covariate& mean, const Covariate& sd, double a0,
                         double b0) {
  if (!(a0 > 1.0) || !(b0 > 0.0)) {
    throw InvalidArgument("prior: need a0 > 1 and b0 > 0");
  }
  PosteriorHyper prior;
  prior.m = mean;
  prior.a = a0;
  prior.b = b0;
  const double scale = b0 / (a0 - 1.0);
  prior.S = (sd.array().square() / scale).matrix().asDiagonal();
  prior.Validate();
  return prior;
}

PosteriorHyper ReferencePrior() {
  const double a0 = 3.0;
  const double b0 = (a0 - 1.0) * 4.5 * 4.5;
  return MakePrior(Covariate(35.0, -2.0, 0.5, 3.0),
                   Covariate(10.0, 2.0, 2.0, 4.0), a0, b0);
}

PosteriorHyper ConjugateUpdate(const PosteriorHyper& hyper,
                               const Covariate& covariate, double demand) {
  const Covariate sx = hyper.S * covariate;
  const double denom = 1.0 + covariate.dot(sx);
  const double resid = demand - covariate.dot(hyper.m);

  PosteriorHyper out;
  out.m = hyper.m + sx * (resid / denom);
  out.S = hyper.S - (sx * sx.transpose()) / denom;
  out.S = 0.5 * (out.S + out.S.transpose());
  out.a = hyper.a + 0.5;
  out.b = hyper.b + 0.5 * resid * resid / denom;

  if (!IsPositiveDefinite(out.S)) {
    const double base = std::max(out.S.diagonal().cwiseAbs().maxCoeff(), 1e-300);
    for (double jitter : {1e-12, 1e-10, 1e-8}) {
      Matrix4 trial = out.S;
      trial.diagonal().array() += jitter * base;
      if (IsPositiveDefinite(trial)) {
        out.S = trial;
        return out;
      }
    }
    throw NumericalError("conjugate update: S lost positive definiteness");
  }
  return out;
}

double SampleTruncatedLatent(const PosteriorHyper& hyper,
                             const Covariate& covariate, double stock,
                             double sigma_draw, RandomStream& rng) {
  return SampleNormalAbove(covariate.dot(hyper.m), sigma_draw, stock, rng);
}

PosteriorHyper GibbsRefresh(const PosteriorHyper& prior,
                            std::span<const ObservationRecord> history,
                            int sweeps, RandomStream& rng,
                            const LearningOptions& options) {
  if (sweeps < 1) throw InvalidArgument("gibbs: sweeps must be >= 1");
  if (history.empty()) return prior;

  const auto n = static_cast<Eigen::Index>(history.size());
  Eigen::Matrix<double, Eigen::Dynamic, kP> x(n, kP);
  Eigen::VectorXd latent(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x.row(i) = history[i].covariate.transpose();
    latent(i) = history[i].sales;
  }

  const Matrix4 prior_precision = prior.S.inverse();
  const Covariate prior_term = prior_precision * prior.m;
  const Matrix4 post_scale =
      (prior_precision + x.transpose() * x).inverse().eval();
  const Matrix4 post_chol = CholeskyOrThrow(0.5 * (post_scale + post_scale.transpose()));

  const bool known = options.variance_mode == VarianceMode::kKnown;
  double variance = options.NoiseVariance(prior);
  Covariate beta = prior.m;

  Covariate beta_sum = Covariate::Zero();
  Matrix4 beta_outer = Matrix4::Zero();
  double var_sum = 0.0;
  double var_sq_sum = 0.0;
  const int total = options.gibbs_burn_in + sweeps;

  for (int sweep = 0; sweep < total; ++sweep) {
    const double sd = std::sqrt(variance);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (history[i].censored) {
        latent(i) = SampleNormalAbove(x.row(i).dot(beta), sd,
                                      history[i].stock, rng);
      }
    }
    const Covariate mean =
        post_scale * (prior_term + x.transpose() * latent);
    beta = mean + sd * (post_chol * StandardNormalVector(rng));
    if (!known) {
      const Eigen::VectorXd resid = latent - x * beta;
      const Covariate dev = beta - prior.m;
      const double shape = prior.a + 0.5 * static_cast<double>(n + kP);
      const double rate =
          prior.b + 0.5 * (resid.squaredNorm() + dev.dot(prior_precision * dev));
      variance = rate / rng.Gamma(shape);
    }
    if (sweep >= options.gibbs_burn_in) {
      beta_sum += beta;
      beta_outer += beta * beta.transpose();
      var_sum += variance;
      var_sq_sum += variance * variance;
    }
  }

  const double count = static_cast<double>(sweeps);
  PosteriorHyper out;
  out.m = beta_sum / count;
  const double var_mean = var_sum / count;
  const double shape_floor = prior.a + 0.5 * static_cast<double>(n);
  if (known) {
    out.a = shape_floor;
    out.b = (out.a - 1.0) * var_mean;
  } else {
    const double var_var =
        sweeps > 1 ? (var_sq_sum - count * var_mean * var_mean) / (count - 1.0)
                   : 0.0;
    out.a = var_var > 0.0 ? var_mean * var_mean / var_var + 2.0 : shape_floor;
    out.b = var_mean * (out.a - 1.0);
  }
  if (sweeps > kP) {
    Matrix4 cov = (beta_outer - count * out.m * out.m.transpose()) /
                  (count - 1.0);
    cov = 0.5 * (cov + cov.transpose());
    out.S = cov / var_mean;
  }
  if (sweeps <= kP || !IsPositiveDefinite(out.S)) out.S = post_scale;
  return out;
}

PosteriorHyper OnlineUpdate(const PosteriorHyper& hyper,
                            const ObservationRecord& record, RandomStream& rng,
                            const LearningOptions& options) {
  if (!record.censored) {
    return ConjugateUpdate(hyper, record.covariate, record.sales);
  }
  if (options.imputation != ImputationMode::kSingleImputation) {
    throw InvalidArgument(
        "OnlineUpdate handles single imputation only; use DemandLearner");
  }
  const double predictive_var =
      options.NoiseVariance(hyper) *
      (1.0 + record.covariate.dot(hyper.S * record.covariate));
  const double latent = SampleTruncatedLatent(
      hyper, record.covariate, record.stock, std::sqrt(predictive_var), rng);
  return ConjugateUpdate(hyper, record.covariate, latent);
}

DemandLearner::DemandLearner(PosteriorHyper prior, LearningOptions options)
    : prior_(prior), posterior_(prior), options_(options) {
  prior_.Validate();
}

void DemandLearner::Observe(const ObservationRecord& record,
                            RandomStream& rng) {
  ObserveAll(std::span<const ObservationRecord>(&record, 1), rng);
}

void DemandLearner::ObserveAll(std::span<const ObservationRecord> records,
                               RandomStream& rng) {
  if (options_.imputation == ImputationMode::kSingleImputation) {
    for (const ObservationRecord& r : records) {
      posterior_ = OnlineUpdate(posterior_, r, rng, options_);
    }
    return;
  }
  history_.insert(history_.end(), records.begin(), records.end());
  posterior_ =
      GibbsRefresh(prior_, history_, options_.gibbs_retained, rng, options_);
}

CoefficientSampler::CoefficientSampler(const PosteriorHyper& hyper,
                                       const LearningOptions& options)
    : hyper_(hyper),
      chol_(CholeskyOrThrow(hyper.S)),
      known_variance_(options.variance_mode == VarianceMode::kKnown),
      known_variance_value_(options.known_sigma * options.known_sigma) {}

CoefficientDraw CoefficientSampler::Draw(RandomStream& rng) const {
  CoefficientDraw draw;
  draw.variance =
      known_variance_ ? known_variance_value_ : hyper_.b / rng.Gamma(hyper_.a);
  draw.beta =
      hyper_.m + std::sqrt(draw.variance) * (chol_ * StandardNormalVector(rng));
  return draw;
}

CoefficientDraw SampleCoefficients(const PosteriorHyper& hyper,
                                   const LearningOptions& options,
                                   RandomStream& rng) {
  return CoefficientSampler(hyper, options).Draw(rng);
}

double PosteriorMse(const PosteriorHyper& hyper,
                    const market::DemandParams& truth) {
  return (hyper.m - truth.Coefficients()).squaredNorm() /
         static_cast<double>(kP);
}

void TypeBelief::Validate() const {
  if (probs.empty()) throw InvalidArgument("type belief: empty");
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw InvalidArgument("type belief: negative entry");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw InvalidArgument("type belief: entries must sum to 1");
  }
}

TypeBeliefUpdate UpdateTypeBelief(const TypeBelief& belief,
                                  std::span<const double> likelihoods) {
  if (likelihoods.size() != belief.probs.size()) {
    throw InvalidArgument("type belief: likelihood size mismatch");
  }
  TypeBeliefUpdate out;
  out.belief.probs.resize(belief.probs.size());
  double total = 0.0;
  for (std::size_t k = 0; k < likelihoods.size(); ++k) {
    if (!(likelihoods[k] >= 0.0)) {
      throw InvalidArgument("type belief: likelihoods must be >= 0");
    }
    out.belief.probs[k] = belief.probs[k] * likelihoods[k];
    total += out.belief.probs[k];
  }
  if (!(total > 0.0)) {
    out.belief = belief;
    out.degenerate_evidence = true;
    return out;
  }
  for (double& p : out.belief.probs) p /= total;
  return out;
}

TypeBeliefUpdate UpdateTypeBelief(const TypeBelief& belief,
                                  const market::Action& observed_rival_action,
                                  const ActionLikelihood& action_model) {
  std::vector<double> likelihoods(belief.probs.size());
  for (std::size_t k = 0; k < likelihoods.size(); ++k) {
    likelihoods[k] = action_model(observed_rival_action, static_cast<int>(k));
  }
  return UpdateTypeBelief(belief, likelihoods);
}

}  // namespace crgame::learning
