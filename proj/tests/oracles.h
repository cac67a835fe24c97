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


// Independent reference computations used as test oracles. Nothing here
// calls into the library's numerics.

#ifndef CRGAME_TESTS_ORACLES_H_
#define CRGAME_TESTS_ORACLES_H_

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace crgame::oracle {

inline double Phi(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
inline double phi(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

struct NigPosterior {
  Eigen::Vector4d m;
  Eigen::Matrix4d S;
  double a;
  double b;
};

// Closed-form batch normal-inverse-gamma posterior from the normal
// equations.
inline NigPosterior BatchPosterior(const Eigen::Vector4d& m0,
                                   const Eigen::Matrix4d& S0, double a0,
                                   double b0,
                                   const std::vector<Eigen::Vector4d>& xs,
                                   const std::vector<double>& ys) {
  Eigen::MatrixXd X(xs.size(), 4);
  Eigen::VectorXd y(ys.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    X.row(i) = xs[i].transpose();
    y(i) = ys[i];
  }
  const Eigen::Matrix4d P0 = S0.inverse();
  const Eigen::Matrix4d Pn = P0 + X.transpose() * X;
  NigPosterior out;
  out.S = Pn.inverse();
  out.m = out.S * (P0 * m0 + X.transpose() * y);
  out.a = a0 + 0.5 * static_cast<double>(ys.size());
  out.b = b0 + 0.5 * (y.dot(y) + m0.dot(P0 * m0) - out.m.dot(Pn * out.m));
  return out;
}

struct Moments {
  double mean;
  double var;
};

// Mean and variance of N(mu, sd^2) truncated to [lower, inf). With
// alpha = (lower - mu) / sd and lambda = phi(alpha) / (1 - Phi(alpha)),
// mean = mu + sd * lambda and var = sd^2 * (1 - lambda * (lambda - alpha)).
// For alpha > 3 lambda - alpha comes from the continued fraction
// 1 / (a + 2 / (a + 3 / (a + ...))), avoiding tail underflow and
// cancellation.
inline Moments TruncatedNormalMoments(double mu, double sd, double lower) {
  const double alpha = (lower - mu) / sd;
  double lambda, excess;
  if (alpha > 3.0) {
    double tail = alpha;
    for (int k = 400; k >= 2; --k) tail = alpha + k / tail;
    excess = 1.0 / tail;
    lambda = alpha + excess;
  } else {
    lambda = phi(alpha) / (0.5 * std::erfc(alpha / std::numbers::sqrt2));
    excess = lambda - alpha;
  }
  return {mu + sd * lambda, sd * sd * (1.0 - lambda * excess)};
}

}  // namespace crgame::oracle

#endif  // CRGAME_TESTS_ORACLES_H_
