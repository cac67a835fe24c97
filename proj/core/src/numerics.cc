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

#include "crgame/numerics.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

namespace crgame {

double NormalPdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double NormalCdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double NormalSurvival(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double InverseMillsRatio(double z) {
  if (z < 30.0) {
    const double tail = NormalSurvival(z);
    if (tail > 0.0) return NormalPdf(z) / tail;
  }
  // Asymptotic expansion: z + 1/z - 2/z^3 + 10/z^5.
  const double r = 1.0 / z;
  const double r2 = r * r;
  return z + r * (1.0 - r2 * (2.0 - 10.0 * r2));
}

QuadratureRule GaussHermiteNormal(int order) {
  if (order < 1) throw InvalidArgument("quadrature order must be >= 1");
  // Golub–Welsch on the Jacobi matrix of the probabilists' Hermite
  // polynomials: off-diagonal sqrt(k), weights = first eigenvector squared.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<double>(k));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  QuadratureRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  double total = 0.0;
  for (int k = 0; k < order; ++k) {
    rule.nodes[k] = solver.eigenvalues()(k);
    const double v = solver.eigenvectors()(0, k);
    rule.weights[k] = v * v;
    total += rule.weights[k];
  }
  for (double& w : rule.weights) w /= total;
  if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
  return rule;
}

double Mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) /
         static_cast<double>(xs.size());
}

double SampleStdDev(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double mean = Mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double Quantile(std::span<const double> xs, double prob) {
  if (xs.empty()) throw InvalidArgument("quantile of empty sample");
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = (static_cast<double>(sorted.size()) - 1.0) *
                   std::clamp(prob, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double Median(std::span<const double> xs) { return Quantile(xs, 0.5); }

}  // namespace crgame
