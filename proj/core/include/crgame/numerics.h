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

#ifndef CRGAME_NUMERICS_H_
#define CRGAME_NUMERICS_H_

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace crgame {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerically degraded state (e.g. a covariance that lost definiteness).
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Invalid arguments or configuration.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double NormalPdf(double z);
double NormalCdf(double z);
// 1 - Phi(z), accurate in the upper tail.
double NormalSurvival(double z);
// phi(z) / (1 - Phi(z)); stable for large z.
double InverseMillsRatio(double z);

// Gauss–Hermite rule for E[f(Z)], Z ~ N(0, 1): nodes in standard-normal
// units and weights that sum to one.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
QuadratureRule GaussHermiteNormal(int order);

double Mean(std::span<const double> xs);
// Sample standard deviation (n - 1 denominator); 0 when fewer than 2 values.
double SampleStdDev(std::span<const double> xs);
double Median(std::span<const double> xs);
// Linear-interpolation quantile (Hyndman–Fan type 7) of an unsorted sample.
double Quantile(std::span<const double> xs, double prob);

}  // namespace crgame

#endif  // CRGAME_NUMERICS_H_
