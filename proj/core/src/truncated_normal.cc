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

#include "crgame/truncated_normal.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/erf.hpp>

#include "crgame/numerics.h"

namespace crgame {

double SampleStandardNormalAbove(double cut, RandomStream& rng) {
  if (cut <= 0.0) {
    for (;;) {
      const double z = rng.Normal();
      if (z >= cut) return z;
    }
  }
  if (cut <= kTailSamplerCut) {
    const double tail = rng.Uniform() * NormalSurvival(cut);
    const double z = std::sqrt(2.0) * boost::math::erfc_inv(2.0 * tail);
    return std::max(z, cut);
  }
  const double rate = 0.5 * (cut + std::sqrt(cut * cut + 4.0));
  for (;;) {
    const double z = cut - std::log(rng.Uniform()) / rate;
    const double d = z - rate;
    if (rng.Uniform() <= std::exp(-0.5 * d * d)) return z;
  }
}

double SampleNormalAbove(double mean, double sd, double lower,
                         RandomStream& rng) {
  if (!(sd > 0.0)) throw InvalidArgument("truncated normal: sd must be > 0");
  if (lower == -std::numeric_limits<double>::infinity()) {
    return mean + sd * rng.Normal();
  }
  const double cut = (lower - mean) / sd;
  return std::max(mean + sd * SampleStandardNormalAbove(cut, rng), lower);
}

}  // namespace crgame
