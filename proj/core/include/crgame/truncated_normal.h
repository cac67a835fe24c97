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

#ifndef CRGAME_TRUNCATED_NORMAL_H_
#define CRGAME_TRUNCATED_NORMAL_H_

#include "crgame/rng.h"

namespace crgame {

// Standardized cut above which the exponential-proposal tail sampler is used.
inline constexpr double kTailSamplerCut = 8.0;

// Draws Z ~ N(0, 1) conditioned on Z >= cut.
//
// cut <= 0: plain rejection from N(0, 1) (acceptance >= 1/2).
// 0 < cut <= kTailSamplerCut: inverse CDF on the upper tail.
// cut > kTailSamplerCut: Robert (1995) translated-exponential rejection,
// whose acceptance rate tends to one as cut grows.
// A cut of -infinity yields an untruncated draw.
double SampleStandardNormalAbove(double cut, RandomStream& rng);

// Draws X ~ N(mean, sd^2) conditioned on X >= lower. Never returns a value
// below `lower`. Throws InvalidArgument if sd <= 0.
double SampleNormalAbove(double mean, double sd, double lower,
                         RandomStream& rng);

}  // namespace crgame

#endif  // CRGAME_TRUNCATED_NORMAL_H_
