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

#include "crgame/rng.h"

#include <cmath>

namespace crgame {
namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void MulHiLo(std::uint32_t a, std::uint32_t b, std::uint32_t* hi,
                    std::uint32_t* lo) {
  const std::uint64_t product =
      static_cast<std::uint64_t>(a) * static_cast<std::uint64_t>(b);
  *hi = static_cast<std::uint32_t>(product >> 32);
  *lo = static_cast<std::uint32_t>(product);
}

}  // namespace

std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

Philox4x32::Counter Philox4x32::Block(Counter ctr, Key key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    MulHiLo(kPhiloxM0, ctr[0], &hi0, &lo0);
    MulHiLo(kPhiloxM1, ctr[2], &hi1, &lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

RandomStream::RandomStream(const StreamKey& k)
    : key_(Mix64(k.master_seed)),
      stream_id_(Mix64(Mix64(Mix64(Mix64(static_cast<std::uint64_t>(k.policy) ^
                                         0x5CA1AB1Eull) ^
                                   k.replication) ^
                             k.firm) ^
                       (static_cast<std::uint64_t>(k.period) << 32 |
                        static_cast<std::uint32_t>(k.purpose)))) {}

RandomStream::RandomStream(std::uint64_t key, std::uint64_t stream_id)
    : key_(key), stream_id_(stream_id) {}

void RandomStream::Refill() {
  const Philox4x32::Counter ctr = {
      static_cast<std::uint32_t>(block_index_),
      static_cast<std::uint32_t>(block_index_ >> 32),
      static_cast<std::uint32_t>(stream_id_),
      static_cast<std::uint32_t>(stream_id_ >> 32)};
  const Philox4x32::Key key = {static_cast<std::uint32_t>(key_),
                               static_cast<std::uint32_t>(key_ >> 32)};
  buffer_ = Philox4x32::Block(ctr, key);
  ++block_index_;
  buffered_words_ = 4;
}

RandomStream::result_type RandomStream::operator()() {
  if (buffered_words_ < 2) Refill();
  const std::uint64_t lo = buffer_[4 - buffered_words_];
  const std::uint64_t hi = buffer_[5 - buffered_words_];
  buffered_words_ -= 2;
  return (hi << 32) | lo;
}

double RandomStream::Uniform() {
  // 53 random bits, shifted half an ulp off zero.
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::Normal() {
  if (has_spare_normal_) {
    has_spare_normal_ = false;
    return spare_normal_;
  }
  double u, v, s;
  do {
    u = 2.0 * Uniform() - 1.0;
    v = 2.0 * Uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = v * factor;
  has_spare_normal_ = true;
  return u * factor;
}

double RandomStream::Gamma(double shape) {
  if (shape < 1.0) {
    // Boost via Gamma(shape + 1) * U^(1/shape).
    const double g = Gamma(shape + 1.0);
    return g * std::pow(Uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = Normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = Uniform();
    if (u < 1.0 - 0.0331 * (x * x) * (x * x)) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

RandomStream RandomStream::Fork(std::uint64_t tag) const {
  return RandomStream(key_, Mix64(stream_id_ ^ Mix64(tag + 0xF0F0ull)));
}

}  // namespace crgame
