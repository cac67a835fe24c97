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

#ifndef CRGAME_RNG_H_
#define CRGAME_RNG_H_

#include <array>
#include <cstdint>
#include <limits>

namespace crgame {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). A stream is
// identified by a 64-bit key and a 64-bit stream id; the remaining 64 bits of
// the 128-bit counter are consumed sequentially. Two streams with different
// (key, stream id) never share output blocks, so simulations that key their
// streams by logical coordinates reproduce regardless of scheduling.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter Block(Counter counter, Key key);
};

// Purposes a stream can be drawn for. Values are part of the stream identity
// and therefore part of the reproducibility contract: do not renumber.
enum class StreamPurpose : std::uint32_t {
  kGeneric = 0,
  kCostDraw = 1,
  kDemandNoise = 2,
  kActionSelection = 3,
  kTypeLikelihood = 4,
  kImputation = 5,
  kBootstrap = 6,
  kEquilibriumRefresh = 7,
  kContractionCheck = 8,
};

// Logical coordinates of a random stream.
struct StreamKey {
  std::uint64_t master_seed = 0;
  std::uint32_t policy = 0;
  std::uint32_t replication = 0;
  std::uint32_t firm = 0;
  std::uint32_t period = 0;
  StreamPurpose purpose = StreamPurpose::kGeneric;
};

// A UniformRandomBitGenerator producing 64-bit words from a Philox stream.
// Cheap to construct; copying forks an identical stream.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream() : RandomStream(StreamKey{}) {}
  explicit RandomStream(const StreamKey& key);
  RandomStream(std::uint64_t key, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  // Uniform on the open interval (0, 1).
  double Uniform();
  // Standard normal draw (inverse-CDF free polar method, no cached state
  // outside this object).
  double Normal();
  // Gamma(shape, scale = 1) draw, Marsaglia–Tsang.
  double Gamma(double shape);

  // Derives an independent child stream; used to split one logical stream
  // into sub-purposes without touching the parent's sequence.
  RandomStream Fork(std::uint64_t tag) const;

  std::uint64_t key() const { return key_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  void Refill();

  std::uint64_t key_;
  std::uint64_t stream_id_;
  std::uint64_t block_index_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_words_ = 0;  // 32-bit words remaining in buffer_
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

// SplitMix64 finalizer; used to fold stream coordinates into 64-bit words.
std::uint64_t Mix64(std::uint64_t x);

}  // namespace crgame

#endif  // CRGAME_RNG_H_
