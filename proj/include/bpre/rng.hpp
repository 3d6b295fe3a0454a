// Copyright 2026 The bpre Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>

namespace bpre {

/*
 * Random streams.
 *
 * Every stochastic operation draws from an `Rng` that is owned by exactly one
 * worker. Streams are derived from 64-bit seeds without coordination:
 *
 *   finalize(z):  z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
 *                 z ^= z >> 27; z *= 0x94D049BB133111EB;
 *                 z ^= z >> 31;                      (SplitMix64 avalanche)
 *
 *   mix(seed, r) = finalize(finalize(seed) + (r + 1) * 0x9E3779B97F4A7C15)
 *
 * with all arithmetic modulo 2^64. Replicate r of a campaign seeded with s
 * uses the stream Rng(mix(s, r)).
 *
 * The generator is xoshiro256** whose four state words are the first four
 * outputs of SplitMix64 started at the seed. Doubles are built from the top
 * 53 bits, so the whole integer path is bit-reproducible on any platform.
 */

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t splitmix_finalize(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t mix(std::uint64_t seed, std::uint64_t r) noexcept {
  return splitmix_finalize(splitmix_finalize(seed) + (r + 1) * kGoldenGamma);
}

// Named sub-streams, so that e.g. the limit-law sample of a campaign never
// shares draws with its fluctuation sample.
enum class Stream : std::uint64_t {
  kTrajectory = 0x7472616aULL,
  kEnvironment = 0x656e7669ULL,
  kLimitLaw = 0x6c696d69ULL,
  kLimitEnvironment = 0x6c656e76ULL,
  kCampaign = 0x63616d70ULL,
};

constexpr std::uint64_t substream(std::uint64_t seed, Stream s) noexcept {
  return mix(seed, static_cast<std::uint64_t>(s));
}

class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) noexcept {
    std::uint64_t x = seed;
    for (auto& w : s_) {
      x += kGoldenGamma;
      w = splitmix_finalize(x);
    }
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on [0, 1).
  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1); safe to take the log of.
  double uniform_open() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  bool operator==(const Rng&) const = default;

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> s_{};
};

}  // namespace bpre
