// Copyright 2026 The ringsqz Authors
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

#pragma once

#include <cstdint>
#include <limits>

namespace ringsqz {

/// Stages that draw random numbers. Each stage of each pulse gets its own substream.
enum class RngStage : std::uint64_t {
  kPairNumber = 1,
  kSignalThinning = 2,
  kIdlerThinning = 3,
  kSignalBackground = 4,
  kIdlerBackground = 5,
  kTraceNoise = 6,
  kMeasurementNoise = 7,
};

inline constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based substream generator.
///
/// The state is a pure function of (seed, index, mode, stage), so draws for a given
/// pulse never depend on which thread produced the previous pulse. The stream itself
/// is SplitMix64, which satisfies UniformRandomBitGenerator and can feed the
/// standard <random> distributions.
class SubstreamRng {
 public:
  using result_type = std::uint64_t;

  SubstreamRng(std::uint64_t seed, std::uint64_t index, std::uint64_t mode, RngStage stage) noexcept {
    std::uint64_t key = splitmix64_mix(seed + 0x9e3779b97f4a7c15ULL);
    key = splitmix64_mix(key ^ (index + 0x632be59bd9b4e019ULL));
    key = splitmix64_mix(key ^ (mode + 0x8cb92ba72f3d8dd7ULL));
    state_ = splitmix64_mix(key ^ (static_cast<std::uint64_t>(stage) * 0xd1b54a32d192ed03ULL));
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    state_ += 0x9e3779b97f4a7c15ULL;
    return splitmix64_mix(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

}  // namespace ringsqz
