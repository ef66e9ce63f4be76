// Copyright 2026 The pathweaver Authors
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

#ifndef PATHWEAVER_RNG_HPP
#define PATHWEAVER_RNG_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace pathweaver {

/// Stream tag separating independent uses of the generator. Each (role,
/// coordinates) combination is its own stream; no draw is ever shared
/// between roles.
enum class RngRole : std::uint32_t {
  bridge_increment = 1,
  integrator_noise = 2,
  observation_noise = 3,
  parameter_init = 4,
  initial_state = 5,
  dataset = 6,
};

/// Address of a single random variate. The generator is a pure function of
/// this key: the same key yields the same variate on every worker, in every
/// evaluation order.
struct RngKey {
  std::uint64_t seed = 0;
  std::uint32_t sample = 0;  ///< trajectory index k
  std::uint32_t node = 0;    ///< grid node / flat element index j
  std::uint32_t lane = 0;    ///< state dimension
  RngRole role = RngRole::bridge_increment;
};

namespace detail {

// Philox 4x32-10 (Salmon et al., SC 2011). Counter-based: one block per key.
constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
           static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
           static_cast<std::uint32_t>(p0)};
  }
  return ctr;
}

inline std::array<std::uint32_t, 4> philox_block(const RngKey& key) {
  const std::array<std::uint32_t, 4> counter = {
      key.node, key.sample, key.lane, static_cast<std::uint32_t>(key.role)};
  const std::array<std::uint32_t, 2> philox_key = {
      static_cast<std::uint32_t>(key.seed),
      static_cast<std::uint32_t>(key.seed >> 32)};
  return philox4x32(counter, philox_key);
}

// 53-bit uniform in (0, 1]; never returns 0, safe under log().
inline double to_unit_open_closed(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t v = (static_cast<std::uint64_t>(hi) << 32) | lo;
  return (static_cast<double>(v >> 11) + 1.0) * 0x1.0p-53;
}

// 53-bit uniform in [0, 1).
inline double to_unit_closed_open(std::uint32_t hi, std::uint32_t lo) {
  const std::uint64_t v = (static_cast<std::uint64_t>(hi) << 32) | lo;
  return static_cast<double>(v >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Uniform variate in [0, 1), a pure function of the key.
inline double uniform_draw(const RngKey& key) {
  const auto block = detail::philox_block(key);
  return detail::to_unit_closed_open(block[0], block[1]);
}

/// Standard normal variate, a pure function of the key (Box-Muller on one
/// Philox block).
inline double normal_draw(const RngKey& key) {
  const auto block = detail::philox_block(key);
  const double u1 = detail::to_unit_open_closed(block[0], block[1]);
  const double u2 = detail::to_unit_closed_open(block[2], block[3]);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

/// SplitMix64 finalizer; used to derive independent sub-seeds (per repeat,
/// per experiment) from one master seed.
inline std::uint64_t split_mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  return split_mix64(seed ^ split_mix64(salt));
}

}  // namespace pathweaver

#endif  // PATHWEAVER_RNG_HPP
