// Copyright (c) 2026 the evimae authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace evimae {

// Deterministic xoshiro256** generator seeded through splitmix64.
// The standard library distributions are implementation-defined, so every
// random draw in the project goes through this class; results are identical
// across platforms and serializable into checkpoints.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform double in [0, 1).
  double uniform();

  // Uniform integer in [0, n). Requires n > 0.
  std::int64_t uniform_int(std::int64_t n);

  // Standard normal via Box-Muller (two uniforms per call, no cached spare).
  double normal();

  // In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::int64_t i = static_cast<std::int64_t>(items.size()) - 1; i > 0; --i) {
      std::swap(items[static_cast<std::size_t>(i)],
                items[static_cast<std::size_t>(uniform_int(i + 1))]);
    }
  }

  // k distinct indices drawn uniformly from [0, n), returned sorted.
  std::vector<int> sample_without_replacement(int n, int k);

  std::array<std::uint64_t, 4> state() const { return s_; }
  void set_state(const std::array<std::uint64_t, 4>& s) { s_ = s; }
  std::string state_hex() const;
  static Rng from_state_hex(const std::string& hex);

 private:
  Rng() = default;
  std::array<std::uint64_t, 4> s_{};
};

// Derives an independent stream seed from a base seed; used to give each
// clip / step / mask draw its own generator so results do not depend on
// evaluation order.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);
std::uint64_t derive_seed(std::uint64_t base, const std::string& tag);

}  // namespace evimae
