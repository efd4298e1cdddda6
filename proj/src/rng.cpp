// Copyright (c) 2026 the evimae authors
// SPDX-License-Identifier: Apache-2.0
#include "evimae/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "evimae/errors.hpp"

namespace evimae {
namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t x = seed;
  for (auto& lane : s_) lane = splitmix64(x);
}

std::uint64_t Rng::next_u64() {
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

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::int64_t Rng::uniform_int(std::int64_t n) {
  if (n <= 0) throw InvalidParam("uniform_int: n must be positive");
  const std::uint64_t un = static_cast<std::uint64_t>(n);
  // Rejection sampling on the top bits keeps the draw unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
  std::uint64_t r = next_u64();
  while (r >= limit) r = next_u64();
  return static_cast<std::int64_t>(r % un);
}

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::vector<int> Rng::sample_without_replacement(int n, int k) {
  if (k < 0 || k > n) throw InvalidParam("sample_without_replacement: k out of range");
  std::vector<int> pool(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
  for (int i = 0; i < k; ++i) {
    const auto j = i + uniform_int(n - i);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  std::vector<int> out(pool.begin(), pool.begin() + k);
  std::sort(out.begin(), out.end());
  return out;
}

std::string Rng::state_hex() const {
  char buf[4 * 16 + 1];
  std::snprintf(buf, sizeof(buf), "%016llx%016llx%016llx%016llx",
                static_cast<unsigned long long>(s_[0]), static_cast<unsigned long long>(s_[1]),
                static_cast<unsigned long long>(s_[2]), static_cast<unsigned long long>(s_[3]));
  return std::string(buf);
}

Rng Rng::from_state_hex(const std::string& hex) {
  if (hex.size() != 64) throw ParseError("rng state must be 64 hex chars");
  Rng rng;
  for (int i = 0; i < 4; ++i) {
    rng.s_[static_cast<std::size_t>(i)] =
        std::stoull(hex.substr(static_cast<std::size_t>(i) * 16, 16), nullptr, 16);
  }
  return rng;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t x = base ^ (0x9E3779B97F4A7C15ULL * (stream + 1));
  std::uint64_t out = splitmix64(x);
  return out ? out : 1;  // zero seeds map every lane through splitmix anyway; keep nonzero for clarity
}

std::uint64_t derive_seed(std::uint64_t base, const std::string& tag) {
  // FNV-1a over the tag, then mixed with the base seed.
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return derive_seed(base, h);
}

}  // namespace evimae
