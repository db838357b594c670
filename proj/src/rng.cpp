// Copyright 2026 The dpvi Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "dpvi/rng.hpp"

#include <cmath>

namespace dpvi {
namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;  // golden ratio
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;  // sqrt(3) - 1

struct block {
  std::uint32_t v[4];
};

inline void philox_round(block& b, std::uint32_t k0, std::uint32_t k1) {
  const std::uint64_t p0 = std::uint64_t(kPhiloxM0) * b.v[0];
  const std::uint64_t p1 = std::uint64_t(kPhiloxM1) * b.v[2];
  block out;
  out.v[0] = std::uint32_t(p1 >> 32) ^ b.v[1] ^ k0;
  out.v[1] = std::uint32_t(p1);
  out.v[2] = std::uint32_t(p0 >> 32) ^ b.v[3] ^ k1;
  out.v[3] = std::uint32_t(p0);
  b = out;
}

inline block philox(std::uint32_t k0, std::uint32_t k1, block ctr) {
  for (int round = 0; round < 10; ++round) {
    philox_round(ctr, k0, k1);
    k0 += kPhiloxW0;
    k1 += kPhiloxW1;
  }
  return ctr;
}

inline std::uint64_t join64(std::uint32_t lo, std::uint32_t hi) {
  return std::uint64_t(lo) | (std::uint64_t(hi) << 32);
}

// Key layout: state[0] holds the two Philox key words, state[1..2] the
// 128-bit counter base, state[3] a depth/stream tag.
inline block counter_of(const rng_key& k, std::uint64_t offset_lo,
                        std::uint64_t offset_hi) {
  const std::uint64_t lo = k.state[1] + offset_lo;
  std::uint64_t hi = k.state[2] + offset_hi;
  if (lo < k.state[1]) ++hi;  // carry
  return block{{std::uint32_t(lo), std::uint32_t(lo >> 32), std::uint32_t(hi),
                std::uint32_t(hi >> 32)}};
}

inline block run_block(const rng_key& k, std::uint64_t index) {
  return philox(std::uint32_t(k.state[0]), std::uint32_t(k.state[0] >> 32),
                counter_of(k, index, 0));
}

// splitmix64 finalizer; full-avalanche 64-bit mix.
inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

constexpr double kInv2p53 = 1.0 / 9007199254740992.0;  // 2^-53
constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

rng_key seed_key(std::uint64_t seed) {
  rng_key k;
  k.state[0] = mix64(seed ^ 0x243F6A8885A308D3ull);  // pi digits
  k.state[1] = mix64(seed + 0x13198A2E03707344ull);
  k.state[2] = mix64(seed + 0xA4093822299F31D0ull);
  k.state[3] = 0;
  return k;
}

rng_key split(const rng_key& key, std::uint64_t index) {
  // The child's key word and counter base come from one Philox block whose
  // counter is (index, depth-tag): a bijection of `index` for fixed parent,
  // so distinct indices can never produce colliding children.
  const block b =
      philox(std::uint32_t(key.state[0]), std::uint32_t(key.state[0] >> 32),
             block{{std::uint32_t(index), std::uint32_t(index >> 32),
                    std::uint32_t(key.state[3]),
                    std::uint32_t(key.state[3] >> 32) ^ 0x5851F42Du}});
  rng_key child;
  child.state[0] = key.state[1] ^ join64(b.v[0], b.v[1]);
  child.state[1] = join64(b.v[2], b.v[3]);
  child.state[2] = mix64(key.state[2] ^ index);
  child.state[3] = mix64(key.state[3]) + 0x9E3779B97F4A7C15ull;
  return child;
}

std::uint64_t random_bits(const rng_key& key, std::uint64_t index) {
  // Two 64-bit outputs per Philox block; pick the requested half.
  const block b = run_block(key, index >> 1);
  return (index & 1) ? join64(b.v[2], b.v[3]) : join64(b.v[0], b.v[1]);
}

void uniform_fill(const rng_key& key, std::span<double> out) {
  // 53-bit mantissas from the high bits of each 64-bit word; values in [0,1).
  std::size_t i = 0;
  std::uint64_t blk = 0;
  while (i < out.size()) {
    const block b = run_block(key, blk++);
    out[i++] = double(join64(b.v[0], b.v[1]) >> 11) * kInv2p53;
    if (i < out.size()) {
      out[i++] = double(join64(b.v[2], b.v[3]) >> 11) * kInv2p53;
    }
  }
}

void normal_fill(const rng_key& key, std::span<double> out) {
  // Box-Muller on consecutive uniform pairs. u1 is mapped into (0,1] so the
  // logarithm is always finite.
  std::size_t i = 0;
  std::uint64_t blk = 0;
  double u[2];
  while (i < out.size()) {
    const block b = run_block(key, blk++);
    u[0] = double((join64(b.v[0], b.v[1]) >> 11) + 1) * kInv2p53;  // (0,1]
    u[1] = double(join64(b.v[2], b.v[3]) >> 11) * kInv2p53;        // [0,1)
    const double radius = std::sqrt(-2.0 * std::log(u[0]));
    const double angle = kTwoPi * u[1];
    out[i++] = radius * std::cos(angle);
    if (i < out.size()) out[i++] = radius * std::sin(angle);
  }
}

std::vector<double> uniform(const rng_key& key, std::size_t n) {
  std::vector<double> v(n);
  uniform_fill(key, v);
  return v;
}

std::vector<double> normal(const rng_key& key, std::size_t n) {
  std::vector<double> v(n);
  normal_fill(key, v);
  return v;
}

double rng_stream::next_uniform() {
  return double(next_bits() >> 11) * kInv2p53;
}

double rng_stream::next_uniform_positive() {
  return double((next_bits() >> 11) + 1) * kInv2p53;
}

double rng_stream::next_normal() {
  if (have_spare_normal_) {
    have_spare_normal_ = false;
    return spare_normal_;
  }
  const double u1 = next_uniform_positive();
  const double u2 = next_uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = kTwoPi * u2;
  spare_normal_ = radius * std::sin(angle);
  have_spare_normal_ = true;
  return radius * std::cos(angle);
}

std::uint64_t rng_stream::next_below(std::uint64_t bound) {
  // Reject the final partial range so the modulo is exactly uniform.
  const std::uint64_t limit = bound * ((~std::uint64_t{0}) / bound);
  std::uint64_t draw;
  do {
    draw = next_bits();
  } while (draw >= limit);
  return draw % bound;
}

}  // namespace dpvi
