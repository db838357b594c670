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
#ifndef DPVI_RNG_HPP
#define DPVI_RNG_HPP

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace dpvi {

// Splittable counter-based pseudo-random source. Keys are immutable values;
// every draw is a pure function of a key, so runs are bit-reproducible from a
// single seed and keys can be copied freely across threads.
//
// The core block function is Philox-4x32-10 (Salmon et al., SC 2011), a keyed
// bijection on 128-bit counters built from integer multiplies and xors only.
// It is a statistical generator, not a cryptographic one.
struct rng_key {
  // 256 bits: two 32-bit Philox key words, a 128-bit counter base and a
  // 64-bit lane/depth tag mixed into derived streams.
  std::array<std::uint64_t, 4> state{};

  friend bool operator==(const rng_key&, const rng_key&) = default;
};

// Deterministically derives a key from a user-facing 64-bit seed.
rng_key seed_key(std::uint64_t seed);

// Derives the index-th child key. Children of one parent are pairwise
// distinct for distinct indices (the counter words of the child are a Philox
// bijection of the index), and child streams look independent.
rng_key split(const rng_key& key, std::uint64_t index);

// Raw 64-bit draws; draw i is the i-th block of the key's counter stream.
std::uint64_t random_bits(const rng_key& key, std::uint64_t index);

// Fills `out` with i.i.d.-looking draws, deterministic per key.
void uniform_fill(const rng_key& key, std::span<double> out);   // [0, 1)
void normal_fill(const rng_key& key, std::span<double> out);    // N(0, 1)

std::vector<double> uniform(const rng_key& key, std::size_t n);
std::vector<double> normal(const rng_key& key, std::size_t n);

// Sequential view over a key's stream, for consumers that need a data-
// dependent number of draws (rejection samplers). Purely a cursor; the
// underlying generator stays counter-based.
class rng_stream {
 public:
  explicit rng_stream(const rng_key& key) : key_(key) {}

  std::uint64_t next_bits() { return random_bits(key_, cursor_++); }
  double next_uniform();             // [0, 1)
  double next_uniform_positive();    // (0, 1]
  double next_normal();
  // Uniform integer in [0, bound), rejection-sampled so all values are
  // exactly equally likely.
  std::uint64_t next_below(std::uint64_t bound);

 private:
  rng_key key_;
  std::uint64_t cursor_ = 0;
  bool have_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace dpvi

#endif  // DPVI_RNG_HPP
