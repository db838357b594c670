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
#include "dpvi/sampler.hpp"

#include <bit>
#include <numeric>
#include <stdexcept>

namespace dpvi {
namespace {

// splitmix64 finalizer; the round function needs full 64-bit avalanche so
// that truncation to narrow halves still looks random.
inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

inline std::uint64_t round_fn(std::uint64_t half, std::uint64_t round_key,
                              unsigned round) {
  return mix64((half + 0x9E3779B97F4A7C15ull * (round + 1)) ^ round_key);
}

// Smallest b with 2^b >= n; powers of two use the bijection directly (no
// walking), everything else satisfies 2^(b-1) < n < 2^b strictly.
unsigned bits_for(std::size_t n) {
  const unsigned w = unsigned(std::bit_width(n));
  return std::has_single_bit(n) ? w - 1 : w;
}

struct walk_result {
  std::uint64_t index;
  std::uint64_t steps;
};

walk_result cycle_walk(const feistel_key& key, unsigned bits, std::size_t n,
                       std::uint64_t lane) {
  // The geometric model puts the chance of a lane surviving 64*b steps below
  // 2^-64; hitting the guard indicates a broken bijection, not bad luck.
  const std::uint64_t guard = 64ull * bits;
  std::uint64_t x = lane;
  for (std::uint64_t step = 1; step <= guard; ++step) {
    x = feistel_permute(key, bits, x);
    if (x < n) return {x, step};
  }
  throw std::runtime_error("cycle walk exceeded its step guard");
}

}  // namespace

sampler_state make_sampler_state(std::size_t n, std::size_t batch_size,
                                 const rng_key& root_key) {
  if (n == 0) throw std::invalid_argument("empty dataset");
  if (batch_size == 0 || batch_size > n) {
    throw std::invalid_argument("batch size must be in [1, n]");
  }
  sampler_state s;
  s.n = n;
  s.bits = bits_for(n);
  s.residue = n - (std::size_t{1} << (s.bits - 1));
  s.batch_size = batch_size;
  s.root_key = root_key;
  return s;
}

feistel_key feistel_key_for(const rng_key& root_key, std::uint64_t iteration) {
  const rng_key child = split(root_key, iteration);
  feistel_key k;
  for (unsigned j = 0; j < kFeistelRounds; ++j) {
    k.round_keys[j] = random_bits(child, j);
  }
  return k;
}

std::uint64_t feistel_permute(const feistel_key& key, unsigned bits,
                              std::uint64_t x) {
  if (bits < 2 || bits > 62) throw std::out_of_range("bit width out of range");
  if (x >> bits) throw std::out_of_range("value outside the Feistel domain");
  const unsigned left_bits = (bits + 1) / 2;
  const unsigned right_bits = bits / 2;
  const std::uint64_t left_mask = (std::uint64_t{1} << left_bits) - 1;
  const std::uint64_t right_mask = (std::uint64_t{1} << right_bits) - 1;
  std::uint64_t left = x >> right_bits;
  std::uint64_t right = x & right_mask;
  for (unsigned round = 0; round < kFeistelRounds; ++round) {
    // Rounds alternately rewrite one half with a keyed mix of the other;
    // each rewrite is addition mod a power of two, hence bijective.
    if ((round & 1) == 0) {
      left = (left + round_fn(right, key.round_keys[round], round)) & left_mask;
    } else {
      right =
          (right + round_fn(left, key.round_keys[round], round)) & right_mask;
    }
  }
  return (left << right_bits) | right;
}

std::vector<std::uint32_t> sample_batch(const sampler_state& state,
                                        std::uint64_t iteration) {
  if (state.n <= 2) {
    // Too small for the Feistel domain constraint; the oracle is exact here.
    return oracle_sample_batch(state.n, state.batch_size,
                               split(state.root_key, iteration));
  }
  const feistel_key key = feistel_key_for(state.root_key, iteration);
  std::vector<std::uint32_t> batch(state.batch_size);
  for (std::size_t lane = 0; lane < state.batch_size; ++lane) {
    batch[lane] =
        std::uint32_t(cycle_walk(key, state.bits, state.n, lane).index);
  }
  return batch;
}

std::vector<std::uint32_t> oracle_sample_batch(std::size_t n,
                                               std::size_t batch_size,
                                               const rng_key& key) {
  if (batch_size > n) throw std::invalid_argument("batch size exceeds n");
  std::vector<std::uint32_t> pool(n);
  std::iota(pool.begin(), pool.end(), 0u);
  rng_stream stream(key);
  for (std::size_t i = 0; i < batch_size; ++i) {
    const std::size_t j = i + std::size_t(stream.next_below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(batch_size);
  return pool;
}

std::vector<std::uint64_t> iteration_stats(const sampler_state& state,
                                           std::size_t trials,
                                           std::uint64_t first_iteration) {
  if (state.n <= 2) {
    throw std::invalid_argument("no cycle-walk statistics for n <= 2");
  }
  std::vector<std::uint64_t> hist;
  for (std::size_t t = 0; t < trials; ++t) {
    const feistel_key key =
        feistel_key_for(state.root_key, first_iteration + t);
    for (std::size_t lane = 0; lane < state.batch_size; ++lane) {
      const walk_result w = cycle_walk(key, state.bits, state.n, lane);
      if (hist.size() <= w.steps) hist.resize(w.steps + 1, 0);
      ++hist[w.steps];
    }
  }
  return hist;
}

lane_summary summarize_lane_histogram(const std::vector<std::uint64_t>& hist) {
  lane_summary s;
  std::uint64_t total = 0, weighted = 0;
  for (std::size_t l = 0; l < hist.size(); ++l) {
    total += hist[l];
    weighted += hist[l] * l;
    if (hist[l] > 0) s.max = l;
  }
  if (total == 0) return s;
  s.mean = double(weighted) / double(total);
  std::uint64_t acc = 0;
  for (std::size_t l = 0; l < hist.size(); ++l) {
    acc += hist[l];
    if (100 * acc >= 99 * total) {
      s.p99 = l;
      break;
    }
  }
  return s;
}

}  // namespace dpvi
