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
#include <unordered_set>

#include <doctest.h>

#include "support/oracles.hpp"

using namespace dpvi;

TEST_SUITE_BEGIN("rng");

TEST_CASE("split is deterministic and injective on small indices") {
  const rng_key k = seed_key(42);
  CHECK(split(k, 0) == split(k, 0));
  CHECK(split(k, 0) != split(k, 1));
  CHECK(split(k, 1) != split(k, 2));
  CHECK(seed_key(1) != seed_key(2));
}

TEST_CASE("a million children of one key never collide") {
  const rng_key k = seed_key(7);
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(2'000'000);
  std::size_t collisions = 0;
  for (std::uint64_t i = 0; i < 1'000'000; ++i) {
    const rng_key child = split(k, i);
    // The first two words are a bijection of the index; hashing all four
    // words keeps the scan honest about the whole state.
    const std::uint64_t fingerprint =
        child.state[0] ^ (child.state[1] * 0x9E3779B97F4A7C15ull) ^
        (child.state[2] * 0xC2B2AE3D27D4EB4Full) ^
        (child.state[3] * 0x165667B19E3779F9ull);
    if (!seen.insert(fingerprint).second) ++collisions;
  }
  CHECK(collisions == 0);
}

TEST_CASE("draws are pure functions of the key") {
  const rng_key k = split(seed_key(3), 5);
  CHECK(uniform(k, 100) == uniform(k, 100));
  CHECK(normal(k, 101) == normal(k, 101));
  // Streams with distinct keys differ.
  CHECK(uniform(k, 8) != uniform(split(k, 0), 8));
}

TEST_CASE("uniform moments and range") {
  const std::size_t n = 1'000'000;
  const std::vector<double> u = uniform(seed_key(11), n);
  double mean = 0.0;
  for (double x : u) {
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    mean += x;
  }
  mean /= double(n);
  // Three-sigma CLT band: 3 * sqrt(1/12) / sqrt(n) ~ 0.00087 < 0.002.
  CHECK(std::abs(mean - 0.5) < 0.002);
}

TEST_CASE("uniform passes a Kolmogorov-Smirnov test at 1%") {
  const std::size_t n = 100'000;
  const double d = oracles::ks_statistic(uniform(seed_key(13), n),
                                         [](double x) { return x; });
  CHECK(d < oracles::ks_critical_1pct(n));
}

TEST_CASE("normal moments") {
  const std::size_t n = 1'000'000;
  const std::vector<double> z = normal(seed_key(17), n);
  double mean = 0.0, var = 0.0;
  for (double x : z) mean += x;
  mean /= double(n);
  for (double x : z) var += (x - mean) * (x - mean);
  var /= double(n - 1);
  CHECK(std::abs(mean) < 0.004);       // 4-sigma CLT band is 0.004
  CHECK(std::abs(var - 1.0) < 0.01);   // chi-square CI at n = 1e6
}

TEST_CASE("normal distribution shape via KS") {
  const std::size_t n = 100'000;
  const double d =
      oracles::ks_statistic(normal(seed_key(19), n), [](double x) {
        return 0.5 * std::erfc(-x / std::sqrt(2.0));
      });
  CHECK(d < oracles::ks_critical_1pct(n));
}

TEST_CASE("stream draws match block draws and rejection sampling is uniform") {
  const rng_key k = seed_key(23);
  rng_stream s(k);
  CHECK(s.next_bits() == random_bits(k, 0));
  CHECK(s.next_bits() == random_bits(k, 1));

  rng_stream bounded(split(k, 1));
  std::vector<std::uint64_t> counts(5, 0);
  for (int i = 0; i < 50'000; ++i) ++counts[bounded.next_below(5)];
  for (std::uint64_t c : counts) {
    CHECK(double(c) > 10'000 * 0.97);
    CHECK(double(c) < 10'000 * 1.03);
  }
}

TEST_SUITE_END();
