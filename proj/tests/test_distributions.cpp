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
#include "dpvi/distributions.hpp"

#include <cmath>
#include <stdexcept>

#include <doctest.h>

#include "dpvi/guide.hpp"
#include "dpvi/rng.hpp"

using namespace dpvi;

TEST_SUITE_BEGIN("distributions");

TEST_CASE("normal log density") {
  CHECK(normal_dist(0, 1).log_prob(0) ==
        doctest::Approx(-0.9189385332046727).epsilon(1e-12));
  // translation / scaling invariance
  CHECK(normal_dist(3, 2).log_prob(3) ==
        doctest::Approx(normal_dist(0, 1).log_prob(0) - std::log(2.0)));
  CHECK_THROWS_AS(normal_dist(0, 0), std::invalid_argument);
}

TEST_CASE("bernoulli log mass") {
  CHECK(bernoulli_dist(0.5).log_prob(1) ==
        doctest::Approx(std::log(0.5)).epsilon(1e-12));
  CHECK(bernoulli_dist(0.25).log_prob(0) ==
        doctest::Approx(std::log(0.75)).epsilon(1e-12));
  CHECK_THROWS_AS(bernoulli_dist(0.5).log_prob(0.5), std::domain_error);
  CHECK_THROWS_AS(bernoulli_dist(1.5), std::invalid_argument);
}

TEST_CASE("dirichlet log density") {
  // Flat Dirichlet on the 2-simplex has constant density Gamma(3) = 2.
  dirichlet_dist flat({1.0, 1.0, 1.0});
  const double third[] = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  CHECK(flat.log_prob(third) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  const double corner[] = {0.6, 0.3, 0.1};
  CHECK(flat.log_prob(corner) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  const double off[] = {0.5, 0.2, 0.2};
  CHECK_THROWS(flat.log_prob(off));
}

TEST_CASE("one-dimensional continuous densities integrate to one") {
  const auto integrate = [](auto&& logpdf, double lo, double hi, int n) {
    double acc = 0.0;
    const double h = (hi - lo) / n;
    for (int i = 0; i < n; ++i) {
      acc += std::exp(logpdf(lo + (i + 0.5) * h)) * h;
    }
    return acc;
  };
  const normal_dist n01(0.5, 1.5);
  CHECK(integrate([&](double x) { return n01.log_prob(x); }, -14.0, 15.0,
                  200000) == doctest::Approx(1.0).epsilon(1e-3));
  const inverse_gamma_dist ig(1.0, 1.0);
  CHECK(integrate([&](double x) { return ig.log_prob(x); }, 1e-6, 4000.0,
                  2000000) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("discrete masses sum to one exactly") {
  const bernoulli_dist b(0.37);
  CHECK(std::exp(b.log_prob(0)) + std::exp(b.log_prob(1)) ==
        doctest::Approx(1.0).epsilon(1e-12));
  const categorical_dist c({0.2, 0.3, 0.5});
  double total = 0.0;
  for (std::size_t k = 0; k < 3; ++k) total += std::exp(c.log_prob(k));
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("mixture log density reduces to its parts") {
  // K = 1 equals the plain normal.
  const double x1[] = {0.7};
  CHECK(gmm_log_prob(std::vector{1.0}, std::vector{0.2}, std::vector{1.3},
                     x1) ==
        doctest::Approx(normal_dist(0.2, 1.3).log_prob(0.7)).epsilon(1e-12));

  // Identical components collapse to one.
  const double x2[] = {0.3, -0.4};
  const std::vector<double> locs = {1.0, -2.0, 1.0, -2.0};
  CHECK(gmm_log_prob(std::vector{0.5, 0.5}, locs, std::vector{0.8, 0.8},
                     x2) ==
        doctest::Approx(diag_normal_dist({1.0, -2.0}, {0.8, 0.8}).log_prob(x2))
            .epsilon(1e-12));
}

TEST_CASE("mixture log density matches direct probability-domain summation") {
  const double x0[] = {0.0};
  const double direct =
      std::log(0.3 * std::exp(normal_dist(-1.0, 1.0).log_prob(0.0)) +
               0.7 * std::exp(normal_dist(1.0, 1.0).log_prob(0.0)));
  CHECK(gmm_log_prob(std::vector{0.3, 0.7}, std::vector{-1.0, 1.0},
                     std::vector{1.0, 1.0}, x0) ==
        doctest::Approx(direct).epsilon(1e-12));

  rng_stream stream(seed_key(41));
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 3, d = 2;
    std::vector<double> w = {0.2, 0.5, 0.3};
    std::vector<double> locs(k * d), scales(k), x(d);
    for (double& v : locs) v = stream.next_normal();
    for (double& v : scales) v = 0.5 + std::abs(stream.next_normal());
    for (double& v : x) v = stream.next_normal();
    double direct_sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      diag_normal_dist comp({locs[j * d], locs[j * d + 1]},
                            {scales[j], scales[j]});
      direct_sum += w[j] * std::exp(comp.log_prob(x));
    }
    CHECK(gmm_log_prob(w, locs, scales, x) ==
          doctest::Approx(std::log(direct_sum)).epsilon(1e-12));
  }
}

TEST_CASE("mixture log density survives far-away points") {
  const double far[] = {1e4};
  const double lp = gmm_log_prob(std::vector{0.5, 0.5}, std::vector{0.0, 1.0},
                                 std::vector{1.0, 1.0}, far);
  CHECK(std::isfinite(lp));
  CHECK(lp < -1e6);
}

TEST_CASE("sampling is deterministic per key and reparameterized") {
  const rng_key k = seed_key(5);
  const normal_dist n(3.0, 2.0);
  CHECK(n.sample(k) == n.sample(k));
  // loc + scale * eps exactly
  rng_stream probe(k);
  CHECK(n.sample(k) == 3.0 + 2.0 * probe.next_normal());

  // Degenerate scale pins the draw to loc.
  const normal_dist tight(7.0, 1e-12);
  CHECK(std::abs(tight.sample(k) - 7.0) < 6e-12);

  CHECK(bernoulli_dist(1.0).sample(k) == 1.0);
  CHECK(bernoulli_dist(0.0).sample(k) == 0.0);
}

TEST_CASE("sample moments") {
  rng_stream stream(seed_key(6));
  const normal_dist n(3.0, 2.0);
  const std::size_t trials = 100'000;
  double mean = 0.0;
  for (std::size_t i = 0; i < trials; ++i) mean += n.sample(stream);
  mean /= double(trials);
  CHECK(std::abs(mean - 3.0) < 0.02);  // 3-sigma CLT band is 0.019

  // Dirichlet samples live on the simplex; flat concentration has mean 1/K.
  dirichlet_dist dir({1.0, 1.0, 1.0});
  rng_stream ds(seed_key(7));
  double first_mean = 0.0;
  for (int i = 0; i < 20'000; ++i) {
    const auto p = dir.sample(ds);
    double total = 0.0;
    for (double v : p) {
      CHECK(v >= 0.0);
      total += v;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    first_mean += p[0];
  }
  CHECK(first_mean / 20'000 == doctest::Approx(1.0 / 3).epsilon(0.02));

  // Inverse gamma(3, 2) has mean rate / (conc - 1) = 1.
  inverse_gamma_dist ig(3.0, 2.0);
  rng_stream igs(seed_key(8));
  double ig_mean = 0.0;
  for (int i = 0; i < 200'000; ++i) ig_mean += ig.sample(igs);
  CHECK(ig_mean / 200'000 == doctest::Approx(1.0).epsilon(0.02));

  categorical_dist c({0.2, 0.3, 0.5});
  rng_stream cs(seed_key(9));
  std::vector<int> counts(3, 0);
  for (int i = 0; i < 100'000; ++i) ++counts[c.sample(cs)];
  CHECK(double(counts[0]) / 1e5 == doctest::Approx(0.2).epsilon(0.03));
  CHECK(double(counts[2]) / 1e5 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("softmax transform lands on the simplex and inverts the pin") {
  const std::vector<double> u = {0.5, -1.0, 2.0, 0.0};
  const std::vector<double> pi = softmax_pinned(u);
  REQUIRE(pi.size() == 5);
  double total = 0.0;
  for (double v : pi) {
    CHECK(v > 0.0);
    total += v;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  // log pi_j - log pi_K recovers u_j
  for (std::size_t j = 0; j < u.size(); ++j) {
    CHECK(std::log(pi[j]) - std::log(pi[4]) ==
          doctest::Approx(u[j]).epsilon(1e-9));
  }
}

TEST_SUITE_END();
