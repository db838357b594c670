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
#ifndef DPVI_DISTRIBUTIONS_HPP
#define DPVI_DISTRIBUTIONS_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "dpvi/rng.hpp"

namespace dpvi {

// Natural-log densities / masses and deterministic per-key sampling for the
// distribution families the shipped models use. Parameters are validated at
// construction; log_prob throws std::domain_error on out-of-support values.

struct normal_dist {
  double loc = 0.0;
  double scale = 1.0;

  normal_dist(double loc, double scale);
  double log_prob(double x) const;
  // Reparameterized draw: loc + scale * eps with eps ~ N(0, 1).
  double sample(rng_stream& stream) const;
  double sample(const rng_key& key) const;
};

struct bernoulli_dist {
  double prob = 0.5;

  explicit bernoulli_dist(double prob);
  double log_prob(double value) const;  // value in {0, 1}; may return -inf
  double sample(rng_stream& stream) const;
  double sample(const rng_key& key) const;
};

struct categorical_dist {
  std::vector<double> probs;

  explicit categorical_dist(std::vector<double> probs);
  double log_prob(std::size_t category) const;
  std::size_t sample(rng_stream& stream) const;
  std::size_t sample(const rng_key& key) const;
};

struct dirichlet_dist {
  std::vector<double> concentration;

  explicit dirichlet_dist(std::vector<double> concentration);
  double log_prob(std::span<const double> x) const;
  std::vector<double> sample(rng_stream& stream) const;
  std::vector<double> sample(const rng_key& key) const;
};

struct inverse_gamma_dist {
  double concentration = 1.0;
  double rate = 1.0;

  inverse_gamma_dist(double concentration, double rate);
  double log_prob(double x) const;
  double sample(rng_stream& stream) const;
  double sample(const rng_key& key) const;
};

struct diag_normal_dist {
  std::vector<double> loc;
  std::vector<double> scale;

  diag_normal_dist(std::vector<double> loc, std::vector<double> scale);
  double log_prob(std::span<const double> x) const;
  std::vector<double> sample(rng_stream& stream) const;
  std::vector<double> sample(const rng_key& key) const;
};

// Spherical Gaussian mixture over R^dim with K components; locs is K x dim
// row-major and scales has one entry per component.
struct gaussian_mixture_dist {
  std::vector<double> weights;
  std::vector<double> locs;
  std::vector<double> scales;
  std::size_t dim = 0;

  gaussian_mixture_dist(std::vector<double> weights, std::vector<double> locs,
                        std::vector<double> scales, std::size_t dim);
  double log_prob(std::span<const double> x) const;
  std::vector<double> sample(rng_stream& stream) const;
  std::vector<double> sample(const rng_key& key) const;
};

// Marginalized mixture log-density log sum_j pi_j N(x; mu_j, s_j^2 I),
// evaluated through logsumexp so far-from-all-components points cannot
// underflow to log(0).
double gmm_log_prob(std::span<const double> weights,
                    std::span<const double> locs,
                    std::span<const double> scales, std::span<const double> x);

// Marsaglia-Tsang gamma draw (shape/rate parameterization).
double gamma_sample(rng_stream& stream, double shape, double rate);

double log_sum_exp(std::span<const double> v);

}  // namespace dpvi

#endif  // DPVI_DISTRIBUTIONS_HPP
