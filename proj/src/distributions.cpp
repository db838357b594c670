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

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dpvi {
namespace {

constexpr double kLogTwoPi = 1.8378770664093454835606594728112;
constexpr double kSimplexTol = 1e-9;

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

void check_simplex(std::span<const double> p) {
  double total = 0.0;
  for (double v : p) {
    if (v < 0.0) throw std::invalid_argument("weights must be nonnegative");
    total += v;
  }
  if (std::abs(total - 1.0) > kSimplexTol) {
    throw std::invalid_argument("weights must sum to one");
  }
}

}  // namespace

double log_sum_exp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (std::isinf(m) && m < 0) return m;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - m);
  return m + std::log(acc);
}

normal_dist::normal_dist(double loc_in, double scale_in)
    : loc(loc_in), scale(scale_in) {
  require(scale > 0.0, "normal scale must be positive");
}

double normal_dist::log_prob(double x) const {
  const double z = (x - loc) / scale;
  return -0.5 * z * z - std::log(scale) - 0.5 * kLogTwoPi;
}

double normal_dist::sample(rng_stream& stream) const {
  return loc + scale * stream.next_normal();
}

double normal_dist::sample(const rng_key& key) const {
  rng_stream s(key);
  return sample(s);
}

bernoulli_dist::bernoulli_dist(double prob_in) : prob(prob_in) {
  require(prob >= 0.0 && prob <= 1.0, "bernoulli prob must be in [0, 1]");
}

double bernoulli_dist::log_prob(double value) const {
  if (value == 1.0) return std::log(prob);
  if (value == 0.0) return std::log1p(-prob);
  throw std::domain_error("bernoulli value must be 0 or 1");
}

double bernoulli_dist::sample(rng_stream& stream) const {
  return stream.next_uniform() < prob ? 1.0 : 0.0;
}

double bernoulli_dist::sample(const rng_key& key) const {
  rng_stream s(key);
  return sample(s);
}

categorical_dist::categorical_dist(std::vector<double> probs_in)
    : probs(std::move(probs_in)) {
  require(!probs.empty(), "categorical needs at least one category");
  check_simplex(probs);
}

double categorical_dist::log_prob(std::size_t category) const {
  if (category >= probs.size()) {
    throw std::domain_error("category out of range");
  }
  return std::log(probs[category]);
}

std::size_t categorical_dist::sample(rng_stream& stream) const {
  const double u = stream.next_uniform();
  double acc = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    acc += probs[k];
    if (u < acc) return k;
  }
  return probs.size() - 1;
}

std::size_t categorical_dist::sample(const rng_key& key) const {
  rng_stream s(key);
  return sample(s);
}

dirichlet_dist::dirichlet_dist(std::vector<double> concentration_in)
    : concentration(std::move(concentration_in)) {
  require(concentration.size() >= 2, "dirichlet needs K >= 2");
  for (double a : concentration) {
    require(a > 0.0, "dirichlet concentration must be positive");
  }
}

double dirichlet_dist::log_prob(std::span<const double> x) const {
  if (x.size() != concentration.size()) {
    throw std::domain_error("dirichlet value has wrong dimension");
  }
  check_simplex(x);
  double a0 = 0.0, lp = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    a0 += concentration[j];
    lp -= std::lgamma(concentration[j]);
    lp += (concentration[j] - 1.0) * std::log(x[j]);
  }
  return lp + std::lgamma(a0);
}

std::vector<double> dirichlet_dist::sample(rng_stream& stream) const {
  std::vector<double> g(concentration.size());
  double total = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    g[j] = gamma_sample(stream, concentration[j], 1.0);
    total += g[j];
  }
  for (double& v : g) v /= total;
  return g;
}

std::vector<double> dirichlet_dist::sample(const rng_key& key) const {
  rng_stream s(key);
  return sample(s);
}

inverse_gamma_dist::inverse_gamma_dist(double concentration_in, double rate_in)
    : concentration(concentration_in), rate(rate_in) {
  require(concentration > 0.0 && rate > 0.0,
          "inverse gamma parameters must be positive");
}

double inverse_gamma_dist::log_prob(double x) const {
  if (!(x > 0.0)) throw std::domain_error("inverse gamma support is x > 0");
  return concentration * std::log(rate) - std::lgamma(concentration) -
         (concentration + 1.0) * std::log(x) - rate / x;
}

double inverse_gamma_dist::sample(rng_stream& stream) const {
  // If Z ~ Gamma(shape, rate) then 1/Z ~ InverseGamma(shape, rate).
  return 1.0 / gamma_sample(stream, concentration, rate);
}

double inverse_gamma_dist::sample(const rng_key& key) const {
  rng_stream s(key);
  return sample(s);
}

diag_normal_dist::diag_normal_dist(std::vector<double> loc_in,
                                   std::vector<double> scale_in)
    : loc(std::move(loc_in)), scale(std::move(scale_in)) {
  require(loc.size() == scale.size(), "loc/scale size mismatch");
  for (double s : scale) require(s > 0.0, "normal scale must be positive");
}

double diag_normal_dist::log_prob(std::span<const double> x) const {
  if (x.size() != loc.size()) {
    throw std::domain_error("diag normal value has wrong dimension");
  }
  double lp = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double z = (x[j] - loc[j]) / scale[j];
    lp += -0.5 * z * z - std::log(scale[j]);
  }
  return lp - 0.5 * double(x.size()) * kLogTwoPi;
}

std::vector<double> diag_normal_dist::sample(rng_stream& stream) const {
  std::vector<double> out(loc.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = loc[j] + scale[j] * stream.next_normal();
  }
  return out;
}

std::vector<double> diag_normal_dist::sample(const rng_key& key) const {
  rng_stream s(key);
  return sample(s);
}

gaussian_mixture_dist::gaussian_mixture_dist(std::vector<double> weights_in,
                                             std::vector<double> locs_in,
                                             std::vector<double> scales_in,
                                             std::size_t dim_in)
    : weights(std::move(weights_in)),
      locs(std::move(locs_in)),
      scales(std::move(scales_in)),
      dim(dim_in) {
  require(!weights.empty(), "mixture needs K >= 1");
  require(locs.size() == weights.size() * dim, "locs must be K x dim");
  require(scales.size() == weights.size(), "one scale per component");
  check_simplex(weights);
  for (double s : scales) require(s > 0.0, "mixture scale must be positive");
}

double gaussian_mixture_dist::log_prob(std::span<const double> x) const {
  return gmm_log_prob(weights, locs, scales, x);
}

std::vector<double> gaussian_mixture_dist::sample(rng_stream& stream) const {
  categorical_dist z(weights);
  const std::size_t k = z.sample(stream);
  std::vector<double> out(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    out[d] = locs[k * dim + d] + scales[k] * stream.next_normal();
  }
  return out;
}

std::vector<double> gaussian_mixture_dist::sample(const rng_key& key) const {
  rng_stream s(key);
  return sample(s);
}

double gmm_log_prob(std::span<const double> weights,
                    std::span<const double> locs,
                    std::span<const double> scales,
                    std::span<const double> x) {
  const std::size_t k = weights.size();
  const std::size_t dim = x.size();
  if (locs.size() != k * dim || scales.size() != k) {
    throw std::domain_error("gmm parameter shapes do not match the point");
  }
  std::vector<double> terms(k);
  for (std::size_t j = 0; j < k; ++j) {
    double quad = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      const double z = (x[d] - locs[j * dim + d]) / scales[j];
      quad += z * z;
    }
    terms[j] = std::log(weights[j]) - 0.5 * quad -
               double(dim) * std::log(scales[j]) -
               0.5 * double(dim) * kLogTwoPi;
  }
  return log_sum_exp(terms);
}

double gamma_sample(rng_stream& stream, double shape, double rate) {
  require(shape > 0.0 && rate > 0.0, "gamma parameters must be positive");
  if (shape < 1.0) {
    // Boost to shape + 1 and correct with a uniform power.
    const double u = stream.next_uniform_positive();
    return gamma_sample(stream, shape + 1.0, rate) *
           std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = stream.next_normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = stream.next_uniform_positive();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) {
      return d * v / rate;
    }
  }
}

}  // namespace dpvi
