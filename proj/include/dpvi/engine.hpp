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
#ifndef DPVI_ENGINE_HPP
#define DPVI_ENGINE_HPP

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpvi/guide.hpp"
#include "dpvi/models.hpp"
#include "dpvi/rng.hpp"

namespace dpvi {

// Differentially private variational inference: per-example gradients of the
// reparameterized objective are clipped to an L2 bound, summed in index
// order, perturbed with Gaussian noise of standard deviation
// clip_bound * noise_multiplier, scaled by N/B to estimate the full-data
// gradient, and fed to the optimizer. With noise_multiplier = 0 and an
// infinite clip bound the update reduces exactly to non-private DSVI.
struct dpvi_config {
  double clip_bound = 1.0;        // > 0; +infinity disables clipping
  double noise_multiplier = 1.0;  // >= 0; 0 only in non-private mode
  std::size_t batch_size = 0;
  std::size_t data_size = 0;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  enum class optimizer_kind { adam, sgd };
  optimizer_kind optimizer = optimizer_kind::adam;

  void validate() const;
};

struct dpvi_state {
  std::size_t iteration = 0;
  guide_params psi;  // unconstrained
  std::vector<double> adam_m;
  std::vector<double> adam_v;
  rng_key rng;  // fixed root; per-iteration keys derive from (rng, iteration)
};

class divergence_error : public std::runtime_error {
 public:
  explicit divergence_error(std::size_t iteration)
      : std::runtime_error("non-finite loss at iteration " +
                           std::to_string(iteration)),
        iteration_(iteration) {}
  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t iteration_;
};

// g * min(1, bound / ||g||); the zero vector passes through.
std::vector<double> clip_to_norm(std::span<const double> g, double bound);

// Adds clip_bound * sigma * z with z standard normal per coordinate. A zero
// sigma leaves the input untouched bit for bit.
void perturb(std::span<double> gradient_sum, double clip_bound, double sigma,
             const rng_key& key);

// One descent step on gradient g: updates the moment vectors in place and
// writes the parameter delta (to be added to the parameters). `t` is the
// 1-based step count used for bias correction.
void adam_step(std::span<double> m, std::span<double> v,
               std::span<const double> g, std::size_t t,
               const dpvi_config& cfg, std::span<double> delta_out);

dpvi_state dpvi_init(const rng_key& key, const model_spec& model,
                     const dpvi_config& cfg);

// Optional instrumentation of one update's privacy-relevant dataflow.
struct update_trace {
  std::vector<std::vector<double>> clipped_per_example;
  std::vector<double> prenoise_sum;
  std::vector<double> noise;            // what perturb added
  std::vector<double> scaled_gradient;  // (sum + noise) * N / B
};

// One DP-VI iteration over `batch` (must have exactly batch_size records).
// Returns the negated N/B-scaled batch objective as the loss. Throws
// divergence_error if the objective or a gradient turns non-finite.
double dpvi_update(dpvi_state& state, const model_spec& model,
                   model_tape& tape, std::span<const record* const> batch,
                   const dpvi_config& cfg, update_trace* trace = nullptr);

// Convenience overload building a transient tape.
double dpvi_update(dpvi_state& state, const model_spec& model,
                   std::span<const record* const> batch,
                   const dpvi_config& cfg, update_trace* trace = nullptr);

// Constrained view of the current variational parameters.
std::vector<named_values> get_params(const dpvi_state& state);

// Privacy cost of the updates made so far, at the given delta.
double spent_privacy(const dpvi_state& state, const dpvi_config& cfg,
                     double delta);

// The key material an update derives for a given state; exposed so
// reference implementations can reproduce draws exactly.
rng_key update_iteration_key(const dpvi_state& state);
rng_key update_theta_key(const rng_key& iteration_key);
rng_key update_noise_key(const rng_key& iteration_key);

// Versioned JSON checkpoints that resume bit-exactly.
void save_checkpoint(const std::string& path, const dpvi_state& state,
                     const std::string& model_name);
dpvi_state load_checkpoint(const std::string& path,
                           const std::string& expected_model_name);

}  // namespace dpvi

#endif  // DPVI_ENGINE_HPP
