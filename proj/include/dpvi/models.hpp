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
#ifndef DPVI_MODELS_HPP
#define DPVI_MODELS_HPP

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dpvi/autodiff.hpp"
#include "dpvi/data.hpp"
#include "dpvi/guide.hpp"
#include "dpvi/rng.hpp"

namespace dpvi {

// A model's differentiable per-example objective, bound to a reusable graph.
//
// The latent draw is reparameterized: theta = loc + exp(scale_log) * eps,
// with one eps shared by every record of a batch. The per-example objective
// is
//     l_i = log p(record_i | theta)
//           + (1/N) * (log p(theta) - log q(theta | psi)),
// so the prior and entropy terms are carried at weight 1/N inside each
// record's contribution and a batch sum scaled by N/B estimates the
// full-data objective. Priors over constrained latents are expressed in
// unconstrained coordinates, with the transform's log-Jacobian folded in.
class model_tape {
 public:
  model_tape() = default;
  // Bound graph handles point into `graph`; the object must not relocate.
  model_tape(const model_tape&) = delete;
  model_tape& operator=(const model_tape&) = delete;

  void set_psi(std::span<const double> psi_flat);
  // eps: shared reparameterization noise (latent_dim values);
  // aux: extra per-iteration noise for latents sampled from their own
  // conditional prior inside the model (may be empty).
  void set_noise(std::span<const double> eps, std::span<const double> aux);
  void set_data_size(std::size_t n);
  void bind_record(const record& r);

  double value_and_gradient(std::span<double> grad_psi);
  double value();
  std::size_t psi_dim() const { return graph.input_dim(); }

  // Wiring, filled in by the model factories.
  ad::tape graph;
  std::vector<ad::var> psi_vars;           // one per guide entry, entry order
  std::vector<std::size_t> psi_sizes;
  ad::var eps_var{};                       // slot of length latent_dim
  ad::var aux_var{};                       // slot of length aux_dim, if any
  std::size_t aux_dim = 0;
  ad::var inv_n_var{};                     // scalar slot holding 1/N
  ad::var root{};
  std::vector<double> aux_cache;           // latest aux noise, for binders
  std::function<void(model_tape&, const record&)> binder;
};

// Declarative description of a probabilistic model for the inference engine.
// Plain-evaluation closures mirror the taped objective so tests can check
// one against the other.
struct model_spec {
  std::string name;
  guide_params guide_prototype;  // entries carry initial values + transforms
  std::size_t latent_dim = 0;
  std::size_t aux_dim = 0;

  std::function<std::unique_ptr<model_tape>()> make_tape;

  // log p(record | theta) with theta/aux in unconstrained coordinates.
  std::function<double(std::span<const double> theta,
                       std::span<const double> aux, const record&)>
      per_example_log_lik;
  // log p(theta) in unconstrained coordinates (transform Jacobians folded
  // in).
  std::function<double(std::span<const double> theta)> log_prior;
  // Classifier score at the variational mean, where it makes sense.
  std::function<double(const guide_params&, const record&)> predict_score;
};

struct elbo_result {
  double value = 0.0;
  std::vector<double> grad;
};

// Per-example reparameterized objective and its gradient wrt unconstrained
// psi. The shared draw is a pure function of `key`, so calling this for every
// record of a batch with one key realizes the one-sample-per-iteration
// estimator.
elbo_result per_example_elbo(const model_spec& model, const guide_params& psi,
                             const record& r, std::size_t data_size,
                             const rng_key& key);

// The noise the engine would use for a given key; exposed so alternative
// evaluation paths agree draw-for-draw.
std::vector<double> latent_noise(const model_spec& model, const rng_key& key);
std::vector<double> aux_noise(const model_spec& model, const rng_key& key);

// --- Shipped models ------------------------------------------------------

// Bayesian logistic regression: w ~ N(0, 4) per coordinate, mean-field
// Gaussian guide (w_loc, exp(w_scale_log)).
model_spec make_logreg_model(std::size_t feature_dim);

// Grouped (hierarchical) logistic regression: mixing matrix M ~ N(0, 4)
// elementwise, per-group weights w_l ~ N(M g_l, I) drawn ancestrally, and a
// mean-field Gaussian guide over M. The group matrix is baked in at
// construction.
model_spec make_hlr_model(std::size_t feature_dim, std::size_t n_groups,
                          std::size_t group_dim,
                          std::vector<double> group_matrix);

// Spherical Gaussian mixture: weights ~ Dirichlet(1), component means
// standard normal, component scales InverseGamma(1, 1); mean-field Gaussian
// guide over the unconstrained (softmax / log) coordinates, with the latent
// cluster assignments marginalized out of the likelihood.
model_spec make_gmm_model(std::size_t components, std::size_t dim);

struct model_bundle {
  model_spec logreg;
  model_spec hlr;
  model_spec gmm;
};

// Canonical instances: 1-d logistic regression, the 5/3/3 grouped model, and
// the 5-component 2-d mixture.
model_bundle build_models(std::vector<double> hlr_group_matrix = {});

// Draws from the posterior predictive of one group's weight vector,
// integrating the mixing matrix over its variational posterior:
// M ~ q(M | psi), then w ~ N(M g, I). Returns `draws` rows of length D.
std::vector<std::vector<double>> posterior_predictive_w(
    const guide_params& psi, std::span<const double> g_row, const rng_key& key,
    std::size_t draws);

}  // namespace dpvi

#endif  // DPVI_MODELS_HPP
