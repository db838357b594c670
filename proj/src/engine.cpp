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
#include "dpvi/engine.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "dpvi/accountant.hpp"

namespace dpvi {
namespace {

double l2_norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

bool all_finite(std::span<const double> v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

std::string u64_hex(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx", (unsigned long long)v);
  return buf;
}

std::uint64_t parse_u64_hex(const std::string& s) {
  return std::stoull(s, nullptr, 16);
}

int transform_tag(transform_kind k) { return int(k); }

transform_kind transform_from_tag(int tag) {
  switch (tag) {
    case 0: return transform_kind::identity;
    case 1: return transform_kind::exp_positive;
    case 2: return transform_kind::simplex_softmax;
  }
  throw std::runtime_error("unknown transform tag in checkpoint");
}

}  // namespace

void dpvi_config::validate() const {
  if (!(clip_bound > 0.0)) {
    throw std::invalid_argument("clip bound must be positive");
  }
  if (!(noise_multiplier >= 0.0)) {
    throw std::invalid_argument("noise multiplier must be nonnegative");
  }
  if (std::isinf(clip_bound) && noise_multiplier > 0.0) {
    throw std::invalid_argument(
        "noise scale is undefined without a finite clip bound");
  }
  if (batch_size == 0 || data_size == 0 || batch_size > data_size) {
    throw std::invalid_argument("need 0 < batch_size <= data_size");
  }
  if (!(learning_rate > 0.0)) {
    throw std::invalid_argument("learning rate must be positive");
  }
}

std::vector<double> clip_to_norm(std::span<const double> g, double bound) {
  if (!(bound > 0.0)) throw std::invalid_argument("clip bound must be positive");
  std::vector<double> out(g.begin(), g.end());
  const double norm = l2_norm(g);
  if (norm > bound) {
    const double scale = bound / norm;
    for (double& x : out) x *= scale;
  }
  return out;
}

void perturb(std::span<double> gradient_sum, double clip_bound, double sigma,
             const rng_key& key) {
  if (sigma == 0.0) return;
  const double std_dev = clip_bound * sigma;
  std::vector<double> z = normal(key, gradient_sum.size());
  for (std::size_t i = 0; i < gradient_sum.size(); ++i) {
    gradient_sum[i] += std_dev * z[i];
  }
}

void adam_step(std::span<double> m, std::span<double> v,
               std::span<const double> g, std::size_t t,
               const dpvi_config& cfg, std::span<double> delta_out) {
  if (cfg.optimizer == dpvi_config::optimizer_kind::sgd) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      delta_out[i] = -cfg.learning_rate * g[i];
    }
    return;
  }
  const double b1 = cfg.adam_beta1, b2 = cfg.adam_beta2;
  const double bias1 = 1.0 - std::pow(b1, double(t));
  const double bias2 = 1.0 - std::pow(b2, double(t));
  for (std::size_t i = 0; i < g.size(); ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
    const double m_hat = m[i] / bias1;
    const double v_hat = v[i] / bias2;
    delta_out[i] = -cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
  }
}

dpvi_state dpvi_init(const rng_key& key, const model_spec& model,
                     const dpvi_config& cfg) {
  cfg.validate();
  dpvi_state state;
  state.iteration = 0;
  state.psi = model.guide_prototype;  // model-declared initial values
  state.adam_m.assign(state.psi.dim(), 0.0);
  state.adam_v.assign(state.psi.dim(), 0.0);
  state.rng = key;
  return state;
}

rng_key update_iteration_key(const dpvi_state& state) {
  return split(state.rng, state.iteration);
}

rng_key update_theta_key(const rng_key& iteration_key) {
  return split(iteration_key, 0);
}

rng_key update_noise_key(const rng_key& iteration_key) {
  return split(iteration_key, 1);
}

double dpvi_update(dpvi_state& state, const model_spec& model,
                   model_tape& tape, std::span<const record* const> batch,
                   const dpvi_config& cfg, update_trace* trace) {
  cfg.validate();
  if (batch.size() != cfg.batch_size) {
    throw std::invalid_argument("batch has the wrong number of records");
  }

  const rng_key iter_key = update_iteration_key(state);
  const rng_key theta = update_theta_key(iter_key);

  // One shared parameter draw for the whole batch.
  const std::vector<double> eps = latent_noise(model, theta);
  const std::vector<double> aux = aux_noise(model, theta);
  const std::vector<double> psi_flat = state.psi.flatten();
  const std::size_t dim = psi_flat.size();

  tape.set_psi(psi_flat);
  tape.set_noise(eps, aux);
  tape.set_data_size(cfg.data_size);

  std::vector<double> grad(dim);
  std::vector<double> grad_sum(dim, 0.0);
  double value_sum = 0.0;
  for (const record* r : batch) {  // index order: deterministic reduction
    tape.bind_record(*r);
    double value;
    try {
      value = tape.value_and_gradient(grad);
    } catch (const std::domain_error&) {
      // Overflow or invalid math inside the objective is divergence.
      throw divergence_error(state.iteration);
    }
    if (!std::isfinite(value) || !all_finite(grad)) {
      throw divergence_error(state.iteration);
    }
    value_sum += value;
    std::vector<double> clipped = clip_to_norm(grad, cfg.clip_bound);
    for (std::size_t i = 0; i < dim; ++i) grad_sum[i] += clipped[i];
    if (trace) trace->clipped_per_example.push_back(std::move(clipped));
  }
  if (trace) trace->prenoise_sum = grad_sum;

  perturb(grad_sum, cfg.clip_bound, cfg.noise_multiplier,
          update_noise_key(iter_key));
  if (trace) {
    trace->noise.assign(dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
      trace->noise[i] = grad_sum[i] - trace->prenoise_sum[i];
    }
  }

  // Scale the batch sum up to the full-data objective; the noise picks up
  // the same factor, realizing an effective std of C * sigma * N / B.
  const double scale = double(cfg.data_size) / double(cfg.batch_size);
  for (double& x : grad_sum) x *= scale;
  if (trace) trace->scaled_gradient = grad_sum;

  // The optimizer descends on the negated objective gradient.
  std::vector<double> loss_grad(dim);
  for (std::size_t i = 0; i < dim; ++i) loss_grad[i] = -grad_sum[i];
  std::vector<double> delta(dim);
  adam_step(state.adam_m, state.adam_v, loss_grad, state.iteration + 1, cfg,
            delta);

  std::vector<double> psi_next(dim);
  for (std::size_t i = 0; i < dim; ++i) psi_next[i] = psi_flat[i] + delta[i];
  state.psi.unflatten(psi_next);
  state.iteration += 1;

  const double loss = -scale * value_sum;
  if (!std::isfinite(loss)) throw divergence_error(state.iteration - 1);
  return loss;
}

double dpvi_update(dpvi_state& state, const model_spec& model,
                   std::span<const record* const> batch,
                   const dpvi_config& cfg, update_trace* trace) {
  auto tape = model.make_tape();
  return dpvi_update(state, model, *tape, batch, cfg, trace);
}

std::vector<named_values> get_params(const dpvi_state& state) {
  return constrained_params(state.psi);
}

double spent_privacy(const dpvi_state& state, const dpvi_config& cfg,
                     double delta) {
  if (state.iteration == 0 || cfg.noise_multiplier == 0.0) {
    // Nothing released yet, or non-private mode (unbounded epsilon).
    return state.iteration == 0
               ? 0.0
               : std::numeric_limits<double>::infinity();
  }
  mechanism_params p;
  p.sigma = cfg.noise_multiplier;
  p.q = double(cfg.batch_size) / double(cfg.data_size);
  p.compositions = state.iteration;
  return compute_epsilon(p, delta).epsilon;
}

void save_checkpoint(const std::string& path, const dpvi_state& state,
                     const std::string& model_name) {
  nlohmann::json j;
  j["version"] = 1;
  j["model"] = model_name;
  j["iteration"] = state.iteration;
  j["rng"] = {u64_hex(state.rng.state[0]), u64_hex(state.rng.state[1]),
              u64_hex(state.rng.state[2]), u64_hex(state.rng.state[3])};
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : state.psi.entries) {
    entries.push_back({{"name", e.name},
                       {"transform", transform_tag(e.transform)},
                       {"values", e.unconstrained}});
  }
  j["psi"] = entries;
  j["adam_m"] = state.adam_m;
  j["adam_v"] = state.adam_v;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
}

dpvi_state load_checkpoint(const std::string& path,
                           const std::string& expected_model_name) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  if (j.at("version").get<int>() != 1) {
    throw std::runtime_error("unsupported checkpoint version");
  }
  if (j.at("model").get<std::string>() != expected_model_name) {
    throw std::runtime_error("checkpoint belongs to a different model");
  }
  dpvi_state state;
  state.iteration = j.at("iteration").get<std::size_t>();
  const auto rng_words = j.at("rng").get<std::vector<std::string>>();
  if (rng_words.size() != 4) throw std::runtime_error("bad rng state");
  for (int i = 0; i < 4; ++i) {
    state.rng.state[std::size_t(i)] = parse_u64_hex(rng_words[std::size_t(i)]);
  }
  for (const auto& e : j.at("psi")) {
    guide_entry entry;
    entry.name = e.at("name").get<std::string>();
    entry.transform = transform_from_tag(e.at("transform").get<int>());
    entry.unconstrained = e.at("values").get<std::vector<double>>();
    state.psi.entries.push_back(std::move(entry));
  }
  state.adam_m = j.at("adam_m").get<std::vector<double>>();
  state.adam_v = j.at("adam_v").get<std::vector<double>>();
  if (state.adam_m.size() != state.psi.dim() ||
      state.adam_v.size() != state.psi.dim()) {
    throw std::runtime_error("checkpoint moment vectors do not match psi");
  }
  return state;
}

}  // namespace dpvi
