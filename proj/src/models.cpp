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
#include "dpvi/models.hpp"

#include <cmath>
#include <stdexcept>

#include "dpvi/distributions.hpp"

namespace dpvi {
namespace {

constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

double plain_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double plain_softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double plain_bernoulli_logit(double y, double z) {
  return (y - 1.0) * z - plain_softplus(-z);
}

// Sum_j log N(v_j; loc_j, scale_j) with the log-scale passed separately so
// guide blocks can reuse their unconstrained leaf. Built with one fixed op
// sequence so that structurally equal prior/guide blocks produce bitwise
// equal values.
ad::var diag_normal_logpdf(ad::tape& t, ad::var v, ad::var loc, ad::var scale,
                           ad::var log_scale, std::size_t dim) {
  ad::var z = t.div(t.sub(v, loc), scale);
  ad::var quad = t.mul(t.dot(z, z), t.constant(-0.5));
  ad::var lp = t.sub(quad, t.sum(log_scale));
  return t.add(lp, t.constant(-0.5 * double(dim) * kLogTwoPi));
}

struct latent_block {
  ad::var theta;
  ad::var logq;
};

// Reparameterized block: theta = loc + exp(scale_log) * eps, plus its guide
// log-density evaluated at the draw.
latent_block make_latent_block(ad::tape& t, ad::var loc, ad::var scale_log,
                               ad::var eps, std::size_t dim) {
  ad::var scale = t.exp(scale_log);
  ad::var theta = t.add(loc, t.mul(scale, eps));
  ad::var logq = diag_normal_logpdf(t, theta, loc, scale, scale_log, dim);
  return {theta, logq};
}

std::vector<double> zeros(std::size_t n) { return std::vector<double>(n, 0.0); }
std::vector<double> filled(std::size_t n, double v) {
  return std::vector<double>(n, v);
}

}  // namespace

void model_tape::set_psi(std::span<const double> psi_flat) {
  std::size_t off = 0;
  for (std::size_t i = 0; i < psi_vars.size(); ++i) {
    graph.set(psi_vars[i], psi_flat.subspan(off, psi_sizes[i]));
    off += psi_sizes[i];
  }
  if (off != psi_flat.size()) {
    throw std::invalid_argument("psi vector has wrong dimension");
  }
}

void model_tape::set_noise(std::span<const double> eps,
                           std::span<const double> aux) {
  if (eps.size() > 0) graph.set(eps_var, eps);
  if (aux_dim > 0) {
    if (aux.size() != aux_dim) {
      throw std::invalid_argument("aux noise has wrong dimension");
    }
    aux_cache.assign(aux.begin(), aux.end());
  }
}

void model_tape::set_data_size(std::size_t n) {
  if (n == 0) throw std::invalid_argument("data size must be positive");
  graph.set(inv_n_var, 1.0 / double(n));
}

void model_tape::bind_record(const record& r) {
  if (binder) binder(*this, r);
}

double model_tape::value_and_gradient(std::span<double> grad_psi) {
  graph.forward();
  graph.backward(root);
  graph.input_gradient(grad_psi);
  return graph.scalar(root);
}

double model_tape::value() {
  graph.forward();
  return graph.scalar(root);
}

std::vector<double> latent_noise(const model_spec& model, const rng_key& key) {
  return normal(split(key, 0), model.latent_dim);
}

std::vector<double> aux_noise(const model_spec& model, const rng_key& key) {
  return normal(split(key, 1), model.aux_dim);
}

elbo_result per_example_elbo(const model_spec& model, const guide_params& psi,
                             const record& r, std::size_t data_size,
                             const rng_key& key) {
  auto tape = model.make_tape();
  tape->set_psi(psi.flatten());
  const std::vector<double> eps = latent_noise(model, key);
  const std::vector<double> aux = aux_noise(model, key);
  tape->set_noise(eps, aux);
  tape->set_data_size(data_size);
  tape->bind_record(r);
  elbo_result out;
  out.grad.resize(tape->psi_dim());
  out.value = tape->value_and_gradient(out.grad);
  if (!std::isfinite(out.value)) {
    throw std::runtime_error("non-finite per-example objective");
  }
  return out;
}

model_spec make_logreg_model(std::size_t feature_dim) {
  const std::size_t d = feature_dim;
  model_spec m;
  m.name = "logreg";
  m.guide_prototype.entries = {
      {"w_loc", zeros(d), transform_kind::identity},
      {"w_scale_log", zeros(d), transform_kind::exp_positive},
  };
  m.latent_dim = d;
  m.aux_dim = 0;

  m.make_tape = [d]() {
    auto mt = std::make_unique<model_tape>();
    ad::tape& t = mt->graph;
    ad::var w_loc = t.input(d);
    ad::var w_slog = t.input(d);
    mt->psi_vars = {w_loc, w_slog};
    mt->psi_sizes = {d, d};
    mt->eps_var = t.slot(d);
    mt->inv_n_var = t.slot(1);

    latent_block w = make_latent_block(t, w_loc, w_slog, mt->eps_var, d);
    ad::var prior =
        diag_normal_logpdf(t, w.theta, t.constant(zeros(d)),
                           t.constant(filled(d, 4.0)),
                           t.constant(filled(d, std::log(4.0))), d);

    ad::var x = t.slot(d);
    ad::var y_minus_1 = t.slot(1);
    ad::var z = t.dot(w.theta, x);
    ad::var lik = t.sub(t.mul(y_minus_1, z), ad::softplus(t.neg(z)));

    mt->root = t.add(lik, t.mul(mt->inv_n_var, t.sub(prior, w.logq)));
    mt->binder = [x, y_minus_1](model_tape& self, const record& r) {
      self.graph.set(x, std::span<const double>(r.x));
      self.graph.set(y_minus_1, r.y - 1.0);
    };
    return mt;
  };

  m.per_example_log_lik = [](std::span<const double> theta,
                             std::span<const double>, const record& r) {
    double z = 0.0;
    for (std::size_t j = 0; j < r.x.size(); ++j) z += theta[j] * r.x[j];
    return plain_bernoulli_logit(r.y, z);
  };
  m.log_prior = [d](std::span<const double> theta) {
    const normal_dist prior(0.0, 4.0);
    double lp = 0.0;
    for (std::size_t j = 0; j < d; ++j) lp += prior.log_prob(theta[j]);
    return lp;
  };
  m.predict_score = [](const guide_params& psi, const record& r) {
    const auto& loc = psi.at("w_loc").unconstrained;
    double z = 0.0;
    for (std::size_t j = 0; j < r.x.size(); ++j) z += loc[j] * r.x[j];
    return plain_sigmoid(z);
  };
  return m;
}

model_spec make_hlr_model(std::size_t feature_dim, std::size_t n_groups,
                          std::size_t group_dim,
                          std::vector<double> group_matrix) {
  const std::size_t d = feature_dim, l_count = n_groups, k = group_dim;
  if (group_matrix.size() != l_count * k) {
    throw std::invalid_argument("group matrix must be L x K");
  }
  const std::size_t m_dim = d * k;

  model_spec m;
  m.name = "hlr";
  m.guide_prototype.entries = {
      {"M_loc", zeros(m_dim), transform_kind::identity},
      {"M_scale_log", zeros(m_dim), transform_kind::exp_positive},
  };
  m.latent_dim = m_dim;
  m.aux_dim = l_count * d;  // per-group weight noise, redrawn each iteration

  auto groups = std::make_shared<const std::vector<double>>(group_matrix);

  m.make_tape = [d, k, l_count, m_dim, groups]() {
    auto mt = std::make_unique<model_tape>();
    ad::tape& t = mt->graph;
    ad::var m_loc = t.input(m_dim);
    ad::var m_slog = t.input(m_dim);
    mt->psi_vars = {m_loc, m_slog};
    mt->psi_sizes = {m_dim, m_dim};
    mt->eps_var = t.slot(m_dim);
    mt->aux_dim = l_count * d;
    mt->aux_cache.assign(mt->aux_dim, 0.0);
    mt->inv_n_var = t.slot(1);

    latent_block mb = make_latent_block(t, m_loc, m_slog, mt->eps_var, m_dim);
    ad::var prior =
        diag_normal_logpdf(t, mb.theta, t.constant(zeros(m_dim)),
                           t.constant(filled(m_dim, 4.0)),
                           t.constant(filled(m_dim, std::log(4.0))), m_dim);

    ad::var x = t.slot(d);
    ad::var y_minus_1 = t.slot(1);
    ad::var g_row = t.slot(k);
    ad::var w_noise = t.slot(d);

    // Group weights w = M g_l + noise; their own density term cancels since
    // they are drawn from exactly their conditional prior.
    std::vector<ad::var> eta(d);
    for (std::size_t row = 0; row < d; ++row) {
      eta[row] = t.dot(t.slice(mb.theta, row * k, k), g_row);
    }
    ad::var w = t.add(t.stack(eta), w_noise);
    ad::var z = t.dot(w, x);
    ad::var lik = t.sub(t.mul(y_minus_1, z), ad::softplus(t.neg(z)));

    mt->root = t.add(lik, t.mul(mt->inv_n_var, t.sub(prior, mb.logq)));
    mt->binder = [x, y_minus_1, g_row, w_noise, d, k, groups](
                     model_tape& self, const record& r) {
      self.graph.set(x, std::span<const double>(r.x));
      self.graph.set(y_minus_1, r.y - 1.0);
      self.graph.set(g_row,
                     std::span<const double>(groups->data() + r.group * k, k));
      self.graph.set(w_noise, std::span<const double>(
                                  self.aux_cache.data() + r.group * d, d));
    };
    return mt;
  };

  m.per_example_log_lik = [d, k, groups](std::span<const double> theta,
                                         std::span<const double> aux,
                                         const record& r) {
    double z = 0.0;
    for (std::size_t row = 0; row < d; ++row) {
      double w = aux[r.group * d + row];
      for (std::size_t j = 0; j < k; ++j) {
        w += theta[row * k + j] * (*groups)[r.group * k + j];
      }
      z += w * r.x[row];
    }
    return plain_bernoulli_logit(r.y, z);
  };
  m.log_prior = [m_dim](std::span<const double> theta) {
    const normal_dist prior(0.0, 4.0);
    double lp = 0.0;
    for (std::size_t j = 0; j < m_dim; ++j) lp += prior.log_prob(theta[j]);
    return lp;
  };
  m.predict_score = [d, k, groups](const guide_params& psi, const record& r) {
    const auto& loc = psi.at("M_loc").unconstrained;
    double z = 0.0;
    for (std::size_t row = 0; row < d; ++row) {
      double w = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        w += loc[row * k + j] * (*groups)[r.group * k + j];
      }
      z += w * r.x[row];
    }
    return plain_sigmoid(z);
  };
  return m;
}

model_spec make_gmm_model(std::size_t components, std::size_t dim) {
  const std::size_t k = components, d = dim;
  if (k < 1) throw std::invalid_argument("mixture needs K >= 1");
  const std::size_t u_dim = k - 1;   // unconstrained weights
  const std::size_t mu_dim = k * d;  // component means
  const std::size_t s_dim = k;       // log component scales

  model_spec m;
  m.name = "gmm";
  m.guide_prototype.entries = {
      {"pis_loc", zeros(u_dim), transform_kind::simplex_softmax},
      {"pis_scale_log", zeros(u_dim), transform_kind::exp_positive},
      {"locs_loc", zeros(mu_dim), transform_kind::identity},
      {"locs_scale_log", zeros(mu_dim), transform_kind::exp_positive},
      {"scales_log_loc", zeros(s_dim), transform_kind::exp_positive},
      {"scales_log_scale_log", zeros(s_dim), transform_kind::exp_positive},
  };
  m.latent_dim = u_dim + mu_dim + s_dim;
  m.aux_dim = 0;

  m.make_tape = [k, d, u_dim, mu_dim, s_dim]() {
    auto mt = std::make_unique<model_tape>();
    ad::tape& t = mt->graph;
    ad::var u_loc = t.input(u_dim);
    ad::var u_slog = t.input(u_dim);
    ad::var mu_loc = t.input(mu_dim);
    ad::var mu_slog = t.input(mu_dim);
    ad::var s_loc = t.input(s_dim);
    ad::var s_slog = t.input(s_dim);
    mt->psi_vars = {u_loc, u_slog, mu_loc, mu_slog, s_loc, s_slog};
    mt->psi_sizes = {u_dim, u_dim, mu_dim, mu_dim, s_dim, s_dim};
    mt->eps_var = t.slot(u_dim + mu_dim + s_dim);
    mt->inv_n_var = t.slot(1);

    latent_block ub = make_latent_block(
        t, u_loc, u_slog, t.slice(mt->eps_var, 0, u_dim), u_dim);
    latent_block mub = make_latent_block(
        t, mu_loc, mu_slog, t.slice(mt->eps_var, u_dim, mu_dim), mu_dim);
    latent_block sb = make_latent_block(
        t, s_loc, s_slog, t.slice(mt->eps_var, u_dim + mu_dim, s_dim), s_dim);
    ad::var logq = t.add(t.add(ub.logq, mub.logq), sb.logq);

    // Mixture weights through a pinned softmax: a = [u, 0],
    // log pi_j = a_j - logsumexp(a).
    std::vector<ad::var> a_parts(k);
    for (std::size_t j = 0; j < u_dim; ++j) {
      a_parts[j] = t.slice(ub.theta, j, 1);
    }
    a_parts[u_dim] = t.constant(0.0);
    ad::var a = t.stack(a_parts);
    ad::var lse_a = t.logsumexp(a);

    // Priors in unconstrained coordinates (log-Jacobians included):
    //  - Dirichlet(1,..,1) through the softmax: lgamma(K) + sum(u) - K lse
    //  - standard normal means
    //  - InverseGamma(1, 1) through log: sum(-t_j - exp(-t_j))
    ad::var prior_u =
        t.add(t.constant(std::lgamma(double(k))),
              t.sub(t.sum(ub.theta), t.mul(lse_a, t.constant(double(k)))));
    ad::var prior_mu =
        diag_normal_logpdf(t, mub.theta, t.constant(zeros(mu_dim)),
                           t.constant(filled(mu_dim, 1.0)),
                           t.constant(zeros(mu_dim)), mu_dim);
    ad::var neg_s = t.neg(sb.theta);
    ad::var prior_s = t.sub(t.sum(neg_s), t.sum(t.exp(neg_s)));
    ad::var prior = t.add(t.add(prior_u, prior_mu), prior_s);

    // Marginalized mixture likelihood.
    ad::var x = t.slot(d);
    ad::var scales = t.exp(sb.theta);
    std::vector<ad::var> lp(k);
    for (std::size_t j = 0; j < k; ++j) {
      ad::var diff = t.sub(x, t.slice(mub.theta, j * d, d));
      ad::var zj = t.div(diff, t.slice(scales, j, 1));
      ad::var quad = t.mul(t.dot(zj, zj), t.constant(-0.5));
      ad::var log_pi_j = t.sub(t.slice(a, j, 1), lse_a);
      ad::var log_norm =
          t.mul(t.slice(sb.theta, j, 1), t.constant(-double(d)));
      lp[j] = t.add(t.add(t.add(quad, log_pi_j), log_norm),
                    t.constant(-0.5 * double(d) * kLogTwoPi));
    }
    ad::var lik = t.logsumexp(t.stack(lp));

    mt->root = t.add(lik, t.mul(mt->inv_n_var, t.sub(prior, logq)));
    mt->binder = [x](model_tape& self, const record& r) {
      self.graph.set(x, std::span<const double>(r.x));
    };
    return mt;
  };

  m.per_example_log_lik = [k, u_dim, mu_dim](std::span<const double> theta,
                                             std::span<const double>,
                                             const record& r) {
    const std::span<const double> u = theta.subspan(0, u_dim);
    const std::span<const double> mu = theta.subspan(u_dim, mu_dim);
    const std::span<const double> ts = theta.subspan(u_dim + mu_dim, k);
    const std::vector<double> pis = softmax_pinned(u);
    std::vector<double> scales(k);
    for (std::size_t j = 0; j < k; ++j) scales[j] = std::exp(ts[j]);
    return gmm_log_prob(pis, mu, scales, r.x);
  };
  m.log_prior = [k, u_dim, mu_dim](std::span<const double> theta) {
    const std::span<const double> u = theta.subspan(0, u_dim);
    const std::span<const double> mu = theta.subspan(u_dim, mu_dim);
    const std::span<const double> ts = theta.subspan(u_dim + mu_dim, k);
    const std::vector<double> pis = softmax_pinned(u);
    double lp = std::lgamma(double(k));
    for (double p : pis) lp += std::log(p);  // softmax Jacobian
    const normal_dist std_normal(0.0, 1.0);
    for (double v : mu) lp += std_normal.log_prob(v);
    for (double t : ts) lp += -t - std::exp(-t);
    return lp;
  };
  m.predict_score = nullptr;
  return m;
}

model_bundle build_models(std::vector<double> hlr_group_matrix) {
  if (hlr_group_matrix.empty()) {
    hlr_group_matrix.assign(kHlrGroups * kHlrGroupDim, 0.0);
    for (std::size_t l = 0; l < kHlrGroups; ++l) {
      hlr_group_matrix[l * kHlrGroupDim + l % kHlrGroupDim] = 1.0;
    }
  }
  return model_bundle{
      make_logreg_model(1),
      make_hlr_model(kHlrFeatureDim, kHlrGroups, kHlrGroupDim,
                     std::move(hlr_group_matrix)),
      make_gmm_model(kGmmComponents, kGmmDim),
  };
}

std::vector<std::vector<double>> posterior_predictive_w(
    const guide_params& psi, std::span<const double> g_row, const rng_key& key,
    std::size_t draws) {
  const auto& loc = psi.at("M_loc").unconstrained;
  const auto& slog = psi.at("M_scale_log").unconstrained;
  const std::size_t k = g_row.size();
  if (k == 0 || loc.size() % k != 0) {
    throw std::invalid_argument("group vector does not divide M");
  }
  const std::size_t d = loc.size() / k;

  std::vector<std::vector<double>> out(draws);
  for (std::size_t s = 0; s < draws; ++s) {
    rng_stream stream(split(key, s));
    std::vector<double> w(d, 0.0);
    // M ~ q(M | psi) elementwise, then w ~ N(M g, I).
    for (std::size_t row = 0; row < d; ++row) {
      for (std::size_t j = 0; j < k; ++j) {
        const std::size_t idx = row * k + j;
        const double m_draw =
            loc[idx] + std::exp(slog[idx]) * stream.next_normal();
        w[row] += m_draw * g_row[j];
      }
    }
    for (std::size_t row = 0; row < d; ++row) w[row] += stream.next_normal();
    out[s] = std::move(w);
  }
  return out;
}

}  // namespace dpvi
