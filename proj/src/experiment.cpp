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
#include "dpvi/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "dpvi/accountant.hpp"
#include "dpvi/data.hpp"
#include "dpvi/metrics.hpp"
#include "dpvi/sampler.hpp"

namespace dpvi {
namespace {

using clock_type = std::chrono::steady_clock;

std::int64_t elapsed_ns(clock_type::time_point from) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             clock_type::now() - from)
      .count();
}

std::string format_g9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

// One repeat's training loop; everything it consumes derives from the
// repeat-specific seed, so repeats are independent and individually
// deterministic.
struct repeat_output {
  std::vector<metrics_row> rows;
  double final_metric = 0.0;
};

struct prepared_run {
  model_spec model;
  dataset train;
  dataset test;
};

prepared_run prepare_run(const experiment_config& cfg, std::uint64_t seed) {
  prepared_run out;
  if (cfg.model == "logreg") {
    logreg_data data = gen_logreg_separable(cfg.n, seed);
    out.model = make_logreg_model(data.train.feature_dim);
    out.train = std::move(data.train);
    out.test = std::move(data.test);
  } else if (cfg.model == "hlr") {
    hlr_data data = gen_hlr_data(cfg.n, seed);
    out.model = make_hlr_model(kHlrFeatureDim, kHlrGroups, kHlrGroupDim,
                               data.train.group_matrix);
    out.train = std::move(data.train);
    out.test = std::move(data.test);
  } else if (cfg.model == "gmm") {
    gmm_data data = gen_gmm_data(cfg.n, seed);
    out.model = make_gmm_model(kGmmComponents, kGmmDim);
    out.train = std::move(data.train);
    out.test = std::move(data.test);
  } else {
    throw std::invalid_argument("unknown model '" + cfg.model + "'");
  }
  return out;
}

double evaluate_metric(const prepared_run& run, const guide_params& psi) {
  if (run.model.name == "gmm") {
    return gmm_test_loglik(psi, run.test);
  }
  std::vector<double> scores, labels;
  scores.reserve(run.test.size());
  labels.reserve(run.test.size());
  for (const record& r : run.test.records) {
    scores.push_back(run.model.predict_score(psi, r));
    labels.push_back(r.y);
  }
  return auc(scores, labels);
}

repeat_output run_one_repeat(const experiment_config& cfg, double sigma,
                             std::size_t repeat_index) {
  const std::uint64_t repeat_seed = cfg.seed + 1000 * repeat_index;
  const prepared_run run = prepare_run(cfg, repeat_seed);

  dpvi_config engine_cfg;
  engine_cfg.clip_bound = cfg.non_private
                              ? std::numeric_limits<double>::infinity()
                              : cfg.clip_bound;
  engine_cfg.noise_multiplier = cfg.non_private ? 0.0 : sigma;
  engine_cfg.batch_size = cfg.batch_size;
  engine_cfg.data_size = run.train.size();
  engine_cfg.learning_rate = cfg.learning_rate;

  const rng_key run_root = split(seed_key(repeat_seed), 0x72'75'6e);
  dpvi_state state = dpvi_init(split(run_root, 0), run.model, engine_cfg);
  const sampler_state sampler =
      make_sampler_state(run.train.size(), cfg.batch_size, split(run_root, 1));

  auto tape = run.model.make_tape();
  const std::size_t eval_every =
      cfg.eval_every > 0 ? cfg.eval_every
                         : std::max<std::size_t>(1, cfg.iterations / 20);

  repeat_output out;
  const auto started = clock_type::now();
  std::vector<const record*> batch(cfg.batch_size);
  for (std::size_t iter = 0; iter < cfg.iterations; ++iter) {
    const std::vector<std::uint32_t> indices = sample_batch(sampler, iter);
    for (std::size_t i = 0; i < indices.size(); ++i) {
      batch[i] = &run.train.records[indices[i]];
    }
    const double loss = dpvi_update(state, run.model, *tape, batch, engine_cfg);
    if ((iter + 1) % eval_every == 0 || iter + 1 == cfg.iterations) {
      metrics_row row;
      row.run_id = repeat_index;
      row.iteration = iter + 1;
      row.elbo = -loss;
      row.metric = evaluate_metric(run, state.psi);
      row.wall_ns = elapsed_ns(started);
      out.rows.push_back(row);
    }
  }
  out.final_metric = out.rows.empty() ? 0.0 : out.rows.back().metric;
  return out;
}

}  // namespace

void experiment_config::validate() const {
  if (model != "logreg" && model != "hlr" && model != "gmm") {
    throw std::invalid_argument("model must be logreg, hlr or gmm");
  }
  if (n == 0 || batch_size == 0 || batch_size > n) {
    throw std::invalid_argument("need 0 < batch_size <= n");
  }
  if (iterations == 0) throw std::invalid_argument("iterations must be > 0");
  if (repeats == 0) throw std::invalid_argument("repeats must be > 0");
  const int modes = int(non_private) + int(sigma > 0.0) + int(epsilon > 0.0);
  if (modes != 1) {
    throw std::invalid_argument(
        "choose exactly one of non_private, sigma or epsilon");
  }
  if (!(effective_delta() > 0.0 && effective_delta() < 1.0)) {
    throw std::invalid_argument("delta must land in (0, 1)");
  }
}

std::string experiment_config::canonical_json() const {
  nlohmann::json j;
  j["model"] = model;
  j["n"] = n;
  j["batch_size"] = batch_size;
  j["iterations"] = iterations;
  j["epsilon"] = epsilon;
  j["sigma"] = sigma;
  j["non_private"] = non_private;
  j["delta"] = delta;
  j["clip_bound"] = clip_bound;
  j["learning_rate"] = learning_rate;
  j["seed"] = seed;
  j["repeats"] = repeats;
  j["eval_every"] = eval_every;
  return j.dump();  // nlohmann emits object keys sorted
}

experiment_config load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  experiment_config cfg;
  cfg.model = j.value("model", cfg.model);
  cfg.n = j.value("n", cfg.n);
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.iterations = j.value("iterations", cfg.iterations);
  cfg.epsilon = j.value("epsilon", cfg.epsilon);
  cfg.sigma = j.value("sigma", cfg.sigma);
  cfg.non_private = j.value("non_private", cfg.non_private);
  cfg.delta = j.value("delta", cfg.delta);
  cfg.clip_bound = j.value("clip_bound", cfg.clip_bound);
  cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.repeats = j.value("repeats", cfg.repeats);
  cfg.eval_every = j.value("eval_every", cfg.eval_every);
  cfg.out_prefix = j.value("out", cfg.out_prefix);
  cfg.validate();
  return cfg;
}

std::string metrics_csv(const std::vector<metrics_row>& rows) {
  std::string out = "run,iteration,elbo,metric,wall_time_ns\n";
  for (const metrics_row& r : rows) {
    out += std::to_string(r.run_id);
    out += ',';
    out += std::to_string(r.iteration);
    out += ',';
    out += format_g9(r.elbo);
    out += ',';
    out += format_g9(r.metric);
    out += ',';
    out += std::to_string(r.wall_ns);
    out += '\n';
  }
  return out;
}

std::string config_hash(const experiment_config& cfg) {
  const std::string text = cfg.canonical_json();
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
  return buf;
}

experiment_result run_experiment(const experiment_config& cfg) {
  cfg.validate();

  experiment_result result;
  if (cfg.non_private) {
    result.sigma_used = 0.0;
  } else if (cfg.sigma > 0.0) {
    result.sigma_used = cfg.sigma;
  } else {
    privacy_params target{cfg.epsilon, cfg.effective_delta()};
    result.sigma_used = approximate_sigma(
        target, double(cfg.batch_size) / double(cfg.n), cfg.iterations);
  }

  // Repeats are embarrassingly parallel and individually deterministic.
  std::vector<std::future<repeat_output>> jobs;
  jobs.reserve(cfg.repeats);
  for (std::size_t r = 0; r < cfg.repeats; ++r) {
    jobs.push_back(std::async(std::launch::async, run_one_repeat, cfg,
                              result.sigma_used, r));
  }
  for (auto& job : jobs) {
    repeat_output out = job.get();
    result.final_metric.push_back(out.final_metric);
    result.rows.insert(result.rows.end(), out.rows.begin(), out.rows.end());
  }
  result.csv = metrics_csv(result.rows);

  if (!cfg.out_prefix.empty()) write_run_outputs(cfg, result);
  return result;
}

void write_run_outputs(const experiment_config& cfg,
                       const experiment_result& result) {
  {
    std::ofstream out(cfg.out_prefix + ".csv");
    if (!out) throw std::runtime_error("cannot write run CSV");
    out << result.csv;
  }
  nlohmann::json manifest;
  manifest["config"] = nlohmann::json::parse(cfg.canonical_json());
  manifest["config_hash"] = config_hash(cfg);
  manifest["seed"] = cfg.seed;
  manifest["sigma_used"] = result.sigma_used;
  manifest["generator"] = kGeneratorVersion;
  manifest["code_version"] = "0.1.0";
  std::ofstream out(cfg.out_prefix + ".manifest.json");
  if (!out) throw std::runtime_error("cannot write run manifest");
  out << manifest.dump(2) << '\n';
}

std::vector<batch_bench_row> bench_batch_size(
    const std::vector<std::size_t>& sizes, std::size_t iters,
    std::uint64_t seed) {
  // Fixed five-dimensional logistic task, large enough for every batch size.
  const std::size_t dim = 5;
  std::size_t n = 4096;
  for (std::size_t b : sizes) n = std::max(n, 8 * b);

  dataset data;
  data.feature_dim = dim;
  rng_stream stream(split(seed_key(seed), 0xbe5c));
  std::vector<double> w_true(dim);
  for (double& v : w_true) v = stream.next_normal();
  for (std::size_t i = 0; i < n; ++i) {
    record r;
    r.x.resize(dim);
    double z = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
      r.x[d] = stream.next_normal();
      z += w_true[d] * r.x[d];
    }
    r.y = stream.next_uniform() < 1.0 / (1.0 + std::exp(-z)) ? 1.0 : 0.0;
    data.records.push_back(std::move(r));
  }

  const model_spec model = make_logreg_model(dim);
  std::vector<batch_bench_row> rows;
  for (bool dp : {true, false}) {
    for (std::size_t b : sizes) {
      dpvi_config cfg;
      cfg.clip_bound = dp ? 1.0 : std::numeric_limits<double>::infinity();
      cfg.noise_multiplier = dp ? 1.0 : 0.0;
      cfg.batch_size = b;
      cfg.data_size = n;

      dpvi_state state = dpvi_init(seed_key(seed), model, cfg);
      const sampler_state sampler =
          make_sampler_state(n, b, split(seed_key(seed), 7));
      auto tape = model.make_tape();
      std::vector<const record*> batch(b);

      auto step = [&](std::size_t iter) {
        const auto indices = sample_batch(sampler, iter);
        for (std::size_t i = 0; i < b; ++i) {
          batch[i] = &data.records[indices[i]];
        }
        dpvi_update(state, model, *tape, batch, cfg);
      };
      for (std::size_t warm = 0; warm < 3; ++warm) step(warm);

      std::vector<double> times(iters);
      for (std::size_t i = 0; i < iters; ++i) {
        const auto t0 = clock_type::now();
        step(3 + i);
        times[i] = double(elapsed_ns(t0)) * 1e-9;
      }
      double mean = 0.0;
      for (double t : times) mean += t;
      mean /= double(iters);
      double var = 0.0;
      for (double t : times) var += (t - mean) * (t - mean);
      var /= double(iters > 1 ? iters - 1 : 1);

      batch_bench_row row;
      row.batch_size = b;
      row.dp = dp;
      row.mean_seconds_per_iter = mean;
      row.stderr_seconds = std::sqrt(var / double(iters));
      rows.push_back(row);
    }
  }
  return rows;
}

std::string batch_bench_csv(const std::vector<batch_bench_row>& rows) {
  std::string out = "batch_size,mode,mean_s_per_iter,stderr_s\n";
  for (const auto& r : rows) {
    out += std::to_string(r.batch_size);
    out += r.dp ? ",dp," : ",non_dp,";
    out += format_g9(r.mean_seconds_per_iter);
    out += ',';
    out += format_g9(r.stderr_seconds);
    out += '\n';
  }
  return out;
}

std::vector<sampler_bench_row> bench_sampler(
    const std::vector<std::size_t>& ns, std::size_t batch_size,
    std::size_t trials, std::uint64_t seed) {
  std::vector<sampler_bench_row> rows;
  for (std::size_t n : ns) {
    const std::size_t b = std::min(batch_size, n);
    const sampler_state state =
        make_sampler_state(n, b, split(seed_key(seed), n));
    sampler_bench_row row;
    row.n = n;
    row.batch_size = b;

    const auto hist = iteration_stats(state, trials);
    const lane_summary summary = summarize_lane_histogram(hist);
    row.mean_iters = summary.mean;
    row.p99_iters = summary.p99;

    const auto t0 = clock_type::now();
    for (std::size_t t = 0; t < trials; ++t) {
      sample_batch(state, trials + t);
    }
    row.wall_ns_per_batch = elapsed_ns(t0) / std::int64_t(trials);
    rows.push_back(row);
  }
  return rows;
}

std::string sampler_bench_csv(const std::vector<sampler_bench_row>& rows) {
  std::string out = "n,B,mean_iters,p99_iters,wall_time_ns\n";
  for (const auto& r : rows) {
    out += std::to_string(r.n);
    out += ',';
    out += std::to_string(r.batch_size);
    out += ',';
    out += format_g9(r.mean_iters);
    out += ',';
    out += std::to_string(r.p99_iters);
    out += ',';
    out += std::to_string(r.wall_ns_per_batch);
    out += '\n';
  }
  return out;
}

}  // namespace dpvi
