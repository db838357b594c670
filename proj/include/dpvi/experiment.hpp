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
#ifndef DPVI_EXPERIMENT_HPP
#define DPVI_EXPERIMENT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "dpvi/engine.hpp"

namespace dpvi {

// Experiment driver configuration. Exactly one of {non_private, sigma > 0,
// epsilon > 0} selects the privacy mode; with an epsilon target the noise
// multiplier comes from the accountant's sigma search.
struct experiment_config {
  std::string model = "hlr";  // logreg | hlr | gmm
  std::size_t n = 500;
  std::size_t batch_size = 25;
  std::size_t iterations = 100000;
  double epsilon = 0.0;
  double sigma = 0.0;
  bool non_private = false;
  double delta = 0.0;  // 0 means 1/N
  double clip_bound = 2.0;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  std::size_t repeats = 1;
  std::size_t eval_every = 0;  // 0 means iterations / 20
  std::string out_prefix;     // when set, run CSV + manifest are written

  void validate() const;
  double effective_delta() const { return delta > 0.0 ? delta : 1.0 / double(n); }
  std::string canonical_json() const;
};

experiment_config load_experiment_config(const std::string& path);

struct metrics_row {
  std::size_t run_id = 0;
  std::size_t iteration = 0;
  double elbo = 0.0;
  double metric = 0.0;  // AUC or held-out log-likelihood
  std::int64_t wall_ns = 0;
};

struct experiment_result {
  std::vector<metrics_row> rows;
  std::vector<double> final_metric;  // one per repeat
  double sigma_used = 0.0;
  std::string csv;  // deterministic except for the trailing wall-time column
};

// Runs `repeats` independent repetitions (data and inference seeds derived
// from the base seed per repeat), wiring sampler -> engine -> metrics.
// Repeats execute in parallel worker threads; outputs are in repeat order.
experiment_result run_experiment(const experiment_config& cfg);

// Writes <prefix>.csv and <prefix>.manifest.json.
void write_run_outputs(const experiment_config& cfg,
                       const experiment_result& result);

// Renders rows as CSV (the same text run_experiment stores in `csv`).
std::string metrics_csv(const std::vector<metrics_row>& rows);

// FNV-1a hash of the canonical config JSON, hex-encoded.
std::string config_hash(const experiment_config& cfg);

// --- Benchmarks ----------------------------------------------------------

struct batch_bench_row {
  std::size_t batch_size = 0;
  bool dp = false;
  double mean_seconds_per_iter = 0.0;
  double stderr_seconds = 0.0;
};

// Per-iteration wall time of the update for a span of batch sizes, in both
// DP and plain DSVI modes, averaged over `iters` timed iterations.
std::vector<batch_bench_row> bench_batch_size(
    const std::vector<std::size_t>& sizes, std::size_t iters,
    std::uint64_t seed);
std::string batch_bench_csv(const std::vector<batch_bench_row>& rows);

struct sampler_bench_row {
  std::size_t n = 0;
  std::size_t batch_size = 0;
  double mean_iters = 0.0;
  std::uint64_t p99_iters = 0;
  std::int64_t wall_ns_per_batch = 0;
};

std::vector<sampler_bench_row> bench_sampler(
    const std::vector<std::size_t>& ns, std::size_t batch_size,
    std::size_t trials, std::uint64_t seed);
std::string sampler_bench_csv(const std::vector<sampler_bench_row>& rows);

}  // namespace dpvi

#endif  // DPVI_EXPERIMENT_HPP
