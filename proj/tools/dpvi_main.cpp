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
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dpvi/accountant.hpp"
#include "dpvi/data.hpp"
#include "dpvi/experiment.hpp"

namespace {

int run_train(const std::string& config_path, const std::string& model_override,
              std::uint64_t seed, bool seed_set, const std::string& out) {
  dpvi::experiment_config cfg = dpvi::load_experiment_config(config_path);
  if (!model_override.empty()) cfg.model = model_override;
  if (seed_set) cfg.seed = seed;
  if (!out.empty()) cfg.out_prefix = out;
  cfg.validate();

  const dpvi::experiment_result result = dpvi::run_experiment(cfg);
  if (cfg.out_prefix.empty()) {
    std::cout << result.csv;
  } else {
    std::cout << "wrote " << cfg.out_prefix << ".csv and "
              << cfg.out_prefix << ".manifest.json\n";
  }
  std::cerr << "sigma_used=" << result.sigma_used << "\n";
  return 0;
}

int run_gen_data(const std::string& model, std::size_t n, std::uint64_t seed,
                 const std::string& out) {
  if (model == "hlr") {
    const dpvi::hlr_data data = dpvi::gen_hlr_data(n, seed);
    dpvi::save_dataset_csv(out + ".train.csv", data.train, true, true);
    dpvi::save_dataset_csv(out + ".test.csv", data.test, true, true);
    dpvi::save_matrix_csv(out + ".groups.csv", data.train.group_matrix,
                          data.train.group_dim);
  } else if (model == "gmm") {
    const dpvi::gmm_data data = dpvi::gen_gmm_data(n, seed);
    dpvi::save_dataset_csv(out + ".train.csv", data.train, false, false);
    dpvi::save_dataset_csv(out + ".test.csv", data.test, false, false);
  } else if (model == "logreg") {
    const dpvi::logreg_data data = dpvi::gen_logreg_separable(n, seed);
    dpvi::save_dataset_csv(out + ".train.csv", data.train, true, false);
    dpvi::save_dataset_csv(out + ".test.csv", data.test, true, false);
  } else {
    std::cerr << "unknown model '" << model << "'\n";
    return 1;
  }
  std::cout << "wrote " << out << ".{train,test}.csv\n";
  return 0;
}

nlohmann::json accountant_json(double value, const char* key,
                               const dpvi::epsilon_report& report) {
  nlohmann::json j;
  j[key] = value;
  j["grid_points"] = report.grid_points;
  j["directions"] = report.directions;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private variational inference toolkit"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "Run an inference experiment");
  std::string train_config, train_model, train_out;
  std::uint64_t train_seed = 0;
  bool train_seed_set = false;
  train->add_option("--config", train_config, "JSON config file")->required();
  train->add_option("--model", train_model, "logreg | hlr | gmm");
  train->add_option("--out", train_out, "output path prefix");
  train->add_option("--seed", train_seed, "64-bit unsigned seed")
      ->each([&](const std::string&) { train_seed_set = true; });

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Write synthetic data CSVs");
  std::string gen_model = "hlr", gen_out = "data";
  std::size_t gen_n = 500;
  std::uint64_t gen_seed = 0;
  gen->add_option("--model", gen_model, "logreg | hlr | gmm")->required();
  gen->add_option("--n", gen_n, "records per split");
  gen->add_option("--seed", gen_seed, "64-bit unsigned seed");
  gen->add_option("--out", gen_out, "output path prefix")->required();

  // accountant eps / sigma
  auto* acc = app.add_subcommand("accountant", "Privacy accounting");
  acc->require_subcommand(1);
  auto* acc_eps = acc->add_subcommand("eps", "epsilon for a noise multiplier");
  double a_sigma = 1.0, a_q = 0.01, a_delta = 1e-5, a_eps = 1.0;
  std::size_t a_iters = 1;
  acc_eps->add_option("--sigma", a_sigma)->required();
  acc_eps->add_option("--q", a_q)->required();
  acc_eps->add_option("--iters", a_iters)->required();
  acc_eps->add_option("--delta", a_delta)->required();
  auto* acc_sigma =
      acc->add_subcommand("sigma", "noise multiplier for an epsilon target");
  acc_sigma->add_option("--eps", a_eps)->required();
  acc_sigma->add_option("--delta", a_delta)->required();
  acc_sigma->add_option("--q", a_q)->required();
  acc_sigma->add_option("--iters", a_iters)->required();

  // bench sampler / batch-size
  auto* bench = app.add_subcommand("bench", "Micro-benchmarks");
  bench->require_subcommand(1);
  auto* bench_sampler_cmd = bench->add_subcommand("sampler");
  std::vector<std::size_t> bench_ns{1000, 10000, 100000};
  std::size_t bench_batch = 128, bench_trials = 1000;
  std::uint64_t bench_seed = 0;
  bench_sampler_cmd->add_option("--n", bench_ns, "dataset sizes");
  bench_sampler_cmd->add_option("--batch", bench_batch);
  bench_sampler_cmd->add_option("--trials", bench_trials);
  bench_sampler_cmd->add_option("--seed", bench_seed);
  auto* bench_batch_cmd = bench->add_subcommand("batch-size");
  std::vector<std::size_t> bench_sizes{32, 64, 128, 256, 512};
  std::size_t bench_iters = 100;
  bench_batch_cmd->add_option("--sizes", bench_sizes, "batch sizes");
  bench_batch_cmd->add_option("--iters", bench_iters, "timed iterations");
  bench_batch_cmd->add_option("--seed", bench_seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      return run_train(train_config, train_model, train_seed, train_seed_set,
                       train_out);
    }
    if (*gen) {
      return run_gen_data(gen_model, gen_n, gen_seed, gen_out);
    }
    if (*acc_eps) {
      const dpvi::mechanism_params p{a_sigma, a_q, a_iters};
      const dpvi::epsilon_report report = dpvi::compute_epsilon(p, a_delta);
      std::cout << accountant_json(report.epsilon, "epsilon", report).dump(2)
                << "\n";
      return 0;
    }
    if (*acc_sigma) {
      const dpvi::privacy_params target{a_eps, a_delta};
      const double sigma = dpvi::approximate_sigma(target, a_q, a_iters);
      const dpvi::mechanism_params p{sigma, a_q, a_iters};
      const dpvi::epsilon_report report = dpvi::compute_epsilon(p, a_delta);
      std::cout << accountant_json(sigma, "sigma", report).dump(2) << "\n";
      return 0;
    }
    if (*bench_sampler_cmd) {
      std::cout << dpvi::sampler_bench_csv(dpvi::bench_sampler(
          bench_ns, bench_batch, bench_trials, bench_seed));
      return 0;
    }
    if (*bench_batch_cmd) {
      std::cout << dpvi::batch_bench_csv(
          dpvi::bench_batch_size(bench_sizes, bench_iters, bench_seed));
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
