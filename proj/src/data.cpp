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
#include "dpvi/data.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dpvi/distributions.hpp"
#include "dpvi/rng.hpp"

namespace dpvi {
namespace {

void append_value(std::string& line, double v, bool first) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  if (!first) line += ',';
  line += buf;
}

std::vector<double> parse_row(const std::string& line) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    out.push_back(std::stod(cell));
  }
  return out;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// One labelled record in the grouped logistic truth.
record hlr_record(rng_stream& stream, const hlr_truth& truth,
                  std::uint32_t group) {
  record r;
  r.group = group;
  r.x.resize(kHlrFeatureDim);
  for (double& v : r.x) v = stream.next_normal();
  double logit = 0.0;
  for (std::size_t d = 0; d < kHlrFeatureDim; ++d) {
    logit += truth.weights[group * kHlrFeatureDim + d] * r.x[d];
  }
  r.y = stream.next_uniform() < sigmoid(logit) ? 1.0 : 0.0;
  return r;
}

}  // namespace

void save_dataset_csv(const std::string& path, const dataset& data,
                      bool with_label, bool with_groups) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (const record& r : data.records) {
    std::string line;
    bool first = true;
    for (double v : r.x) {
      append_value(line, v, first);
      first = false;
    }
    if (with_label) append_value(line, r.y, first);
    if (with_groups) append_value(line, double(r.group), false);
    out << line << '\n';
  }
}

dataset load_dataset_csv(const std::string& path, std::size_t feature_dim,
                         bool with_label, bool with_groups) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  dataset data;
  data.feature_dim = feature_dim;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<double> row = parse_row(line);
    const std::size_t expected =
        feature_dim + (with_label ? 1 : 0) + (with_groups ? 1 : 0);
    if (row.size() != expected) {
      throw std::runtime_error("bad row width in " + path);
    }
    record r;
    r.x.assign(row.begin(), row.begin() + std::ptrdiff_t(feature_dim));
    std::size_t k = feature_dim;
    if (with_label) r.y = row[k++];
    if (with_groups) {
      r.group = std::uint32_t(row[k]);
      data.n_groups = std::max<std::size_t>(data.n_groups, r.group + 1);
    }
    data.records.push_back(std::move(r));
  }
  return data;
}

void save_matrix_csv(const std::string& path,
                     const std::vector<double>& values, std::size_t cols) {
  if (cols == 0 || values.size() % cols != 0) {
    throw std::invalid_argument("matrix size not divisible by column count");
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (std::size_t i = 0; i < values.size(); i += cols) {
    std::string line;
    for (std::size_t j = 0; j < cols; ++j) {
      append_value(line, values[i + j], j == 0);
    }
    out << line << '\n';
  }
}

std::vector<double> load_matrix_csv(const std::string& path,
                                    std::size_t* cols_out) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<double> values;
  std::size_t cols = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<double> row = parse_row(line);
    if (cols == 0) {
      cols = row.size();
    } else if (row.size() != cols) {
      throw std::runtime_error("ragged matrix in " + path);
    }
    values.insert(values.end(), row.begin(), row.end());
  }
  if (cols_out) *cols_out = cols;
  return values;
}

hlr_data gen_hlr_data(std::size_t n, std::uint64_t seed) {
  if (n < kHlrGroups) throw std::invalid_argument("need at least L records");
  const rng_key root = split(seed_key(seed), 0x68'6c'72);  // data stream tag

  hlr_data out;
  out.train.feature_dim = out.test.feature_dim = kHlrFeatureDim;
  out.train.n_groups = out.test.n_groups = kHlrGroups;
  out.train.group_dim = out.test.group_dim = kHlrGroupDim;

  rng_stream truth_stream(split(root, 0));
  out.train.group_matrix.resize(kHlrGroups * kHlrGroupDim);
  for (double& v : out.train.group_matrix) v = truth_stream.next_normal();
  out.test.group_matrix = out.train.group_matrix;

  out.truth.mixing.resize(kHlrFeatureDim * kHlrGroupDim);
  for (double& v : out.truth.mixing) v = truth_stream.next_normal();

  // w_l = M g_l + unit Gaussian noise.
  out.truth.weights.assign(kHlrGroups * kHlrFeatureDim, 0.0);
  for (std::size_t l = 0; l < kHlrGroups; ++l) {
    for (std::size_t d = 0; d < kHlrFeatureDim; ++d) {
      double acc = 0.0;
      for (std::size_t k = 0; k < kHlrGroupDim; ++k) {
        acc += out.truth.mixing[d * kHlrGroupDim + k] *
               out.train.group_matrix[l * kHlrGroupDim + k];
      }
      out.truth.weights[l * kHlrFeatureDim + d] =
          acc + truth_stream.next_normal();
    }
  }

  rng_stream train_stream(split(root, 1));
  rng_stream test_stream(split(root, 2));
  out.train.records.reserve(n);
  out.test.records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto group = std::uint32_t(i % kHlrGroups);  // round-robin
    out.train.records.push_back(hlr_record(train_stream, out.truth, group));
    out.test.records.push_back(hlr_record(test_stream, out.truth, group));
  }
  return out;
}

gmm_data gen_gmm_data(std::size_t n, std::uint64_t seed) {
  if (n < kGmmComponents) {
    throw std::invalid_argument("need at least one point per cluster");
  }
  const rng_key root = split(seed_key(seed), 0x67'6d'6d);

  gmm_data out;
  out.train.feature_dim = out.test.feature_dim = kGmmDim;

  rng_stream truth_stream(split(root, 0));
  out.truth.means.resize(kGmmComponents * kGmmDim);
  for (double& v : out.truth.means) v = 3.0 * truth_stream.next_normal();
  out.truth.scale = 0.5;

  const std::vector<double> weights(kGmmComponents, 1.0 / kGmmComponents);
  const gaussian_mixture_dist mix(
      weights, out.truth.means,
      std::vector<double>(kGmmComponents, out.truth.scale), kGmmDim);

  rng_stream train_stream(split(root, 1));
  rng_stream test_stream(split(root, 2));
  out.train.records.reserve(n);
  out.test.records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.train.records.push_back({mix.sample(train_stream), 0.0, 0});
    out.test.records.push_back({mix.sample(test_stream), 0.0, 0});
  }
  return out;
}

logreg_data gen_logreg_separable(std::size_t n, std::uint64_t seed,
                                 double margin) {
  const rng_key root = split(seed_key(seed), 0x6c'72);
  logreg_data out;
  out.train.feature_dim = out.test.feature_dim = 1;
  rng_stream train_stream(split(root, 1));
  rng_stream test_stream(split(root, 2));
  auto draw = [&](rng_stream& s) {
    record r;
    r.y = s.next_uniform() < 0.5 ? 1.0 : 0.0;
    const double mag = margin + s.next_uniform();
    r.x = {r.y == 1.0 ? mag : -mag};
    return r;
  };
  for (std::size_t i = 0; i < n; ++i) {
    out.train.records.push_back(draw(train_stream));
    out.test.records.push_back(draw(test_stream));
  }
  return out;
}

}  // namespace dpvi
