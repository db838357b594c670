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
#ifndef DPVI_DATA_HPP
#define DPVI_DATA_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace dpvi {

// One row of tabular data. `x` is the feature vector (or, for mixture
// models, the observed point); `y` a binary label and `group` a group index
// where the model uses them.
struct record {
  std::vector<double> x;
  double y = 0.0;
  std::uint32_t group = 0;
};

struct dataset {
  std::vector<record> records;
  std::size_t feature_dim = 0;
  std::size_t n_groups = 0;    // 0 when the model has no grouping
  std::size_t group_dim = 0;   // K, width of the group matrix
  std::vector<double> group_matrix;  // n_groups x group_dim, row-major

  std::size_t size() const { return records.size(); }
};

// CSV layout: one record per row, feature columns first, then the label,
// then the group index when `with_groups` is set. The group matrix lives in
// its own CSV of n_groups rows.
void save_dataset_csv(const std::string& path, const dataset& data,
                      bool with_label, bool with_groups);
dataset load_dataset_csv(const std::string& path, std::size_t feature_dim,
                         bool with_label, bool with_groups);
void save_matrix_csv(const std::string& path,
                     const std::vector<double>& values, std::size_t cols);
std::vector<double> load_matrix_csv(const std::string& path,
                                    std::size_t* cols_out);

// --- Synthetic data ------------------------------------------------------
//
// The generators are versioned: evaluation thresholds elsewhere in the
// project are calibrated against this exact generation recipe.
inline constexpr const char* kGeneratorVersion = "gen-v1";

// Grouped logistic data: 5-dim features, 3 groups described by 3 variables.
// Group descriptors and the mixing matrix have standard normal entries, the
// per-group weights are M g_l plus unit noise, and labels are Bernoulli in
// the per-group logit. Train and test are equal-size draws from one truth.
struct hlr_truth {
  std::vector<double> mixing;   // D x K
  std::vector<double> weights;  // L x D
};

struct hlr_data {
  dataset train;
  dataset test;
  hlr_truth truth;
};

hlr_data gen_hlr_data(std::size_t n, std::uint64_t seed);

// 2-d points from five spherical Gaussian clusters; cluster centers are
// N(0, 3^2 I), common scale 0.5, equal weights. Equal-size held-out split.
struct gmm_truth {
  std::vector<double> means;  // 5 x 2
  double scale = 0.5;
};

struct gmm_data {
  dataset train;
  dataset test;
  gmm_truth truth;
};

gmm_data gen_gmm_data(std::size_t n, std::uint64_t seed);

// Linearly separable one-dimensional labels for convergence checks: features
// are uniform on [margin, 1+margin] with the sign matching the label.
struct logreg_data {
  dataset train;
  dataset test;
};

logreg_data gen_logreg_separable(std::size_t n, std::uint64_t seed,
                                 double margin = 0.2);

inline constexpr std::size_t kHlrFeatureDim = 5;
inline constexpr std::size_t kHlrGroups = 3;
inline constexpr std::size_t kHlrGroupDim = 3;
inline constexpr std::size_t kGmmComponents = 5;
inline constexpr std::size_t kGmmDim = 2;

}  // namespace dpvi

#endif  // DPVI_DATA_HPP
