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
#ifndef DPVI_METRICS_HPP
#define DPVI_METRICS_HPP

#include <span>

#include "dpvi/data.hpp"
#include "dpvi/guide.hpp"

namespace dpvi {

// Area under the ROC curve via the Mann-Whitney rank statistic, with half
// credit for tied scores. Requires both classes to be present.
double auc(std::span<const double> scores, std::span<const double> labels);

// Mean held-out log-density of the mixture at the variational-mean
// (constrained) parameters.
double gmm_test_loglik(const guide_params& psi, const dataset& test);

struct linear_fit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

linear_fit fit_line(std::span<const double> xs, std::span<const double> ys);

}  // namespace dpvi

#endif  // DPVI_METRICS_HPP
