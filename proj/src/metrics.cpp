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
#include "dpvi/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "dpvi/distributions.hpp"

namespace dpvi {

double auc(std::span<const double> scores, std::span<const double> labels) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw std::invalid_argument("scores and labels must match and be nonempty");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  // Average ranks over tie groups, then the rank-sum of the positives.
  std::size_t positives = 0;
  double positive_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * double(i + 1 + j);  // ranks are 1-based
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1.0) {
        ++positives;
        positive_rank_sum += avg_rank;
      } else if (labels[order[k]] != 0.0) {
        throw std::invalid_argument("labels must be 0 or 1");
      }
    }
    i = j;
  }
  const std::size_t negatives = scores.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw std::invalid_argument("both classes must be present");
  }
  const double u = positive_rank_sum -
                   double(positives) * double(positives + 1) / 2.0;
  return u / (double(positives) * double(negatives));
}

double gmm_test_loglik(const guide_params& psi, const dataset& test) {
  if (test.records.empty()) {
    throw std::invalid_argument("empty test set");
  }
  const std::vector<double> pis = psi.constrained("pis_loc");
  const std::vector<double> locs = psi.at("locs_loc").unconstrained;
  const std::vector<double> scales = psi.constrained("scales_log_loc");
  double total = 0.0;
  for (const record& r : test.records) {
    total += gmm_log_prob(pis, locs, scales, r.x);
  }
  return total / double(test.records.size());
}

linear_fit fit_line(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw std::invalid_argument("need at least two points");
  }
  const double n = double(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
    syy += ys[i] * ys[i];
  }
  const double var_x = sxx - sx * sx / n;
  const double var_y = syy - sy * sy / n;
  const double cov = sxy - sx * sy / n;
  linear_fit fit;
  fit.slope = cov / var_x;
  fit.intercept = (sy - fit.slope * sx) / n;
  fit.r_squared = var_y > 0.0 ? (cov * cov) / (var_x * var_y) : 1.0;
  return fit;
}

}  // namespace dpvi
