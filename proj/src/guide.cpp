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
#include "dpvi/guide.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dpvi {

std::vector<double> softmax_pinned(std::span<const double> v) {
  std::vector<double> out(v.size() + 1);
  double m = 0.0;  // the pinned coordinate
  for (double x : v) m = std::max(m, x);
  double total = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    out[j] = std::exp(v[j] - m);
    total += out[j];
  }
  out[v.size()] = std::exp(-m);
  total += out[v.size()];
  for (double& x : out) x /= total;
  return out;
}

std::vector<double> apply_transform(transform_kind kind,
                                    std::span<const double> unconstrained) {
  switch (kind) {
    case transform_kind::identity:
      return {unconstrained.begin(), unconstrained.end()};
    case transform_kind::exp_positive: {
      std::vector<double> out(unconstrained.size());
      for (std::size_t j = 0; j < out.size(); ++j) {
        out[j] = std::exp(unconstrained[j]);
      }
      return out;
    }
    case transform_kind::simplex_softmax:
      return softmax_pinned(unconstrained);
  }
  throw std::logic_error("unknown transform");
}

std::size_t guide_params::dim() const {
  std::size_t total = 0;
  for (const auto& e : entries) total += e.unconstrained.size();
  return total;
}

std::vector<double> guide_params::flatten() const {
  std::vector<double> flat;
  flat.reserve(dim());
  for (const auto& e : entries) {
    flat.insert(flat.end(), e.unconstrained.begin(), e.unconstrained.end());
  }
  return flat;
}

void guide_params::unflatten(std::span<const double> flat) {
  if (flat.size() != dim()) {
    throw std::invalid_argument("unflatten: dimension mismatch");
  }
  std::size_t k = 0;
  for (auto& e : entries) {
    for (double& v : e.unconstrained) v = flat[k++];
  }
}

const guide_entry& guide_params::at(std::string_view name) const {
  for (const auto& e : entries) {
    if (e.name == name) return e;
  }
  throw std::invalid_argument("no guide entry named '" + std::string(name) +
                              "'");
}

std::vector<double> guide_params::constrained(std::string_view name) const {
  const guide_entry& e = at(name);
  return apply_transform(e.transform, e.unconstrained);
}

std::vector<named_values> constrained_params(const guide_params& psi) {
  std::vector<named_values> out;
  out.reserve(psi.entries.size());
  for (const auto& e : psi.entries) {
    out.push_back({e.name, apply_transform(e.transform, e.unconstrained)});
  }
  return out;
}

}  // namespace dpvi
