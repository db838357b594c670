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
#ifndef DPVI_GUIDE_HPP
#define DPVI_GUIDE_HPP

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dpvi {

// How an unconstrained parameter maps to its constrained report:
//   identity        - passes through,
//   exp_positive    - elementwise exp, yielding positive values,
//   simplex_softmax - softmax with an implicit pinned zero as the last
//                     coordinate, mapping R^{K-1} onto the K-simplex.
enum class transform_kind { identity, exp_positive, simplex_softmax };

std::vector<double> apply_transform(transform_kind kind,
                                    std::span<const double> unconstrained);

// Softmax of [v, 0]; the pinned coordinate makes the map one-to-one.
std::vector<double> softmax_pinned(std::span<const double> v);

// Named unconstrained variational parameters. Optimizers work on the
// flattened unconstrained vector; constrained views are for reporting and
// downstream model use.
struct guide_entry {
  std::string name;
  std::vector<double> unconstrained;
  transform_kind transform = transform_kind::identity;
};

struct guide_params {
  std::vector<guide_entry> entries;

  std::size_t dim() const;
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> flat);

  const guide_entry& at(std::string_view name) const;
  std::vector<double> constrained(std::string_view name) const;
};

struct named_values {
  std::string name;
  std::vector<double> values;
};

// Constrained view of every entry, in entry order.
std::vector<named_values> constrained_params(const guide_params& psi);

}  // namespace dpvi

#endif  // DPVI_GUIDE_HPP
