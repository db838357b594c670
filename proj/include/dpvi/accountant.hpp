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
#ifndef DPVI_ACCOUNTANT_HPP
#define DPVI_ACCOUNTANT_HPP

#include <cstddef>
#include <limits>
#include <vector>

namespace dpvi {

struct privacy_params {
  double epsilon = 1.0;
  double delta = 1e-5;

  void validate() const;  // epsilon > 0, delta in (0, 1]
};

struct mechanism_params {
  double sigma = 1.0;           // noise multiplier (sensitivity-1 units)
  double q = 1.0;               // subsampling ratio in [0, 1]
  std::size_t compositions = 1;  // T

  void validate() const;
};

struct pld_grid {
  double half_width = 30.0;      // losses covered: [-L, L)
  std::size_t points = 1 << 17;  // power of two, >= 2^12
};

// Sizes a grid to the mechanism: the range covers the composed loss drift
// plus twelve standard deviations and the single-step extremes, and the step
// resolves the single-step loss scale. A fixed wide grid starves resolution
// when per-step losses are far smaller than its step (large sigma, many
// compositions), which shows up as non-converging refinement.
pld_grid choose_grid(const mechanism_params& p);

// Which dataset of the neighbouring pair the outputs are drawn from:
//   add    - outputs of the dataset containing the extra record,
//            i.e. the (1-q) N(0, s^2) + q N(1, s^2) mixture,
//   remove - outputs of the smaller dataset, plain N(0, s^2).
enum class adjacency { add, remove };

// Discretized privacy loss distribution on the regular grid
// loss_i = grid_origin + i * grid_step. `inf_mass` is probability of an
// unbounded (always-violating) loss; mass falling below the grid is folded
// into cell 0 and tracked in below_grid_mass for diagnostics.
struct pld {
  double grid_origin = 0.0;
  double grid_step = 0.0;
  std::vector<double> mass;
  double inf_mass = 0.0;
  double below_grid_mass = 0.0;

  void validate() const;  // mass + inf_mass within 1e-9 of 1
};

// Single-application loss distribution of the subsampled Gaussian pair, with
// each loss value assigned to its nearest grid cell. Mass beyond the top of
// the grid is pessimistically moved to inf_mass. Throws if the off-grid mass
// exceeds `max_tail_mass`.
pld pld_subsampled_gaussian(
    const mechanism_params& p, const pld_grid& grid, adjacency direction,
    double max_tail_mass = std::numeric_limits<double>::infinity());

// Both adjacency directions computed, the dominating one retained. For this
// mechanism the add direction's delta(eps) curve dominates at every eps >= 0,
// which the probe inside asserts.
pld pld_subsampled_gaussian(
    const mechanism_params& p, const pld_grid& grid,
    double max_tail_mass = std::numeric_limits<double>::infinity());

// T-fold self-composition: forward FFT, pointwise T-th power, inverse FFT.
// Tiny negative artifacts are zeroed and the mass renormalized; inf_mass
// composes as 1 - (1 - inf_mass)^T.
pld compose(const pld& base, std::size_t t);

// Smallest eps with
//   delta(eps) = inf_mass + sum_{loss_i > eps} (1 - e^(eps - loss_i)) mass_i
// at or below `delta`, located by bisection. Throws when even the largest
// representable loss cannot reach `delta` (inf_mass > delta).
double get_epsilon(const pld& dist, double delta);

// delta(eps) itself, mostly for oracles and diagnostics.
double get_delta(const pld& dist, double epsilon);

struct accountant_options {
  // points == 0 requests choose_grid() sizing (the default).
  pld_grid grid{0.0, 0};
  double refine_tolerance = 1e-3;  // stop once doubling moves eps less
  int max_refinements = 5;
};

struct epsilon_report {
  double epsilon = 0.0;
  double epsilon_add = 0.0;
  double epsilon_remove = 0.0;
  std::size_t grid_points = 0;
  int directions = 2;
};

// End-to-end accountant: composes both adjacency directions and reports the
// worse epsilon, refining the grid (doubling half-width and points) until
// the value is stable.
epsilon_report compute_epsilon(const mechanism_params& p, double delta,
                               const accountant_options& options = {});

// Calibrates the noise multiplier: the smallest sigma in [0.3, 100] (up to a
// 0.5% bracket) whose accounted epsilon is at or below the target. Throws if
// the target is infeasible even at sigma = 100.
double approximate_sigma(const privacy_params& target, double q,
                         std::size_t compositions,
                         const accountant_options& options = {});

double standard_normal_cdf(double x);

}  // namespace dpvi

#endif  // DPVI_ACCOUNTANT_HPP
