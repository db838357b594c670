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
#include "dpvi/accountant.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace dpvi {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

// In-place iterative radix-2 FFT; n must be a power of two. The inverse
// transform includes the 1/n scaling.
void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle =
        (inverse ? 2.0 : -2.0) * std::numbers::pi / double(len);
    const std::complex<double> w_len(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> u = a[i + j];
        const std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= w_len;
      }
    }
  }
  if (inverse) {
    for (auto& x : a) x /= double(n);
  }
}

void check_grid(const pld_grid& grid) {
  require(grid.points >= (1u << 12), "grid needs at least 2^12 points");
  require(std::has_single_bit(grid.points), "grid points must be a power of two");
  require(grid.half_width > 0.0, "grid half-width must be positive");
}

// x with privacy loss log(mu'(x)/mu(x)) equal to `loss`, where
// mu = N(0, s^2) and mu' = (1-q) mu + q N(1, s^2). The loss is increasing in
// x with range (log(1-q), inf); below the range the inverse is -inf.
double loss_inverse(double loss, double sigma, double q) {
  const double num = std::expm1(loss) + q;  // e^loss - (1 - q)
  if (num <= 0.0) return -kInf;
  return sigma * sigma * std::log1p(std::expm1(loss) / q) + 0.5;
}

double mixture_cdf(double x, double sigma, double q) {
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  return (1.0 - q) * standard_normal_cdf(x / sigma) +
         q * standard_normal_cdf((x - 1.0) / sigma);
}

double base_cdf(double x, double sigma) {
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  return standard_normal_cdf(x / sigma);
}

pld point_mass_at_zero(const pld_grid& grid) {
  pld out;
  out.grid_origin = -grid.half_width;
  out.grid_step = 2.0 * grid.half_width / double(grid.points);
  out.mass.assign(grid.points, 0.0);
  out.mass[grid.points / 2] = 1.0;  // loss exactly zero
  return out;
}

// delta(eps) evaluator with suffix sums so bisection is cheap. Suffix
// accumulation runs from the far tail, so small tail sums never absorb the
// bulk mass.
struct delta_curve {
  explicit delta_curve(const pld& dist)
      : origin(dist.grid_origin),
        step(dist.grid_step),
        inf_mass(dist.inf_mass),
        tail_mass(dist.mass.size() + 1, 0.0),
        tail_weighted(dist.mass.size() + 1, 0.0) {
    const std::size_t n = dist.mass.size();
    for (std::size_t i = n; i-- > 0;) {
      const double loss = origin + double(i) * step;
      tail_mass[i] = tail_mass[i + 1] + dist.mass[i];
      tail_weighted[i] = tail_weighted[i + 1] + dist.mass[i] * std::exp(-loss);
    }
  }

  double operator()(double epsilon) const {
    // k = first cell with loss_k > epsilon.
    const std::size_t n = tail_mass.size() - 1;
    const double pos = std::floor((epsilon - origin) / step);
    std::size_t k = pos < 0.0 ? 0 : std::min(n, std::size_t(pos));
    while (k > 0 && origin + double(k - 1) * step > epsilon) --k;
    while (k < n && origin + double(k) * step <= epsilon) ++k;
    return inf_mass + tail_mass[k] - std::exp(epsilon) * tail_weighted[k];
  }

  double origin, step, inf_mass;
  std::vector<double> tail_mass, tail_weighted;
};

double epsilon_one_direction(const mechanism_params& p, const pld_grid& grid,
                             adjacency dir, double delta) {
  const pld single = pld_subsampled_gaussian(p, grid, dir, delta / 10.0);
  return get_epsilon(compose(single, p.compositions), delta);
}

// Mean, standard deviation and support edges of the single-step loss under
// the sampling distribution of one adjacency direction, by midpoint
// quadrature. Only used to size grids, so moderate accuracy is plenty.
struct loss_moments {
  double mean = 0.0;
  double stddev = 0.0;
  double edge = 0.0;  // largest |loss| within +-9 sigma of the sources
};

loss_moments loss_moments_for(double sigma, double q, adjacency dir) {
  const double x_lo = -9.0 * sigma;
  const double x_hi = (dir == adjacency::add ? 1.0 : 0.0) + 9.0 * sigma;
  const std::size_t n = 1 << 16;
  const double dx = (x_hi - x_lo) / double(n);
  const double inv_two_s2 = 0.5 / (sigma * sigma);
  const double norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));

  double mass = 0.0, m1 = 0.0, m2 = 0.0, edge = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = x_lo + (double(i) + 0.5) * dx;
    // log((1-q) + q e^u) = log1p(q expm1(u)), u = (2x - 1) / (2 sigma^2)
    double loss = std::log1p(q * std::expm1((2.0 * x - 1.0) * inv_two_s2));
    if (dir == adjacency::remove) loss = -loss;
    const double g0 = std::exp(-x * x * inv_two_s2);
    const double g1 = std::exp(-(x - 1.0) * (x - 1.0) * inv_two_s2);
    const double density =
        dir == adjacency::add ? ((1.0 - q) * g0 + q * g1) * norm : g0 * norm;
    const double w = density * dx;
    mass += w;
    m1 += w * loss;
    m2 += w * loss * loss;
    edge = std::max(edge, std::abs(loss));
  }
  loss_moments out;
  out.mean = m1 / mass;
  out.stddev = std::sqrt(std::max(0.0, m2 / mass - out.mean * out.mean));
  out.edge = edge;
  return out;
}

}  // namespace

pld_grid choose_grid(const mechanism_params& p) {
  p.validate();
  if (p.q == 0.0) return {1.0, 1 << 12};

  double drift = 0.0, spread = 0.0, edge = 0.0, scale = kInf;
  for (adjacency dir : {adjacency::add, adjacency::remove}) {
    const loss_moments m = loss_moments_for(p.sigma, p.q, dir);
    drift = std::max(drift, double(p.compositions) * std::abs(m.mean));
    spread = std::max(spread,
                      std::sqrt(double(p.compositions)) * m.stddev);
    edge = std::max(edge, m.edge);
    if (m.stddev > 0.0) scale = std::min(scale, m.stddev);
  }
  pld_grid grid;
  grid.half_width = 1.5 * (drift + 12.0 * spread + edge) + 2.0;
  const double target_step =
      std::isfinite(scale) && scale > 0.0 ? scale / 8.0 : grid.half_width;
  double points = 2.0 * grid.half_width / target_step;
  std::size_t pts = 1 << 12;
  while (double(pts) < points && pts < (1u << 21)) pts <<= 1;
  grid.points = pts;
  return grid;
}

double standard_normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

void privacy_params::validate() const {
  require(epsilon > 0.0, "epsilon must be positive");
  require(delta > 0.0 && delta <= 1.0, "delta must be in (0, 1]");
}

void mechanism_params::validate() const {
  require(sigma > 0.0, "sigma must be positive");
  require(q >= 0.0 && q <= 1.0, "subsampling ratio must be in [0, 1]");
  require(compositions >= 1, "need at least one composition");
}

void pld::validate() const {
  double total = inf_mass;
  for (double m : mass) {
    if (m < 0.0) throw std::logic_error("negative probability mass");
    total += m;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::logic_error("privacy loss distribution mass drifted from 1");
  }
}

pld pld_subsampled_gaussian(const mechanism_params& p, const pld_grid& grid,
                            adjacency direction, double max_tail_mass) {
  p.validate();
  check_grid(grid);
  if (p.q == 0.0) return point_mass_at_zero(grid);

  pld out;
  out.grid_origin = -grid.half_width;
  out.grid_step = 2.0 * grid.half_width / double(grid.points);
  out.mass.assign(grid.points, 0.0);

  const std::size_t n = grid.points;
  const double step = out.grid_step;
  // Cell i collects losses in (edge_i, edge_{i+1}] with edges at half-steps,
  // i.e. nearest-cell assignment.
  const auto edge = [&](std::size_t i) {
    return out.grid_origin + (double(i) - 0.5) * step;
  };

  if (direction == adjacency::add) {
    // Loss under the mixture; increasing in x.
    double prev = mixture_cdf(loss_inverse(edge(0), p.sigma, p.q), p.sigma, p.q);
    out.below_grid_mass = prev;
    out.mass[0] = prev;  // clamp below-grid mass into the bottom cell
    for (std::size_t i = 0; i < n; ++i) {
      const double upper =
          mixture_cdf(loss_inverse(edge(i + 1), p.sigma, p.q), p.sigma, p.q);
      out.mass[i] += upper - prev;
      prev = upper;
    }
    out.inf_mass = 1.0 - prev;
  } else {
    // Loss under the base Gaussian is -log-ratio; decreasing in x, so cell i
    // maps to the x-interval [x(-edge_{i+1}), x(-edge_i)).
    double prev = base_cdf(loss_inverse(-edge(0), p.sigma, p.q), p.sigma);
    out.below_grid_mass = 1.0 - prev;
    out.mass[0] = 1.0 - prev;
    for (std::size_t i = 0; i < n; ++i) {
      const double lower =
          base_cdf(loss_inverse(-edge(i + 1), p.sigma, p.q), p.sigma);
      out.mass[i] += prev - lower;
      prev = lower;
    }
    out.inf_mass = prev;
  }

  if (out.inf_mass + out.below_grid_mass > max_tail_mass) {
    throw std::runtime_error(
        "privacy loss mass beyond the grid exceeds the budget; enlarge the "
        "grid");
  }
  out.validate();
  return out;
}

pld pld_subsampled_gaussian(const mechanism_params& p, const pld_grid& grid,
                            double max_tail_mass) {
  pld add = pld_subsampled_gaussian(p, grid, adjacency::add, max_tail_mass);
  const pld rem =
      pld_subsampled_gaussian(p, grid, adjacency::remove, max_tail_mass);
  // For the subsampled Gaussian pair the add direction dominates; probe a few
  // epsilons to guard the assumption rather than trust it silently.
  for (double eps : {0.0, grid.half_width / 16.0, grid.half_width / 4.0}) {
    if (get_delta(add, eps) + 1e-12 < get_delta(rem, eps)) {
      throw std::logic_error(
          "remove direction unexpectedly dominates; adjacency assumption "
          "violated");
    }
  }
  return add;
}

pld compose(const pld& base, std::size_t t) {
  require(t >= 1, "need at least one composition");
  base.validate();
  if (t == 1) return base;

  const std::size_t n = base.mass.size();
  require(std::has_single_bit(n), "composition needs a power-of-two grid");
  // The grid must place loss zero on a cell so rotation keeps the result
  // aligned; true by construction for symmetric grids.
  const double zero_pos = -base.grid_origin / base.grid_step;
  const auto zero_idx = std::size_t(std::llround(zero_pos));
  require(zero_idx < n && std::abs(zero_pos - double(zero_idx)) < 1e-6,
          "grid does not contain loss zero");

  // Rotate so loss zero sits at index 0; circular convolution then keeps the
  // distribution centred and wraparound only touches the far tails.
  std::vector<std::complex<double>> buf(n);
  for (std::size_t i = 0; i < n; ++i) {
    buf[i] = base.mass[(i + zero_idx) % n];
  }
  fft_inplace(buf, false);
  for (auto& z : buf) z = std::pow(z, double(t));
  fft_inplace(buf, true);

  pld out;
  out.grid_origin = base.grid_origin;
  out.grid_step = base.grid_step;
  out.mass.resize(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double v = buf[(i + n - zero_idx) % n].real();
    if (v < -1e-12) {
      throw std::runtime_error("fft composition produced a negative mass");
    }
    v = std::max(v, 0.0);
    out.mass[i] = v;
    total += v;
  }
  // P(all t losses finite) = (1 - inf_mass)^t.
  const double finite_mass = std::exp(double(t) * std::log1p(-base.inf_mass));
  out.inf_mass = 1.0 - finite_mass;
  const double drift = std::abs(total - finite_mass);
  if (drift > 1e-6) {
    throw std::runtime_error("fft composition lost probability mass");
  }
  if (total > 0.0) {
    const double scale = finite_mass / total;
    for (double& v : out.mass) v *= scale;
  }
  out.validate();
  return out;
}

double get_delta(const pld& dist, double epsilon) {
  dist.validate();
  return delta_curve(dist)(epsilon);
}

double get_epsilon(const pld& dist, double delta) {
  require(delta > 0.0 && delta < 1.0, "delta must be in (0, 1)");
  dist.validate();
  if (dist.inf_mass > delta) {
    throw std::runtime_error(
        "target delta is unattainable on this grid (infinite-loss mass "
        "exceeds it)");
  }
  const delta_curve curve(dist);
  if (curve(0.0) <= delta) return 0.0;
  double lo = 0.0;
  double hi = dist.grid_origin + double(dist.mass.size() - 1) * dist.grid_step;
  // delta(eps) is nonincreasing, so plain bisection closes in on the
  // smallest admissible epsilon.
  for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (curve(mid) <= delta) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

epsilon_report compute_epsilon(const mechanism_params& p, double delta,
                               const accountant_options& options) {
  p.validate();
  require(delta > 0.0 && delta < 1.0, "delta must be in (0, 1)");

  pld_grid grid = options.grid.points == 0 ? choose_grid(p) : options.grid;
  epsilon_report report;
  double prev = kInf;
  std::string last_error;
  for (int round = 0; round <= options.max_refinements; ++round) {
    try {
      report.epsilon_add =
          epsilon_one_direction(p, grid, adjacency::add, delta);
      report.epsilon_remove =
          epsilon_one_direction(p, grid, adjacency::remove, delta);
    } catch (const std::runtime_error& e) {
      // Off-grid tail mass or unattainable delta on this grid; retry wider.
      last_error = e.what();
      prev = kInf;
      grid.half_width *= 2.0;
      grid.points *= 2;
      continue;
    }
    report.epsilon = std::max(report.epsilon_add, report.epsilon_remove);
    report.grid_points = grid.points;
    const double tol = std::max(options.refine_tolerance,
                                options.refine_tolerance * report.epsilon);
    if (std::abs(report.epsilon - prev) < tol) {
      return report;
    }
    prev = report.epsilon;
    grid.half_width *= 2.0;
    grid.points *= 2;
    if (grid.points > (1u << 22)) break;  // refuse runaway grids
  }
  throw std::runtime_error(
      last_error.empty()
          ? "accountant did not stabilize under grid refinement"
          : "accountant did not stabilize under grid refinement: " +
                last_error);
}

double approximate_sigma(const privacy_params& target, double q,
                         std::size_t compositions,
                         const accountant_options& options) {
  target.validate();
  double lo = 0.3, hi = 100.0;

  mechanism_params p{hi, q, compositions};
  if (compute_epsilon(p, target.delta, options).epsilon > target.epsilon) {
    throw std::runtime_error(
        "privacy target infeasible within the sigma search bracket");
  }
  // Epsilon is decreasing in sigma; shrink the bracket geometrically until
  // the returned value is within half a percent of the tight one. Only
  // midpoints are evaluated: the low end's epsilon can be astronomically
  // large and is never needed.
  while (hi / lo > 1.005) {
    const double mid = std::sqrt(lo * hi);
    p.sigma = mid;
    if (compute_epsilon(p, target.delta, options).epsilon <= target.epsilon) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

}  // namespace dpvi
