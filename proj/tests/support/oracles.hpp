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
//
// Independent reference computations the tests check the implementation
// against. Nothing here may call into the code paths under test.
#ifndef DPVI_TESTS_SUPPORT_ORACLES_HPP
#define DPVI_TESTS_SUPPORT_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

namespace oracles {

// Central finite differences of a scalar function of a vector.
inline std::vector<double> finite_difference_gradient(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> x, double h = 1e-5) {
  std::vector<double> point(x.begin(), x.end());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = point[i];
    point[i] = orig + h;
    const double up = f(point);
    point[i] = orig - h;
    const double down = f(point);
    point[i] = orig;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

// One-sample Kolmogorov-Smirnov statistic against a cdf.
inline double ks_statistic(std::vector<double> samples,
                           const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = double(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double c = cdf(samples[i]);
    d = std::max(d, std::abs(double(i + 1) / n - c));
    d = std::max(d, std::abs(c - double(i) / n));
  }
  return d;
}

// Asymptotic one-sample KS critical value at 1% significance.
inline double ks_critical_1pct(std::size_t n) {
  return 1.62762 / std::sqrt(double(n));
}

// Upper-tail chi-square critical values at 1% significance for the degrees
// of freedom the tests use (R: qchisq(0.99, df)).
inline double chi_square_critical_1pct(std::size_t dof) {
  static const std::map<std::size_t, double> table = {
      {19, 36.19087},  {119, 157.8000}, {4, 13.27670},
  };
  const auto it = table.find(dof);
  if (it == table.end()) throw std::invalid_argument("missing chi^2 entry");
  return it->second;
}

// Pearson statistic of observed counts against expected counts.
inline double chi_square_stat(std::span<const std::uint64_t> observed,
                              std::span<const double> expected) {
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double diff = double(observed[i]) - expected[i];
    stat += diff * diff / expected[i];
  }
  return stat;
}

// Two-sample chi-square for equal-size samples over the same cells.
inline double chi_square_two_sample(std::span<const std::uint64_t> a,
                                    std::span<const std::uint64_t> b) {
  double stat = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double total = double(a[i] + b[i]);
    if (total == 0.0) continue;
    const double diff = double(a[i]) - double(b[i]);
    stat += diff * diff / total;
  }
  return stat;
}

// Brute-force AUC: fraction of (positive, negative) pairs ranked correctly,
// half credit for ties.
inline double pairwise_auc(std::span<const double> scores,
                           std::span<const double> labels) {
  double wins = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1.0) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0.0) continue;
      ++pairs;
      if (scores[i] > scores[j]) {
        wins += 1.0;
      } else if (scores[i] == scores[j]) {
        wins += 0.5;
      }
    }
  }
  if (pairs == 0) throw std::invalid_argument("need both classes");
  return wins / double(pairs);
}

// Exact delta(eps) of the Gaussian mechanism with sensitivity 1 and noise
// standard deviation sigma.
inline double gaussian_mechanism_delta(double epsilon, double sigma) {
  const auto phi = [](double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); };
  return phi(0.5 / sigma - epsilon * sigma) -
         std::exp(epsilon) * phi(-0.5 / sigma - epsilon * sigma);
}

// Epsilon of the Gaussian mechanism for a target delta, by bisection on the
// closed-form delta curve.
inline double gaussian_mechanism_epsilon(double delta, double sigma) {
  double lo = 0.0, hi = 200.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (gaussian_mechanism_delta(mid, sigma) <= delta) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

// Moments-accountant style upper bound for the subsampled Gaussian composed
// T times: integer-order Renyi divergences of the mixture pair converted to
// (eps, delta). Deliberately looser than the loss-distribution accountant.
inline double rdp_epsilon_upper_bound(double sigma, double q, std::size_t t,
                                      double delta) {
  double best = std::numeric_limits<double>::infinity();
  for (int alpha = 2; alpha <= 256; ++alpha) {
    double rdp;
    if (q >= 1.0) {
      rdp = double(alpha) / (2.0 * sigma * sigma);
    } else {
      // log sum_k C(alpha,k) (1-q)^(alpha-k) q^k exp(k(k-1)/(2 sigma^2))
      std::vector<double> terms(std::size_t(alpha) + 1);
      for (int k = 0; k <= alpha; ++k) {
        const double log_binom = std::lgamma(alpha + 1.0) -
                                 std::lgamma(k + 1.0) -
                                 std::lgamma(alpha - k + 1.0);
        terms[std::size_t(k)] = log_binom + (alpha - k) * std::log1p(-q) +
                                k * std::log(q) +
                                (double(k) * (k - 1.0)) / (2.0 * sigma * sigma);
      }
      double m = terms[0];
      for (double v : terms) m = std::max(m, v);
      double acc = 0.0;
      for (double v : terms) acc += std::exp(v - m);
      rdp = (m + std::log(acc)) / (alpha - 1.0);
    }
    const double eps =
        double(t) * rdp + std::log(1.0 / delta) / (alpha - 1.0);
    best = std::min(best, eps);
  }
  return best;
}

// Minimal k-means for generator sanity checks.
struct kmeans_result {
  std::vector<double> centers;  // k x dim
  std::vector<std::size_t> assignment;
};

inline kmeans_result kmeans(std::span<const double> points, std::size_t dim,
                            std::size_t k, std::size_t iters = 50) {
  const std::size_t n = points.size() / dim;
  kmeans_result res;
  res.centers.assign(k * dim, 0.0);
  // Deterministic spread-out start: k points maximizing pairwise distance
  // greedily from point 0.
  std::vector<std::size_t> seeds = {0};
  while (seeds.size() < k) {
    std::size_t best = 0;
    double best_d = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      double nearest = std::numeric_limits<double>::infinity();
      for (std::size_t s : seeds) {
        double d = 0.0;
        for (std::size_t c = 0; c < dim; ++c) {
          const double diff = points[i * dim + c] - points[s * dim + c];
          d += diff * diff;
        }
        nearest = std::min(nearest, d);
      }
      if (nearest > best_d) {
        best_d = nearest;
        best = i;
      }
    }
    seeds.push_back(best);
  }
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t c = 0; c < dim; ++c) {
      res.centers[j * dim + c] = points[seeds[j] * dim + c];
    }
  }

  res.assignment.assign(n, 0);
  for (std::size_t it = 0; it < iters; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < k; ++j) {
        double d = 0.0;
        for (std::size_t c = 0; c < dim; ++c) {
          const double diff = points[i * dim + c] - res.centers[j * dim + c];
          d += diff * diff;
        }
        if (d < best_d) {
          best_d = d;
          res.assignment[i] = j;
        }
      }
    }
    std::vector<double> sums(k * dim, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[res.assignment[i]];
      for (std::size_t c = 0; c < dim; ++c) {
        sums[res.assignment[i] * dim + c] += points[i * dim + c];
      }
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] == 0) continue;
      for (std::size_t c = 0; c < dim; ++c) {
        res.centers[j * dim + c] = sums[j * dim + c] / double(counts[j]);
      }
    }
  }
  return res;
}

// Mean silhouette coefficient of a clustering.
inline double mean_silhouette(std::span<const double> points, std::size_t dim,
                              const kmeans_result& clustering, std::size_t k) {
  const std::size_t n = points.size() / dim;
  const auto dist = [&](std::size_t a, std::size_t b) {
    double d = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
      const double diff = points[a * dim + c] - points[b * dim + c];
      d += diff * diff;
    }
    return std::sqrt(d);
  };
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> mean_d(k, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      mean_d[clustering.assignment[j]] += dist(i, j);
      ++counts[clustering.assignment[j]];
    }
    const std::size_t own = clustering.assignment[i];
    double a = counts[own] > 0 ? mean_d[own] / double(counts[own]) : 0.0;
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k; ++j) {
      if (j == own || counts[j] == 0) continue;
      b = std::min(b, mean_d[j] / double(counts[j]));
    }
    total += (b - a) / std::max(a, b);
  }
  return total / double(n);
}

}  // namespace oracles

#endif  // DPVI_TESTS_SUPPORT_ORACLES_HPP
