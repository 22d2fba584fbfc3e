// Copyright 2026 The cluster-forge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "cluster_forge/montecarlo.hpp"
#include "cluster_forge/parallel.hpp"

#include <boost/math/distributions/binomial.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cluster_forge {

/**
 * An n x n cluster woven from n cross-chains of m = round(a n) edges each.
 * Every cross-chain has m attempts to collect its n successful fusions.
 */
struct WeaveParameters {
  std::uint64_t n = 1;
  double a = 2;
  double p = 0.5;

  void validate() const {
    if (n < 1) throw std::invalid_argument("cluster side n must be at least 1");
    if (!(a > 1)) throw std::invalid_argument("overhead factor a must exceed 1");
    if (!(p > 0 && p <= 1)) throw std::domain_error("success probability must lie in (0, 1]");
  }

  /// Attempt budget per cross-chain, a n rounded to the nearest integer.
  std::uint64_t attempts() const {
    return static_cast<std::uint64_t>(std::llround(a * static_cast<double>(n)));
  }
};

/// log P(at least n successes in m Bernoulli(p) trials).
inline double log_binomial_tail(std::uint64_t n, std::uint64_t m, double p) {
  if (n == 0) return 0;
  if (n > m) return -std::numeric_limits<double>::infinity();
  if (p >= 1) return 0;
  namespace bm = boost::math;
  const bm::binomial dist(static_cast<double>(m), p);
  const double below = bm::cdf(dist, static_cast<double>(n - 1));
  if (below < 0.5) return std::log1p(-below);
  return std::log(bm::cdf(bm::complement(dist, static_cast<double>(n - 1))));
}

/// Log of the single cross-chain success probability, binomial upper-tail form.
inline double log_single_chain_probability(const WeaveParameters& w) {
  w.validate();
  return log_binomial_tail(w.n, w.attempts(), w.p);
}

inline double single_chain_weave_probability(const WeaveParameters& w) {
  return std::exp(log_single_chain_probability(w));
}

/**
 * Same probability as a negative-binomial sum: p^n sum_{k=0}^{m-n}
 * (1-p)^k C(n+k-1, k), the chance that the n-th success arrives within m
 * attempts. Summed in log space.
 */
inline double single_chain_probability_negative_binomial(const WeaveParameters& w) {
  w.validate();
  const std::uint64_t m = w.attempts();
  if (m < w.n) return 0;
  if (w.p >= 1) return 1;
  const double n = static_cast<double>(w.n);
  const double lp = std::log(w.p), lq = std::log1p(-w.p);
  std::vector<double> terms;
  terms.reserve(m - w.n + 1);
  for (std::uint64_t k = 0; k <= m - w.n; ++k) {
    const double kk = static_cast<double>(k);
    terms.push_back(n * lp + kk * lq + std::lgamma(n + kk) - std::lgamma(kk + 1) - std::lgamma(n));
  }
  const double top = *std::max_element(terms.begin(), terms.end());
  double sum = 0;
  for (double t : terms) sum += std::exp(t - top);
  return std::exp(top + std::log(sum));
}

/// log of pi_s(n)^n.
inline double log_overall_success_probability(const WeaveParameters& w) {
  return static_cast<double>(w.n) * log_single_chain_probability(w);
}

/// Probability that all n cross-chains succeed.
inline double overall_success_probability(const WeaveParameters& w) {
  return std::exp(log_overall_success_probability(w));
}

/**
 * 1 - exp(-2 (m p - n + 1)^2 / m), a lower bound on the single-chain
 * probability. Only meaningful when a p > 1.
 */
inline double hoeffding_bound(const WeaveParameters& w) {
  w.validate();
  if (!(w.a * w.p > 1)) {
    throw std::domain_error("Hoeffding bound needs a > 1/p_s");
  }
  const double m = static_cast<double>(w.attempts());
  const double t = m * w.p - static_cast<double>(w.n) + 1;
  return -std::expm1(-2 * t * t / m);
}

// ---------------------------------------------------------------------------
// Resources
// ---------------------------------------------------------------------------

/// Input edges, in double-edge units.
struct WeaveResources {
  std::uint64_t cross_chains = 0;  // n chains of m edges
  std::uint64_t thread = 0;        // one chain of n (l + 1) edges, l = m - n
  std::uint64_t total = 0;
  /// Extra edges for the redundantly encoded crossing qubits, 2 n^2. Not part of total.
  std::uint64_t redundant_encoding = 0;
};

inline WeaveResources weave_resources(const WeaveParameters& w) {
  w.validate();
  const std::uint64_t m = w.attempts();
  WeaveResources r;
  r.cross_chains = w.n * m;
  r.thread = w.n * (m - w.n + 1);
  r.total = r.cross_chains + r.thread;
  r.redundant_encoding = 2 * w.n * w.n;
  return r;
}

inline std::uint64_t resource_count(const WeaveParameters& w) { return weave_resources(w).total; }

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("slope fit needs at least two matching points");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0 && y[i] > 0)) throw std::domain_error("log-log fit needs positive data");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double k = static_cast<double>(x.size());
  const double denom = k * sxx - sx * sx;
  if (denom == 0) throw std::domain_error("log-log fit needs distinct x values");
  return (k * sxy - sx * sy) / denom;
}

/// Slope of log resource_count against log n over `sides` at fixed a.
inline double resource_scaling_exponent(double a, const std::vector<std::uint64_t>& sides) {
  std::vector<double> x, y;
  for (std::uint64_t n : sides) {
    x.push_back(static_cast<double>(n));
    y.push_back(static_cast<double>(resource_count({n, a, 0.5})));
  }
  return loglog_slope(x, y);
}

// ---------------------------------------------------------------------------
// Percolation scan
// ---------------------------------------------------------------------------

enum class Trend { increasing, decreasing, mixed, none, critical };

inline std::string to_string(Trend t) {
  switch (t) {
    case Trend::increasing: return "increasing";
    case Trend::decreasing: return "decreasing";
    case Trend::mixed: return "mixed";
    case Trend::none: return "none";
    case Trend::critical: return "critical";
  }
  return "?";
}

/// Scanned parameter: p_s at fixed a, or a at fixed p_s.
enum class ScanAxis { success_probability, overhead };

struct ScanPoint {
  double value = 0;  // grid value on the scanned axis
  double a = 0;
  double p = 0;
  std::vector<double> log_success;  // log P_s(n), one per n in the list
  Trend trend = Trend::none;
};

struct PercolationScan {
  ScanAxis axis = ScanAxis::success_probability;
  double fixed = 0;
  std::vector<std::uint64_t> sides;
  std::vector<ScanPoint> points;
  /// Expected crossover on the scanned axis: 1/a for a p_s scan, 1/p_s for an a scan.
  double threshold = 0;
  /// Largest grid value with a decreasing trend and smallest with an increasing one.
  std::optional<double> last_decreasing, first_increasing;

  bool has_bracket() const {
    return last_decreasing && first_increasing && *last_decreasing < *first_increasing;
  }
  bool bracket_contains_threshold() const {
    return has_bracket() && *last_decreasing <= threshold && threshold <= *first_increasing;
  }
};

/// Trend of a sequence, compared in log space. Flat or single-entry sequences have none.
inline Trend classify_trend(const std::vector<double>& values) {
  if (values.size() < 2) return Trend::none;
  bool up = true, down = true;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (!(values[i] > values[i - 1])) up = false;
    if (!(values[i] < values[i - 1])) down = false;
  }
  if (up) return Trend::increasing;
  if (down) return Trend::decreasing;
  bool flat = true;
  for (double v : values) flat = flat && v == values.front();
  return flat ? Trend::none : Trend::mixed;
}

/**
 * P_s(n) over a one-dimensional grid. A grid point whose a p_s equals 1 (to
 * within 1e-12) is marked critical and excluded from the crossover bracket.
 */
inline PercolationScan percolation_scan(ScanAxis axis, double fixed, std::vector<double> grid,
                                        std::vector<std::uint64_t> sides) {
  if (grid.empty()) throw std::invalid_argument("percolation scan needs a non-empty grid");
  if (sides.empty()) throw std::invalid_argument("percolation scan needs at least one n");
  std::sort(grid.begin(), grid.end());
  PercolationScan scan;
  scan.axis = axis;
  scan.fixed = fixed;
  scan.sides = std::move(sides);
  scan.threshold = 1 / fixed;
  for (double v : grid) {
    ScanPoint pt;
    pt.value = v;
    pt.a = axis == ScanAxis::success_probability ? fixed : v;
    pt.p = axis == ScanAxis::success_probability ? v : fixed;
    for (std::uint64_t n : scan.sides) {
      pt.log_success.push_back(log_overall_success_probability({n, pt.a, pt.p}));
    }
    if (std::abs(pt.a * pt.p - 1) < 1e-12) {
      pt.trend = Trend::critical;
    } else {
      pt.trend = classify_trend(pt.log_success);
    }
    if (pt.trend == Trend::decreasing) scan.last_decreasing = v;
    if (pt.trend == Trend::increasing && !scan.first_increasing) scan.first_increasing = v;
    scan.points.push_back(std::move(pt));
  }
  return scan;
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

struct WeaveSimulation {
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  double fraction = 0;
  WilsonInterval interval;
  std::uint64_t seed = 0;
};

/// One cross-chain: Bernoulli attempts until n successes or the budget runs out.
inline bool weave_cross_chain(std::uint64_t n, std::uint64_t budget, double p, TrialRng& rng) {
  std::uint64_t got = 0;
  for (std::uint64_t used = 0; used < budget && got < n; ++used) {
    if (rng.bernoulli(p)) ++got;
    if (n - got > budget - used - 1) return false;
  }
  return got >= n;
}

/// Fraction of trials in which all n cross-chains collect n successes.
inline WeaveSimulation simulate_weave(const WeaveParameters& w, std::uint64_t trials,
                                      std::uint64_t seed, unsigned threads = 0) {
  w.validate();
  if (trials < 1) throw std::invalid_argument("need at least one trial");
  const std::uint64_t budget = w.attempts();
  std::vector<unsigned char> ok(trials);
  parallel_for(trials, threads, [&](std::size_t t) {
    TrialRng rng(seed, t);
    bool all = true;
    for (std::uint64_t c = 0; c < w.n && all; ++c) all = weave_cross_chain(w.n, budget, w.p, rng);
    ok[t] = all;
  });
  WeaveSimulation out;
  out.trials = trials;
  out.seed = seed;
  for (unsigned char v : ok) out.successes += v;
  out.fraction = static_cast<double>(out.successes) / static_cast<double>(trials);
  out.interval = wilson_interval(out.successes, trials);
  return out;
}

}  // namespace cluster_forge
