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

#include "cluster_forge/configuration.hpp"
#include "cluster_forge/exact.hpp"
#include "cluster_forge/parallel.hpp"
#include "cluster_forge/rational.hpp"
#include "cluster_forge/strategies.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace cluster_forge {

// ---------------------------------------------------------------------------
// Random streams
// ---------------------------------------------------------------------------

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/**
 * Per-trial generator. Trial t of an experiment seeded with s draws from
 * std::mt19937_64 seeded with mix64(mix64(s) ^ t), so trial outcomes depend
 * only on (s, t) and never on scheduling.
 */
class TrialRng {
 public:
  TrialRng(std::uint64_t seed, std::uint64_t trial) : engine_(mix64(mix64(seed) ^ trial)) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return p >= 1.0 || uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

// ---------------------------------------------------------------------------
// Single trajectories
// ---------------------------------------------------------------------------

struct RunResult {
  IdentityConfiguration final_state;
  std::uint64_t attempts = 0;
  std::uint64_t successes = 0;
};

/**
 * Samples one execution of `s` from `initial`. Every fusion succeeds
 * independently with probability p. A success keeps the total length and
 * removes one chain, a failure removes exactly two edges; the final length
 * is checked against the initial length minus two per failure.
 */
inline RunResult simulate_run(const Strategy& s, IdentityConfiguration initial, double p,
                              TrialRng& rng) {
  if (!(p > 0 && p <= 1)) throw std::domain_error("success probability must lie in (0, 1]");
  RunResult out{std::move(initial), 0, 0};
  auto& state = out.final_state;
  const std::uint64_t initial_length = state.total_length();
  auto run = s.start(state);
  for (;;) {
    const IndexedAction a = run->decide(state);
    if (a.stop) {
      if (state.size() > 1) {
        throw InvalidStrategy(s.name() + " stopped with " + std::to_string(state.size()) +
                              " chains left");
      }
      break;
    }
    if (state.size() <= 1 || !state.is_feasible(a)) {
      throw InvalidStrategy(s.name() + " attempted a null fusion");
    }
    const std::size_t chains = state.size();
    const Length joined = state[a.first] + state[a.second];
    const Outcome o = rng.bernoulli(p) ? Outcome::success : Outcome::failure;
    state.apply_in_place(a, o);
    if (o == Outcome::success && (state.size() + 1 != chains || state[a.first] != joined)) {
      throw std::logic_error("successful fusion did not conserve edges");
    }
    ++out.attempts;
    if (o == Outcome::success) ++out.successes;
    run->advance(a, o, state);
  }
  if (state.total_length() + 2 * (out.attempts - out.successes) != initial_length) {
    throw std::logic_error("edge count not conserved: each failure must remove two edges");
  }
  return out;
}

inline IdentityConfiguration simulate_run(const Strategy& s, const Configuration& initial,
                                          double p, std::uint64_t seed) {
  TrialRng rng(seed, 0);
  return simulate_run(s, IdentityConfiguration::from(initial), p, rng).final_state;
}

// ---------------------------------------------------------------------------
// Estimation
// ---------------------------------------------------------------------------

struct SimulationReport {
  std::uint64_t trials = 0;
  double mean = 0;
  double std_error = std::numeric_limits<double>::quiet_NaN();  // NaN when trials < 2
  double mean_attempts = 0;
  std::uint64_t threshold = 0;  // final length counted as a success when >= threshold
  std::uint64_t successes = 0;
  std::uint64_t seed = 0;

  bool has_std_error() const { return !std::isnan(std_error); }
};

struct SimulationOptions {
  std::uint64_t trials = 10000;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0 = all cores
  std::optional<std::uint64_t> threshold;
};

/**
 * Monte Carlo estimate of the expected final total length. Trials run in
 * parallel, and per-trial results are reduced in trial order, so the report
 * is identical for any thread count.
 */
inline SimulationReport estimate_quality(const Strategy& s, const Configuration& initial, double p,
                                         const SimulationOptions& opt) {
  if (opt.trials < 1) throw std::invalid_argument("need at least one trial");
  check_probability(p);
  const IdentityConfiguration start = IdentityConfiguration::from(initial);
  struct Sample {
    std::uint64_t length = 0;
    std::uint64_t attempts = 0;
  };
  std::vector<Sample> samples(opt.trials);
  parallel_for(opt.trials, opt.threads, [&](std::size_t t) {
    TrialRng rng(opt.seed, t);
    const RunResult r = simulate_run(s, start, p, rng);
    samples[t] = {r.final_state.total_length(), r.attempts};
  });

  SimulationReport rep;
  rep.trials = opt.trials;
  rep.seed = opt.seed;
  rep.threshold = opt.threshold.value_or(0);
  double sum = 0, attempts = 0;
  for (const auto& x : samples) {
    sum += static_cast<double>(x.length);
    attempts += static_cast<double>(x.attempts);
    if (opt.threshold && x.length >= *opt.threshold) ++rep.successes;
  }
  const double n = static_cast<double>(opt.trials);
  rep.mean = sum / n;
  rep.mean_attempts = attempts / n;
  if (opt.trials >= 2) {
    double ss = 0;
    for (const auto& x : samples) {
      const double d = static_cast<double>(x.length) - rep.mean;
      ss += d * d;
    }
    rep.std_error = std::sqrt(ss / (n - 1)) / std::sqrt(n);
  }
  return rep;
}

inline SimulationReport estimate_quality(const Strategy& s, const Configuration& initial, double p,
                                         std::uint64_t trials, std::uint64_t seed,
                                         unsigned threads = 0) {
  return estimate_quality(s, initial, p, SimulationOptions{trials, seed, threads, std::nullopt});
}

// ---------------------------------------------------------------------------
// Two-stage construction and threshold experiments
// ---------------------------------------------------------------------------

inline std::shared_ptr<const TwoStageStrategy> two_stage_strategy(
    std::size_t block_size, std::shared_ptr<const StatelessStrategy> inner) {
  return std::make_shared<TwoStageStrategy>(block_size, std::move(inner));
}

struct WilsonInterval {
  double low = 0;
  double high = 1;
};

/// 95% Wilson score interval for k successes in n trials.
inline WilsonInterval wilson_interval(std::uint64_t k, std::uint64_t n,
                                      double z = 1.959963984540054) {
  if (n == 0) return {0, 1};
  const double nn = static_cast<double>(n);
  const double phat = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1 + z2 / nn;
  const double centre = (phat + z2 / (2 * nn)) / denom;
  const double half = z * std::sqrt(phat * (1 - phat) / nn + z2 / (4 * nn * nn)) / denom;
  // The exact endpoints at k = 0 and k = n are 0 and 1; rounding would miss them.
  return {k == 0 ? 0.0 : std::max(0.0, centre - half), k == n ? 1.0 : std::min(1.0, centre + half)};
}

struct ThresholdReport {
  std::uint64_t target = 0;  // L
  double alpha = 0;
  double epsilon = 0;
  bool sufficient = true;     // N = ceil((1/alpha + eps) L), else (1/alpha - eps) L
  std::uint64_t pairs = 0;    // N
  std::size_t block_size = 0;
  bool below_block_range = false;  // L < b/eps: the remainder block is not negligible
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  double fraction = 0;
  WilsonInterval interval;
  double mean_length = 0;
  double std_error = 0;
};

/// Yield rate (Q_S(b) - 2)/b of the inner strategy on blocks of b pairs.
inline Rational block_rate(const StatelessStrategy& inner, std::size_t block_size,
                           const Rational& p = Rational(1, 2)) {
  const Rational q = strategy_quality(inner, Configuration::epr_pairs(block_size), p);
  return (q - 2) / Rational(block_size);
}

/**
 * Runs `strategy` on N = ceil((1/alpha +- eps) L) EPR pairs and counts the
 * runs whose final chain has length at least L.
 */
inline ThresholdReport threshold_experiment(const TwoStageStrategy& strategy, std::uint64_t target,
                                            double alpha, double epsilon, double p,
                                            std::uint64_t trials, std::uint64_t seed,
                                            bool sufficient = true, unsigned threads = 0) {
  if (!(alpha > 0)) throw std::invalid_argument("alpha must be strictly positive");
  if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be strictly positive");
  if (target < 1) throw std::invalid_argument("target length must be positive");
  const double factor = sufficient ? 1 / alpha + epsilon : 1 / alpha - epsilon;
  if (!(factor > 0)) throw std::invalid_argument("1/alpha - epsilon must be positive");

  ThresholdReport rep;
  rep.target = target;
  rep.alpha = alpha;
  rep.epsilon = epsilon;
  rep.sufficient = sufficient;
  rep.pairs = static_cast<std::uint64_t>(std::ceil(factor * static_cast<double>(target)));
  rep.block_size = strategy.block_size();
  rep.below_block_range = static_cast<double>(target) < static_cast<double>(rep.block_size) / epsilon;
  const auto sim = estimate_quality(strategy, Configuration::epr_pairs(static_cast<Count>(rep.pairs)),
                                    p, SimulationOptions{trials, seed, threads, target});
  rep.trials = sim.trials;
  rep.successes = sim.successes;
  rep.fraction = static_cast<double>(sim.successes) / static_cast<double>(sim.trials);
  rep.interval = wilson_interval(sim.successes, sim.trials);
  rep.mean_length = sim.mean;
  rep.std_error = sim.std_error;
  return rep;
}

}  // namespace cluster_forge
