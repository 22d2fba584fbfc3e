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

#include "cluster_forge/weave.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace cluster_forge {
namespace {

TEST(Weave, Parameters) {
  EXPECT_EQ((WeaveParameters{10, 2.5, 0.5}.attempts()), 25u);
  EXPECT_EQ((WeaveParameters{3, 1.5, 0.5}.attempts()), 5u);  // 4.5 rounds up
  EXPECT_THROW((WeaveParameters{10, 1.0, 0.5}.validate()), std::invalid_argument);
  EXPECT_THROW((WeaveParameters{0, 2, 0.5}.validate()), std::invalid_argument);
  EXPECT_THROW((WeaveParameters{3, 2, 0}.validate()), std::domain_error);
  EXPECT_THROW((WeaveParameters{3, 2, 1.5}.validate()), std::domain_error);
}

TEST(Weave, SingleChainExamples) {
  EXPECT_NEAR(single_chain_weave_probability({1, 2, 0.5}), 0.75, 1e-15);
  EXPECT_NEAR(single_chain_weave_probability({3, 2, 0.5}), 42.0 / 64, 1e-15);
}

TEST(Weave, MatchesExactTailSum) {
  for (unsigned n = 1; n <= 12; ++n) {
    for (double a : {1.5, 2.0, 3.0}) {
      const WeaveParameters w{n, a, 0.3};
      const double exact = to_double(
          oracle::binomial_tail(n, static_cast<unsigned>(w.attempts()), Rational(3, 10)));
      EXPECT_NEAR(single_chain_weave_probability(w), exact, 1e-13) << n << " " << a;
    }
  }
}

TEST(Weave, DualFormsAgree) {
  for (std::uint64_t n = 1; n <= 50; ++n) {
    for (double a : {1.5, 2.0, 3.0}) {
      for (double p : {0.3, 0.5, 0.8}) {
        const WeaveParameters w{n, a, p};
        EXPECT_NEAR(single_chain_weave_probability(w), single_chain_probability_negative_binomial(w),
                    1e-12);
      }
    }
  }
}

TEST(Weave, OverallProbability) {
  EXPECT_EQ(overall_success_probability({40, 1.2, 1.0}), 1.0);
  EXPECT_NEAR(overall_success_probability({3, 2, 0.5}), std::pow(42.0 / 64, 3), 1e-14);
}

TEST(Weave, TrendsAboveAndBelowThreshold) {
  double previous_up = -1, previous_down = 2;
  for (std::uint64_t n = 10; n <= 500; n += 10) {
    const double up = log_overall_success_probability({n, 3, 0.5});
    const double down = log_overall_success_probability({n, 1.5, 0.5});
    EXPECT_GT(up, previous_up) << n;
    EXPECT_LT(down, previous_down) << n;
    previous_up = up;
    previous_down = down;
  }
  EXPECT_GT(overall_success_probability({500, 3, 0.5}), 0.999);
  EXPECT_LT(overall_success_probability({500, 1.5, 0.5}), 1e-100);
}

TEST(Hoeffding, Value) {
  EXPECT_NEAR(hoeffding_bound({10, 3, 0.5}), 1 - std::exp(-72.0 / 30), 1e-15);
  EXPECT_NEAR(hoeffding_bound({10, 3, 0.5}), 0.90928, 1e-5);
  EXPECT_THROW(hoeffding_bound({10, 2, 0.5}), std::domain_error);
  EXPECT_THROW(hoeffding_bound({10, 1.5, 0.5}), std::domain_error);
}

TEST(Hoeffding, BelowExact) {
  for (std::uint64_t n = 1; n <= 200; ++n) {
    const WeaveParameters w{n, 3, 0.5};
    EXPECT_LE(hoeffding_bound(w), single_chain_weave_probability(w)) << n;
  }
  const WeaveParameters sure{20, 1.5, 1.0};
  EXPECT_LT(hoeffding_bound(sure), 1.0);
  EXPECT_EQ(single_chain_weave_probability(sure), 1.0);
}

TEST(Percolation, BracketContainsThreshold) {
  std::vector<double> grid;
  for (int i = 1; i <= 19; ++i) grid.push_back(i / 20.0);
  const auto scan = percolation_scan(ScanAxis::success_probability, 2, grid, {50, 100, 200, 400});
  ASSERT_TRUE(scan.has_bracket());
  EXPECT_TRUE(scan.bracket_contains_threshold());
  EXPECT_EQ(scan.threshold, 0.5);
  for (const auto& pt : scan.points) {
    if (pt.value == 0.5) {
      EXPECT_EQ(pt.trend, Trend::critical);
    }
  }
}

TEST(Percolation, OverheadAxis) {
  const auto scan = percolation_scan(ScanAxis::overhead, 0.5, {1.25, 1.5, 1.75, 2.0, 2.5, 3.0, 4.0},
                                     {50, 100, 200, 400});
  EXPECT_TRUE(scan.bracket_contains_threshold());
  EXPECT_EQ(scan.points.front().trend, Trend::decreasing);
  EXPECT_EQ(scan.points.back().trend, Trend::increasing);
}

TEST(Percolation, Degenerate) {
  const auto scan = percolation_scan(ScanAxis::success_probability, 2, {0.3, 0.8}, {100});
  for (const auto& pt : scan.points) EXPECT_EQ(pt.trend, Trend::none);
  EXPECT_FALSE(scan.has_bracket());
  EXPECT_THROW(percolation_scan(ScanAxis::success_probability, 2, {}, {100}), std::invalid_argument);
  EXPECT_THROW(percolation_scan(ScanAxis::success_probability, 2, {0.5}, {}), std::invalid_argument);
}

TEST(Simulate, SmallCluster) {
  const WeaveParameters w{3, 2, 0.5};
  const auto sim = simulate_weave(w, 100000, 4);
  const double p = std::pow(42.0 / 64, 3);
  EXPECT_LT(std::abs(sim.fraction - p), 3 * std::sqrt(p * (1 - p) / 1e5));
  EXPECT_EQ(simulate_weave({5, 1.5, 1.0}, 100, 1).fraction, 1.0);
  const auto again = simulate_weave(w, 100000, 4, 3);
  EXPECT_EQ(sim.successes, again.successes);
}

TEST(Resources, Count) {
  EXPECT_EQ(resource_count({1, 2, 0.5}), 4u);
  const auto r = weave_resources({10, 3, 0.5});
  EXPECT_EQ(r.cross_chains, 300u);
  EXPECT_EQ(r.thread, 210u);
  EXPECT_EQ(r.redundant_encoding, 200u);
  const double a = 3;
  const double ratio = static_cast<double>(resource_count({100000, a, 0.5})) / 1e10;
  EXPECT_NEAR(ratio, a + (a - 1), 1e-4);
}

TEST(Resources, QuadraticScaling) {
  std::vector<std::uint64_t> sides;
  for (std::uint64_t n = 10; n <= 1000; n += 10) sides.push_back(n);
  const double slope = resource_scaling_exponent(3, sides);
  EXPECT_GE(slope, 1.99);
  EXPECT_LE(slope, 2.01);
  EXPECT_NEAR(loglog_slope({1, 10, 100}, {2, 200, 20000}), 2, 1e-12);
  EXPECT_THROW(loglog_slope({1}, {1}), std::invalid_argument);
}

}  // namespace
}  // namespace cluster_forge
