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

#include "cluster_forge/exact.hpp"
#include "cluster_forge/strategies.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace cluster_forge {
namespace {

TEST(Greed, Decisions) {
  const Greed g;
  EXPECT_EQ(g.decide(Configuration::from_lengths({3, 2, 1})), Action::fuse(3, 2));
  EXPECT_EQ(g.decide(Configuration::from_lengths({2, 2})), Action::fuse(2, 2));
  EXPECT_EQ(g.decide(Configuration::single_chain(5)), Action::stop());
}

TEST(Modesty, Decisions) {
  const Modesty m;
  EXPECT_EQ(m.decide(Configuration::from_lengths({3, 2, 1})), Action::fuse(1, 2));
  EXPECT_EQ(m.decide(Configuration::epr_pairs(4)), Action::fuse(1, 1));
  EXPECT_EQ(m.decide(Configuration()), Action::stop());
}

TEST(Validate, BuiltinsAreValid) {
  for (const char* name : {"greed", "modesty", "static"}) {
    const auto s = make_builtin_strategy(name);
    for (Count n = 1; n <= 12; ++n) {
      EXPECT_FALSE(validate_strategy(*s, Configuration::epr_pairs(n))) << name << " N=" << n;
    }
  }
}

TEST(Validate, PrematureStop) {
  const FunctionStrategy lazy("lazy", [](const Configuration&) { return Action::stop(); });
  const auto v = validate_strategy(lazy, Configuration::epr_pairs(2));
  ASSERT_TRUE(v);
  EXPECT_EQ(v->kind, Violation::Kind::premature_stop);
  EXPECT_TRUE(v->event.empty());
  EXPECT_NE(v->message.find("ε"), std::string::npos);
}

TEST(Validate, NullFusion) {
  const FunctionStrategy wrong("wrong", [](const Configuration& c) {
    return c.chain_count() <= 1 ? Action::stop() : Action::fuse(3, 1);
  });
  const auto v = validate_strategy(wrong, Configuration::epr_pairs(2));
  ASSERT_TRUE(v);
  EXPECT_EQ(v->kind, Violation::Kind::null_fusion);
}

TEST(Validate, ReportsFirstViolatingEvent) {
  // Valid until a chain of length 2 appears next to a single pair.
  const FunctionStrategy late("late", [](const Configuration& c) {
    if (c.chain_count() <= 1) return Action::stop();
    if (c.count(2) == 1 && c.count(1) >= 1) return Action::stop();
    return Modesty().decide(c);
  });
  const auto v = validate_strategy(late, Configuration::epr_pairs(3));
  ASSERT_TRUE(v);
  EXPECT_EQ(v->kind, Violation::Kind::premature_stop);
  EXPECT_EQ(format_event(v->event), "S");
}

TEST(Validate, HorizonGuard) {
  EXPECT_THROW(validate_strategy(Greed(), Configuration::epr_pairs(25), 20), std::invalid_argument);
}

TEST(Lookup, RoundTrip) {
  LookupStrategy s;
  s.set(Configuration::epr_pairs(2), Action::fuse(1, 1));
  s.set(Configuration::from_lengths({2, 1}), Action::fuse(1, 2));
  std::stringstream io;
  s.write(io);
  const auto back = LookupStrategy::read(io);
  EXPECT_EQ(back.size(), 2u);
  EXPECT_EQ(back.decide(Configuration::from_lengths({2, 1})), Action::fuse(1, 2));
  EXPECT_EQ(back.decide(Configuration::single_chain(3)), Action::stop());
  EXPECT_THROW(back.decide(Configuration::epr_pairs(3)), InvalidStrategy);
}

TEST(TwoStage, RejectsTinyBlocks) {
  EXPECT_THROW(TwoStageStrategy(1, std::make_shared<Modesty>()), std::invalid_argument);
  EXPECT_THROW(TwoStageStrategy(4, nullptr), std::invalid_argument);
}

TEST(TwoStage, EightPairsIsModesty) {
  const auto st = make_static_strategy();
  EXPECT_EQ(strategy_quality(*st, Configuration::epr_pairs(8), Rational(1, 2)), Rational(649, 256));
}

/// Drives a run by hand along a fixed outcome sequence.
struct Driver {
  IdentityConfiguration state;
  std::unique_ptr<StrategyRun> run;
  std::vector<IndexedAction> taken;

  Driver(const Strategy& s, IdentityConfiguration initial)
      : state(std::move(initial)), run(s.start(state)) {}

  bool step(Outcome o) {
    const auto a = run->decide(state);
    if (a.stop) return false;
    taken.push_back(a);
    state = state.apply(a, o);
    run->advance(a, o, state);
    return true;
  }
};

TEST(TwoStage, StageOneStaysInsideBlocks) {
  const auto st = make_static_strategy();
  Driver d(*st, IdentityConfiguration::epr_pairs(16));
  // Four successes in the first block only touch positions 0..7.
  for (int i = 0; i < 4; ++i) {
    ASSERT_TRUE(d.step(Outcome::success));
    EXPECT_LT(d.taken.back().second, 8u);
  }
}

TEST(TwoStage, StageTwoIsInsistent) {
  const auto st = make_static_strategy();
  Driver d(*st, IdentityConfiguration::epr_pairs(16));
  // All successes: each block collapses to a chain of length 8.
  while (d.state.size() > 2) ASSERT_TRUE(d.step(Outcome::success));
  EXPECT_EQ(d.state, IdentityConfiguration({8, 8}));
  // Failures keep hitting the same pair until a partner vanishes.
  for (int i = 0; i < 7; ++i) {
    ASSERT_TRUE(d.step(Outcome::failure));
    EXPECT_EQ(d.taken.back(), IndexedAction::fuse(0, 1));
  }
  EXPECT_EQ(d.state, IdentityConfiguration({1, 1}));
  ASSERT_TRUE(d.step(Outcome::failure));
  EXPECT_EQ(d.state.size(), 0u);
  EXPECT_FALSE(d.step(Outcome::success));
}

TEST(TwoStage, StageTwoPairsRoundByRound) {
  const auto st = make_static_strategy();
  Driver d(*st, IdentityConfiguration::epr_pairs(32));
  while (d.state.size() > 4) ASSERT_TRUE(d.step(Outcome::success));
  EXPECT_EQ(d.state.size(), 4u);
  ASSERT_TRUE(d.step(Outcome::success));
  EXPECT_EQ(d.taken.back(), IndexedAction::fuse(0, 1));
  ASSERT_TRUE(d.step(Outcome::success));
  EXPECT_EQ(d.taken.back(), IndexedAction::fuse(1, 2));
  ASSERT_TRUE(d.step(Outcome::success));
  EXPECT_EQ(d.taken.back(), IndexedAction::fuse(0, 1));
  EXPECT_EQ(d.state, IdentityConfiguration({32}));
}

TEST(TwoStage, ShortLastBlock) {
  const auto ts = TwoStageStrategy(4, std::make_shared<Modesty>());
  for (Count n = 1; n <= 11; ++n) {
    EXPECT_FALSE(validate_strategy(ts, Configuration::epr_pairs(n))) << "N=" << n;
  }
}

TEST(Builtin, UnknownName) { EXPECT_THROW(make_builtin_strategy("bogus"), std::invalid_argument); }

}  // namespace
}  // namespace cluster_forge
