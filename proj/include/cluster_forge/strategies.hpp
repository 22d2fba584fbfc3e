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

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <functional>
#include <istream>
#include <memory>
#include <optional>
#include <span>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace cluster_forge {

/// Raised when a strategy asks for a fusion of absent chains or stops while
/// two or more chains remain.
class InvalidStrategy : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/**
 * One execution of a strategy, carrying whatever memory the strategy keeps
 * between decisions. Runs are single-owner; clone() forks the memory when an
 * event tree branches.
 */
class StrategyRun {
 public:
  virtual ~StrategyRun() = default;

  virtual IndexedAction decide(const IdentityConfiguration& state) const = 0;

  /// Informs the run of the outcome of its last decision. `after` is the state that resulted.
  virtual void advance(const IndexedAction& /*taken*/, Outcome /*outcome*/,
                       const IdentityConfiguration& /*after*/) {}

  /// Digest of the run's memory. Equal (state, digest) pairs behave identically.
  virtual std::string memory_key() const { return {}; }

  virtual std::unique_ptr<StrategyRun> clone() const = 0;
};

/// A classical control rule. Runs created by start() must not outlive the strategy.
class Strategy {
 public:
  virtual ~Strategy() = default;
  virtual std::string name() const = 0;
  virtual bool is_stateless() const { return false; }
  virtual std::unique_ptr<StrategyRun> start(const IdentityConfiguration& initial) const = 0;
};

/// Picks the lowest position holding length k, then the lowest other position holding l.
inline std::optional<IndexedAction> locate(std::span<const Length> chains, const Action& a,
                                           std::size_t offset = 0) {
  if (a.is_stop()) return IndexedAction::halt();
  std::optional<std::size_t> first;
  for (std::size_t i = 0; i < chains.size(); ++i) {
    if (chains[i] == a.first()) {
      first = i;
      break;
    }
  }
  if (!first) return std::nullopt;
  for (std::size_t j = 0; j < chains.size(); ++j) {
    if (j != *first && chains[j] == a.second()) {
      return IndexedAction::fuse(*first + offset, j + offset);
    }
  }
  return std::nullopt;
}

/// A strategy that depends on the anonymous configuration only.
class StatelessStrategy : public Strategy {
 public:
  virtual Action decide(const Configuration& c) const = 0;

  bool is_stateless() const final { return true; }

  /// decide() plus the validity rules; throws InvalidStrategy on violation.
  Action checked_decide(const Configuration& c) const {
    const Action a = decide(c);
    if (a.is_stop()) {
      if (c.chain_count() > 1) {
        throw InvalidStrategy(name() + ": premature stop on {" + canonical_key(c) + "}");
      }
    } else if (!is_feasible(c, a)) {
      throw InvalidStrategy(name() + ": null fusion " + format_action(a) + " on {" +
                            canonical_key(c) + "}");
    }
    return a;
  }

  std::unique_ptr<StrategyRun> start(const IdentityConfiguration&) const final {
    return std::make_unique<Run>(*this);
  }

 private:
  class Run final : public StrategyRun {
   public:
    explicit Run(const StatelessStrategy& s) : strategy_(&s) {}
    IndexedAction decide(const IdentityConfiguration& state) const override {
      const Action a = strategy_->checked_decide(state.anonymous());
      return *locate(state.chains(), a);
    }
    std::unique_ptr<StrategyRun> clone() const override { return std::make_unique<Run>(*this); }

   private:
    const StatelessStrategy* strategy_;
  };
};

/// Fuses the two longest chains.
class Greed final : public StatelessStrategy {
 public:
  std::string name() const override { return "greed"; }
  Action decide(const Configuration& c) const override {
    if (c.chain_count() <= 1) return Action::stop();
    const auto parts = c.parts();
    const Part& top = parts.back();
    if (top.count >= 2) return Action::fuse(top.length, top.length);
    return Action::fuse(top.length, parts[parts.size() - 2].length);
  }
};

/// Fuses the two shortest chains.
class Modesty final : public StatelessStrategy {
 public:
  std::string name() const override { return "modesty"; }
  Action decide(const Configuration& c) const override {
    if (c.chain_count() <= 1) return Action::stop();
    const auto parts = c.parts();
    const Part& bottom = parts.front();
    if (bottom.count >= 2) return Action::fuse(bottom.length, bottom.length);
    return Action::fuse(bottom.length, parts[1].length);
  }
};

/// Wraps an arbitrary decision function; mostly useful for tests and ad-hoc rules.
class FunctionStrategy final : public StatelessStrategy {
 public:
  FunctionStrategy(std::string name, std::function<Action(const Configuration&)> fn)
      : name_(std::move(name)), fn_(std::move(fn)) {}
  std::string name() const override { return name_; }
  Action decide(const Configuration& c) const override { return fn_(c); }

 private:
  std::string name_;
  std::function<Action(const Configuration&)> fn_;
};

/// Strategy given by an explicit table configuration -> action.
class LookupStrategy final : public StatelessStrategy {
 public:
  using Table = std::unordered_map<Configuration, Action, ConfigurationHash>;

  LookupStrategy() = default;
  explicit LookupStrategy(Table table, std::string name = "lookup")
      : table_(std::move(table)), name_(std::move(name)) {}

  std::string name() const override { return name_; }

  Action decide(const Configuration& c) const override {
    const auto it = table_.find(c);
    if (it != table_.end()) return it->second;
    if (c.chain_count() <= 1) return Action::stop();
    throw InvalidStrategy(name_ + ": no table entry for {" + canonical_key(c) + "}");
  }

  void set(const Configuration& c, const Action& a) { table_.insert_or_assign(c, a); }
  const Table& table() const { return table_; }
  std::size_t size() const { return table_.size(); }

  /// One line per entry, "key<TAB>k,l" or "key<TAB>stop", sorted by key.
  void write(std::ostream& out) const {
    std::vector<std::pair<std::string, Action>> rows;
    rows.reserve(table_.size());
    for (const auto& [c, a] : table_) rows.emplace_back(canonical_key(c), a);
    std::sort(rows.begin(), rows.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    for (const auto& [key, a] : rows) out << key << '\t' << format_action(a) << '\n';
  }

  static LookupStrategy read(std::istream& in, std::string name = "lookup") {
    LookupStrategy s({}, std::move(name));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos) {
        throw std::invalid_argument("lookup table line " + std::to_string(line_no) +
                                    ": missing tab");
      }
      s.set(parse_configuration(std::string_view(line).substr(0, tab)),
            parse_action(std::string_view(line).substr(tab + 1)));
    }
    return s;
  }

 private:
  Table table_;
  std::string name_ = "lookup";
};

/**
 * Two-stage construction. Stage one splits the initial chains into
 * consecutive blocks of `block_size` and runs the inner strategy inside one
 * block at a time until each block holds at most one chain. Stage two pairs
 * the survivors (1 with 2, 3 with 4, ...), retries each pair until it is
 * glued or one partner is gone, renumbers at the end of the round and
 * repeats until at most one chain is left.
 */
class TwoStageStrategy final : public Strategy {
 public:
  TwoStageStrategy(std::size_t block_size, std::shared_ptr<const StatelessStrategy> inner,
                   std::string name = {})
      : block_size_(block_size), inner_(std::move(inner)), name_(std::move(name)) {
    if (block_size_ < 2) throw std::invalid_argument("block size must be at least 2");
    if (!inner_) throw std::invalid_argument("two-stage strategy needs an inner strategy");
    if (name_.empty()) name_ = "two-stage(" + std::to_string(block_size_) + "," + inner_->name() + ")";
  }

  std::string name() const override { return name_; }
  std::size_t block_size() const { return block_size_; }
  const StatelessStrategy& inner() const { return *inner_; }

  std::unique_ptr<StrategyRun> start(const IdentityConfiguration& initial) const override {
    return std::make_unique<Run>(*this, initial);
  }

 private:
  class Run final : public StrategyRun {
   public:
    Run(const TwoStageStrategy& s, const IdentityConfiguration& initial) : strategy_(&s) {
      for (std::size_t left = initial.size(); left > 0;) {
        const std::size_t take = std::min(left, s.block_size_);
        blocks_.push_back(take);
        left -= take;
      }
      chains_ = initial.size();
      settle(initial);
    }

    IndexedAction decide(const IdentityConfiguration& state) const override {
      if (state.size() <= 1) return IndexedAction::halt();
      if (stage_ == 1) {
        const auto segment = state.chains().subspan(offset_, blocks_[block_]);
        const Action a = strategy_->inner_->checked_decide(
            Configuration::from_lengths(segment));
        return *locate(segment, a, offset_);
      }
      return IndexedAction::fuse(cursor_, cursor_ + 1);
    }

    void advance(const IndexedAction&, Outcome outcome,
                 const IdentityConfiguration& after) override {
      const std::size_t lost = chains_ - after.size() - (outcome == Outcome::success ? 1 : 0);
      if (stage_ == 1) {
        blocks_[block_] -= chains_ - after.size();
      } else if (outcome == Outcome::success || lost == 1) {
        ++cursor_;
      }
      chains_ = after.size();
      settle(after);
    }

    std::string memory_key() const override {
      std::string key = stage_ == 1 ? "1:" + std::to_string(block_) + ":"
                                    : "2:" + std::to_string(cursor_);
      if (stage_ == 1) {
        for (std::size_t b = block_; b < blocks_.size(); ++b) key += std::to_string(blocks_[b]) + ".";
      }
      return key;
    }

    std::unique_ptr<StrategyRun> clone() const override { return std::make_unique<Run>(*this); }

   private:
    void settle(const IdentityConfiguration& state) {
      if (stage_ == 1) {
        while (block_ < blocks_.size() && blocks_[block_] <= 1) offset_ += blocks_[block_++];
        if (block_ == blocks_.size()) {
          stage_ = 2;
          cursor_ = 0;
        }
      }
      if (stage_ == 2 && cursor_ + 1 >= state.size()) cursor_ = 0;
    }

    const TwoStageStrategy* strategy_;
    int stage_ = 1;
    std::vector<std::size_t> blocks_;
    std::size_t block_ = 0;
    std::size_t offset_ = 0;  // first position of the current block
    std::size_t cursor_ = 0;
    std::size_t chains_ = 0;
  };

  std::size_t block_size_;
  std::shared_ptr<const StatelessStrategy> inner_;
  std::string name_;
};

/// Modesty inside blocks of eight, then insistent pairwise rounds.
inline std::shared_ptr<const TwoStageStrategy> make_static_strategy() {
  return std::make_shared<TwoStageStrategy>(8, std::make_shared<Modesty>(), "static");
}

/// Built-in strategies by name: greed, modesty, static.
inline std::shared_ptr<const Strategy> make_builtin_strategy(std::string_view name) {
  if (name == "greed") return std::make_shared<Greed>();
  if (name == "modesty") return std::make_shared<Modesty>();
  if (name == "static") return make_static_strategy();
  throw std::invalid_argument("unknown strategy '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct Violation {
  enum class Kind { null_fusion, premature_stop, non_termination };
  Kind kind;
  Event event;
  std::string message;
};

inline std::string to_string(Violation::Kind k) {
  switch (k) {
    case Violation::Kind::null_fusion: return "null fusion";
    case Violation::Kind::premature_stop: return "premature stop";
    case Violation::Kind::non_termination: return "non-termination";
  }
  return "?";
}

namespace detail {

class Validator {
 public:
  explicit Validator(std::uint64_t depth_limit) : depth_limit_(depth_limit) {}

  std::optional<Violation> stateless(const StatelessStrategy& s, const Configuration& c) {
    if (!visited_.insert(c).second) return std::nullopt;
    if (event_.size() > depth_limit_) return report(Violation::Kind::non_termination, c);
    const Action a = s.decide(c);
    const bool single = c.chain_count() <= 1;
    if (a.is_stop()) {
      return single ? std::nullopt : report(Violation::Kind::premature_stop, c);
    }
    if (single || !is_feasible(c, a)) return report(Violation::Kind::null_fusion, c, &a);
    for (Outcome o : {Outcome::success, Outcome::failure}) {
      event_.push_back(o);
      if (auto v = stateless(s, apply_fusion(c, a, o))) return v;
      event_.pop_back();
    }
    return std::nullopt;
  }

  std::optional<Violation> stateful(const StrategyRun& run, const IdentityConfiguration& state) {
    if (event_.size() > depth_limit_) {
      return report(Violation::Kind::non_termination, state.anonymous());
    }
    IndexedAction a;
    try {
      a = run.decide(state);
    } catch (const InvalidStrategy& e) {
      return Violation{Violation::Kind::null_fusion, event_, e.what()};
    }
    const bool single = state.size() <= 1;
    if (a.stop) {
      return single ? std::nullopt : report(Violation::Kind::premature_stop, state.anonymous());
    }
    if (single || !state.is_feasible(a)) {
      return report(Violation::Kind::null_fusion, state.anonymous());
    }
    for (Outcome o : {Outcome::success, Outcome::failure}) {
      auto next_run = run.clone();
      const auto next = state.apply(a, o);
      next_run->advance(a, o, next);
      event_.push_back(o);
      if (auto v = stateful(*next_run, next)) return v;
      event_.pop_back();
    }
    return std::nullopt;
  }

 private:
  std::optional<Violation> report(Violation::Kind kind, const Configuration& c,
                                  const Action* a = nullptr) const {
    std::string msg = to_string(kind) + " at event " + format_event(event_) + " on {" +
                      canonical_key(c) + "}";
    if (a) msg += " requesting " + format_action(*a);
    return Violation{kind, event_, msg};
  }

  std::uint64_t depth_limit_;
  Event event_;
  std::unordered_set<Configuration, ConfigurationHash> visited_;
};

}  // namespace detail

/**
 * Walks every event string reachable from `initial` and checks both validity
 * rules plus termination within the vertex budget. Returns the first
 * violation in depth-first (success-before-failure) order, if any.
 */
inline std::optional<Violation> validate_strategy(const Strategy& s, const Configuration& initial,
                                                  std::uint64_t max_total_length = 20) {
  if (initial.total_length() > max_total_length) {
    throw std::invalid_argument("validation horizon exceeded: total length " +
                                std::to_string(initial.total_length()) + " > " +
                                std::to_string(max_total_length));
  }
  detail::Validator v(initial.vertex_count());
  if (s.is_stateless()) {
    return v.stateless(static_cast<const StatelessStrategy&>(s), initial);
  }
  const auto state = IdentityConfiguration::from(initial);
  return v.stateful(*s.start(state), state);
}

}  // namespace cluster_forge
