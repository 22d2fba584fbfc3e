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
#include "cluster_forge/rational.hpp"
#include "cluster_forge/strategies.hpp"

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace cluster_forge {

/// Table construction ran past its entry budget. `level` is the last vertex-count level completed.
class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(std::uint64_t level, std::size_t entries)
      : std::runtime_error("quality table budget exceeded after vertex-count level " +
                           std::to_string(level) + " (" + std::to_string(entries) + " entries)"),
        level_(level),
        entries_(entries) {}
  std::uint64_t level() const { return level_; }
  std::size_t entries() const { return entries_; }

 private:
  std::uint64_t level_;
  std::size_t entries_;
};

template <class Scalar>
void check_probability(const Scalar& p) {
  if (!(p > 0) || p > 1) throw std::domain_error("success probability must lie in (0, 1]");
}

/// Expected final total length and expected number of attempted fusions.
template <class Scalar>
struct Expectation {
  Scalar length{0};
  Scalar attempts{0};
};

namespace detail {

template <class Scalar>
class StatelessEvaluator {
 public:
  StatelessEvaluator(const StatelessStrategy& s, Scalar p) : strategy_(s), p_(std::move(p)), q_(1 - p_) {}

  const Expectation<Scalar>& operator()(const Configuration& c) {
    if (auto it = memo_.find(c); it != memo_.end()) return it->second;
    Expectation<Scalar> e;
    const Action a = strategy_.checked_decide(c);
    if (a.is_stop()) {
      e.length = Scalar(c.total_length());
    } else {
      const Expectation<Scalar> s = (*this)(apply_fusion(c, a, Outcome::success));
      const Expectation<Scalar> f = (*this)(apply_fusion(c, a, Outcome::failure));
      e.length = p_ * s.length + q_ * f.length;
      e.attempts = 1 + p_ * s.attempts + q_ * f.attempts;
    }
    return memo_.emplace(c, std::move(e)).first->second;
  }

 private:
  const StatelessStrategy& strategy_;
  Scalar p_, q_;
  std::unordered_map<Configuration, Expectation<Scalar>, ConfigurationHash> memo_;
};

template <class Scalar>
class StatefulEvaluator {
 public:
  StatefulEvaluator(Scalar p, std::uint64_t depth_limit)
      : p_(std::move(p)), q_(1 - p_), depth_limit_(depth_limit) {}

  Expectation<Scalar> operator()(const StrategyRun& run, const IdentityConfiguration& state,
                                 std::uint64_t depth = 0) {
    if (depth > depth_limit_) throw InvalidStrategy("strategy does not terminate");
    std::string key = state.key() + "|" + run.memory_key();
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    Expectation<Scalar> e;
    const IndexedAction a = run.decide(state);
    if (a.stop) {
      if (state.size() > 1) throw InvalidStrategy("premature stop");
      e.length = Scalar(state.total_length());
    } else {
      if (!state.is_feasible(a)) throw InvalidStrategy("null fusion");
      Expectation<Scalar> branch[2];
      for (Outcome o : {Outcome::success, Outcome::failure}) {
        auto next_run = run.clone();
        const auto next = state.apply(a, o);
        next_run->advance(a, o, next);
        branch[o == Outcome::success ? 0 : 1] = (*this)(*next_run, next, depth + 1);
      }
      e.length = p_ * branch[0].length + q_ * branch[1].length;
      e.attempts = 1 + p_ * branch[0].attempts + q_ * branch[1].attempts;
    }
    memo_.emplace(std::move(key), e);
    return e;
  }

 private:
  Scalar p_, q_;
  std::uint64_t depth_limit_;
  std::unordered_map<std::string, Expectation<Scalar>> memo_;
};

}  // namespace detail

/**
 * Exact expected final length and attempt count of `s` started on `initial`.
 * Stateless strategies are memoized on the anonymous configuration, stateful
 * ones on (ordered chain list, run memory). Stateful strategies see the
 * chains in increasing length order.
 */
template <class Scalar>
Expectation<Scalar> evaluate_strategy(const Strategy& s, const Configuration& initial,
                                      const Scalar& p) {
  check_probability(p);
  if (s.is_stateless()) {
    detail::StatelessEvaluator<Scalar> eval(static_cast<const StatelessStrategy&>(s), p);
    return eval(initial);
  }
  const auto state = IdentityConfiguration::from(initial);
  detail::StatefulEvaluator<Scalar> eval(p, initial.vertex_count());
  return eval(*s.start(state), state);
}

template <class Scalar>
Scalar strategy_quality(const Strategy& s, const Configuration& initial, const Scalar& p) {
  return evaluate_strategy(s, initial, p).length;
}

template <class Scalar>
Scalar expected_attempts(const Strategy& s, const Configuration& initial, const Scalar& p) {
  return evaluate_strategy(s, initial, p).attempts;
}

/// Every fusion the configuration admits, in lexicographic (k, l) order with k <= l.
inline std::vector<Action> feasible_actions(const Configuration& c) {
  std::vector<Action> out;
  const auto parts = c.parts();
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].count >= 2) out.push_back(Action::fuse(parts[i].length, parts[i].length));
    for (std::size_t j = i + 1; j < parts.size(); ++j) {
      out.push_back(Action::fuse(parts[i].length, parts[j].length));
    }
  }
  return out;
}

template <class Scalar>
struct QualityEntry {
  Scalar quality{0};
  Action action = Action::stop();
};

/**
 * Top-down optimal dynamic program over the configurations reachable from
 * a start state. Ties go to the lexicographically smallest (k, l).
 * `shave`, when non-zero, caps every chain at that length after each
 * fusion (the razor model).
 */
template <class Scalar>
class OptimalSolver {
 public:
  explicit OptimalSolver(Scalar p, Length shave = 0) : p_(std::move(p)), q_(1 - p_), shave_(shave) {
    check_probability(p_);
  }

  const QualityEntry<Scalar>& solve(const Configuration& c) {
    if (auto it = memo_.find(c); it != memo_.end()) return it->second;
    QualityEntry<Scalar> best;
    if (c.chain_count() <= 1) {
      best.quality = Scalar(c.total_length());
    } else {
      bool first = true;
      for (const Action& a : feasible_actions(c)) {
        const Scalar s = solve(shaved(apply_fusion(c, a, Outcome::success))).quality;
        const Scalar f = solve(shaved(apply_fusion(c, a, Outcome::failure))).quality;
        Scalar value = p_ * s + q_ * f;
        if (first || value > best.quality) {
          best.quality = std::move(value);
          best.action = a;
          first = false;
        }
      }
    }
    return memo_.emplace(c, std::move(best)).first->second;
  }

  const Scalar& probability() const { return p_; }
  std::size_t size() const { return memo_.size(); }

  /// The memoized policy as a lookup strategy.
  LookupStrategy policy(std::string name = "optimal") const {
    LookupStrategy::Table t;
    for (const auto& [c, e] : memo_) t.emplace(c, e.action);
    return LookupStrategy(std::move(t), std::move(name));
  }

 private:
  Configuration shaved(Configuration c) const {
    if (shave_ == 0 || c.largest() <= shave_) return c;
    Configuration out;
    for (const auto& part : c.parts()) out.add(std::min(part.length, shave_), part.count);
    return out;
  }

  Scalar p_, q_;
  Length shave_;
  std::unordered_map<Configuration, QualityEntry<Scalar>, ConfigurationHash> memo_;
};

/// Quality Q(C): the best expected final length any strategy achieves from `c`.
template <class Scalar>
Scalar optimal_quality(const Configuration& c, const Scalar& p) {
  OptimalSolver<Scalar> solver(p);
  return solver.solve(c).quality;
}

/// Expected attempts of the (tie-broken) optimal strategy started on `c`.
template <class Scalar>
Scalar optimal_attempts(const Configuration& c, const Scalar& p) {
  OptimalSolver<Scalar> solver(p);
  solver.solve(c);
  const auto policy = solver.policy();
  return expected_attempts(policy, c, p);
}

/**
 * Persisted optimal policy over every configuration of total length <= N,
 * at an exact success probability.
 */
class QualityTable {
 public:
  using Entry = QualityEntry<Rational>;

  QualityTable() = default;
  QualityTable(Length max_total, Rational p) : max_total_(max_total), p_(std::move(p)) {}

  Length max_total() const { return max_total_; }
  const Rational& probability() const { return p_; }
  std::size_t size() const { return order_.size(); }
  const std::vector<Configuration>& configurations() const { return order_; }

  const Entry* find(const Configuration& c) const {
    const auto it = entries_.find(c);
    return it == entries_.end() ? nullptr : &it->second;
  }

  const Entry& at(const Configuration& c) const {
    const Entry* e = find(c);
    if (!e) throw std::out_of_range("no table entry for {" + canonical_key(c) + "}");
    return *e;
  }

  void insert(const Configuration& c, Entry e) {
    if (entries_.emplace(c, std::move(e)).second) order_.push_back(c);
  }

  LookupStrategy as_strategy(std::string name = "optimal") const {
    LookupStrategy::Table t;
    t.reserve(entries_.size());
    for (const auto& [c, e] : entries_) t.emplace(c, e.action);
    return LookupStrategy(std::move(t), std::move(name));
  }

  /// Header "N=<N> ps=<num>/<den>", then "key<TAB>num/den<TAB>k,l|stop" in build order.
  void write(std::ostream& out) const {
    out << "N=" << max_total_ << " ps=" << format_exact(p_) << '\n';
    for (const auto& c : order_) {
      const Entry& e = entries_.at(c);
      out << canonical_key(c) << '\t' << format_exact(e.quality) << '\t'
          << format_action(e.action) << '\n';
    }
  }

  static QualityTable read(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("N=", 0) != 0) {
      throw std::invalid_argument("quality table: missing 'N=<N> ps=<p>' header");
    }
    const auto space = line.find(" ps=");
    if (space == std::string::npos) throw std::invalid_argument("quality table: malformed header");
    QualityTable t(static_cast<Length>(std::stoul(line.substr(2, space - 2))),
                   parse_fraction(line.substr(space + 4)));
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto tab1 = line.find('\t');
      const auto tab2 = tab1 == std::string::npos ? tab1 : line.find('\t', tab1 + 1);
      if (tab2 == std::string::npos) {
        throw std::invalid_argument("quality table line " + std::to_string(line_no) +
                                    ": expected three tab-separated fields");
      }
      const std::string_view view(line);
      t.insert(parse_configuration(view.substr(0, tab1)),
               Entry{parse_fraction(view.substr(tab1 + 1, tab2 - tab1 - 1)),
                     parse_action(view.substr(tab2 + 1))});
    }
    return t;
  }

 private:
  Length max_total_ = 0;
  Rational p_{1, 2};
  std::unordered_map<Configuration, Entry, ConfigurationHash> entries_;
  std::vector<Configuration> order_;
};

/**
 * Bottom-up build over all of C^(N), one vertex-count level at a time.
 * Every successor of a configuration has fewer vertices and no more edges,
 * so it is already in the table when needed. `max_entries` of zero means
 * unlimited; otherwise BudgetExceeded reports the last finished level.
 */
inline QualityTable build_quality_table(Length max_total, const Rational& p,
                                        std::size_t max_entries = 0) {
  check_probability(p);
  const Rational q = 1 - p;
  QualityTable table(max_total, p);
  const auto configs = enumerate_configurations(max_total);
  std::uint64_t finished_level = 0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const Configuration& c = configs[i];
    const std::uint64_t level = c.vertex_count();
    if (i > 0 && level != configs[i - 1].vertex_count()) {
      finished_level = configs[i - 1].vertex_count();
    }
    QualityTable::Entry best;
    if (c.chain_count() <= 1) {
      best.quality = Rational(c.total_length());
    } else {
      bool first = true;
      for (const Action& a : feasible_actions(c)) {
        const auto& s = table.at(apply_fusion(c, a, Outcome::success)).quality;
        const auto& f = table.at(apply_fusion(c, a, Outcome::failure)).quality;
        Rational value = p * s + q * f;
        if (first || value > best.quality) {
          best.quality = std::move(value);
          best.action = a;
          first = false;
        }
      }
    }
    table.insert(c, std::move(best));
    if (max_entries != 0 && table.size() > max_entries) {
      throw BudgetExceeded(finished_level, table.size() - 1);
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Event-tree oracle
// ---------------------------------------------------------------------------

template <class Scalar>
struct OutcomeDistribution {
  std::map<Configuration, Scalar> finals;
  Scalar mean_length{0};
  Scalar mean_attempts{0};
  std::size_t leaves = 0;

  Scalar total_probability() const {
    Scalar total{0};
    for (const auto& [c, p] : finals) total += p;
    return total;
  }
};

namespace detail {

template <class Scalar>
void walk_event_tree(const StrategyRun& run, const IdentityConfiguration& state,
                     const Scalar& weight, std::uint64_t attempts, const Scalar& p,
                     const Scalar& q, OutcomeDistribution<Scalar>& out) {
  const IndexedAction a = run.decide(state);
  if (a.stop) {
    if (state.size() > 1) throw InvalidStrategy("premature stop");
    out.finals[state.anonymous()] += weight;
    out.mean_length += weight * Scalar(state.total_length());
    out.mean_attempts += weight * Scalar(attempts);
    ++out.leaves;
    return;
  }
  if (!state.is_feasible(a)) throw InvalidStrategy("null fusion");
  for (Outcome o : {Outcome::success, Outcome::failure}) {
    auto next_run = run.clone();
    const auto next = state.apply(a, o);
    next_run->advance(a, o, next);
    walk_event_tree(*next_run, next, Scalar(weight * (o == Outcome::success ? p : q)), attempts + 1, p,
                    q, out);
  }
}

}  // namespace detail

/**
 * Ground truth by brute force: enumerates every event string with its exact
 * probability, without memoization, and collects the distribution of final
 * configurations. Guarded to small inputs.
 */
template <class Scalar>
OutcomeDistribution<Scalar> event_tree_oracle(const Strategy& s,
                                              const IdentityConfiguration& initial,
                                              const Scalar& p,
                                              std::uint64_t max_total_length = 14) {
  check_probability(p);
  if (initial.total_length() > max_total_length) {
    throw std::invalid_argument("event-tree oracle size guard: total length " +
                                std::to_string(initial.total_length()) + " > " +
                                std::to_string(max_total_length));
  }
  OutcomeDistribution<Scalar> out;
  const Scalar q = 1 - p;
  detail::walk_event_tree(*s.start(initial), initial, Scalar(1), 0, p, q, out);
  return out;
}

}  // namespace cluster_forge
