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
#include "cluster_forge/rational.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cluster_forge {

/// Outcome of checking one structural property over a set of configurations.
struct PropertyCheck {
  std::string name;
  std::uint64_t checked = 0;
  std::uint64_t violations = 0;
  std::string first_counterexample;

  bool holds() const { return violations == 0; }

  void record(bool ok, const std::string& where) {
    ++checked;
    if (!ok && violations++ == 0) first_counterexample = where;
  }
};

/// Configuration with one chain of length `from` replaced by `to` (0 means absent).
inline Configuration replace_chain(Configuration c, Length from, Length to) {
  if (from != 0) c.remove(from);
  if (to != 0) c.add(to);
  return c;
}

/**
 * Structural properties of the optimal quality over every configuration of
 * total length <= max_total, with unit changes taken in the identity
 * picture (one chain gains or loses one edge; a new EPR pair counts as a
 * chain growing from zero):
 *   more       Q(C + e_i) >= Q(C)
 *   win        Q(C_S) >= Q(C) >= Q(C_F) for the optimal action on C
 *   no-cat     Q(C + e_i) <= Q(C) + 1
 *   less-less  T(C - e_i) <= T(C), T the optimal policy's expected attempts
 *   attempts   Q(C) = L(C) - T(C)   (p = 1/2 only)
 */
inline std::vector<PropertyCheck> check_monotonicity_lemmas(Length max_total,
                                                            const Rational& p = Rational(1, 2)) {
  OptimalSolver<Rational> solver(p);
  const auto configs = enumerate_configurations(max_total + 1);
  for (const auto& c : configs) solver.solve(c);
  const LookupStrategy policy = solver.policy();
  detail::StatelessEvaluator<Rational> attempts(policy, p);

  PropertyCheck more{"more", 0, 0, {}}, win{"win", 0, 0, {}}, cat{"no-catalysis", 0, 0, {}},
      less{"less-less", 0, 0, {}}, lemma_attempts{"attempts", 0, 0, {}};
  const bool half = p == Rational(1, 2);
  for (const auto& c : configs) {
    if (c.total_length() > max_total) continue;
    const auto& entry = solver.solve(c);
    const Rational q = entry.quality;
    const std::string key = "{" + canonical_key(c) + "}";

    std::vector<Length> grow{0};
    for (const auto& part : c.parts()) grow.push_back(part.length);
    for (Length l : grow) {
      const Rational bigger = solver.solve(replace_chain(c, l, l + 1)).quality;
      const std::string where = key + " chain " + std::to_string(l) + "->" + std::to_string(l + 1);
      more.record(bigger >= q, where);
      cat.record(bigger <= q + 1, where);
    }

    const Rational t = attempts(c).attempts;
    for (const auto& part : c.parts()) {
      const Configuration smaller = replace_chain(c, part.length, part.length - 1);
      less.record(attempts(smaller).attempts <= t,
                  key + " chain " + std::to_string(part.length) + "->" +
                      std::to_string(part.length - 1));
    }
    if (half) lemma_attempts.record(q == Rational(c.total_length()) - t, key);

    if (!entry.action.is_stop()) {
      const Rational s = solver.solve(apply_fusion(c, entry.action, Outcome::success)).quality;
      const Rational f = solver.solve(apply_fusion(c, entry.action, Outcome::failure)).quality;
      win.record(s >= q && q >= f, key + " action " + format_action(entry.action));
    }
  }
  std::vector<PropertyCheck> out{more, win, cat, less};
  if (half) out.push_back(lemma_attempts);
  return out;
}

}  // namespace cluster_forge
