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
#include "cluster_forge/simplex.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace cluster_forge {

/// A computed bound disagreed with its independent certificate.
class CertificateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Razor model
// ---------------------------------------------------------------------------

/// Optimal expected final length, and minimal expected attempts, in the razor model.
struct RazorResult {
  Rational quality;
  Rational attempts;
};

/**
 * Razor model with parameter R: after every fusion each chain longer than R
 * is cut back to R. The two objectives are optimized independently; the
 * minimal attempt count bounds the attempts of the full model from below.
 */
class RazorModel {
 public:
  RazorModel(Length cap, Rational p = Rational(1, 2)) : cap_(cap), p_(std::move(p)), q_(1 - p_) {
    if (cap_ < 2) throw std::invalid_argument("razor parameter must be at least 2");
    check_probability(p_);
  }

  Length cap() const { return cap_; }
  std::size_t states() const { return memo_.size(); }

  const RazorResult& solve(const Configuration& c) {
    if (auto it = memo_.find(c); it != memo_.end()) return it->second;
    RazorResult r{Rational(c.total_length()), Rational(0)};
    if (c.chain_count() > 1) {
      bool first = true;
      for (const Action& a : feasible_actions(c)) {
        const RazorResult s = solve(shave(apply_fusion(c, a, Outcome::success)));
        const RazorResult f = solve(shave(apply_fusion(c, a, Outcome::failure)));
        Rational quality = p_ * s.quality + q_ * f.quality;
        Rational attempts = 1 + p_ * s.attempts + q_ * f.attempts;
        if (first || quality > r.quality) r.quality = std::move(quality);
        if (first || attempts < r.attempts) r.attempts = std::move(attempts);
        first = false;
      }
    }
    return memo_.emplace(c, std::move(r)).first->second;
  }

  Configuration shave(const Configuration& c) const {
    if (c.largest() <= cap_) return c;
    Configuration out;
    for (const auto& part : c.parts()) out.add(std::min(part.length, cap_), part.count);
    return out;
  }

 private:
  Length cap_;
  Rational p_, q_;
  std::unordered_map<Configuration, RazorResult, ConfigurationHash> memo_;
};

inline RazorResult razor_quality(Count n, Length cap, const Rational& p = Rational(1, 2)) {
  RazorModel model(cap, p);
  return model.solve(Configuration::epr_pairs(n));
}

/// N minus the razor model's minimal expected attempts; bounds Q(N) from above.
inline Rational razor_upper_bound(Count n, Length cap) {
  return Rational(n) - razor_quality(n, cap).attempts;
}

// ---------------------------------------------------------------------------
// Linear program for the R = 2 random walk
// ---------------------------------------------------------------------------

/**
 * Mean moves of the three R = 2 actions in the (EPR pairs, length-2 chains)
 * plane: fuse 1+1, fuse 1+2, fuse 2+2. One row per action.
 */
inline Matrix<Rational> mean_move_matrix() {
  return {{Rational(-2), Rational(1, 2)},
          {Rational(-1, 2), Rational(-1, 2)},
          {Rational(1), Rational(-3, 2)}};
}

/// minimize (1,1,1).x subject to x B <= (1 - N, 1), x >= 0.
inline LinearProgram<Rational> attempts_program(Count n) {
  const auto moves = mean_move_matrix();
  LinearProgram<Rational> lp;
  lp.c = {Rational(1), Rational(1), Rational(1)};
  lp.b = {Rational(1) - Rational(n), Rational(1)};
  lp.a.assign(2, std::vector<Rational>(3));
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 3; ++j) lp.a[i][j] = moves[j][i];
  }
  return lp;
}

struct AttemptsCertificate {
  Rational objective;
  std::vector<Rational> primal;        // simplex
  std::vector<Rational> dual;          // simplex on the dual program
  std::vector<Rational> known_primal;  // closed-form pair
  std::vector<Rational> known_dual;
};

/// Closed-form optimum of the attempts program: 0, (N-1)/2 for N <= 5, (4(N-1)-6)/5 beyond.
inline Rational attempts_closed_form(Count n) {
  if (n <= 1) return Rational(0);
  if (n <= 5) return Rational(n - 1, 2);
  return Rational(4 * (static_cast<std::int64_t>(n) - 1) - 6, 5);
}

/**
 * Solves the attempts program and its dual by simplex and checks them
 * against each other and against the closed-form primal/dual pair.
 * Any disagreement throws CertificateError.
 */
inline AttemptsCertificate certify_attempts_bound(Count n) {
  if (n < 1) throw std::domain_error("attempts bound needs N >= 1");
  const auto primal_lp = attempts_program(n);
  const auto dual_lp = dual_of(primal_lp);
  const auto primal = solve_lp(primal_lp);
  const auto dual = solve_lp(dual_lp);
  const std::string where = " (N=" + std::to_string(n) + ")";
  if (primal.status != LpStatus::optimal || dual.status != LpStatus::optimal) {
    throw CertificateError("attempts program not solved to optimality" + where);
  }
  if (primal.objective != -dual.objective) {
    throw CertificateError("duality gap " + format_exact(primal.objective + dual.objective) + where);
  }

  AttemptsCertificate cert;
  cert.objective = primal.objective;
  cert.primal = primal.x;
  cert.dual = dual.x;
  const Rational nn(n);
  if (n == 1) {
    cert.known_primal = {0, 0, 0};
    cert.known_dual = {0, 0};
  } else if (n <= 5) {
    cert.known_primal = {(nn - 1) / 2, 0, 0};
    cert.known_dual = {Rational(1, 2), 0};
  } else {
    cert.known_primal = {2 * nn / 5, 2 * (nn / 5 - 1), 0};
    cert.known_dual = {Rational(4, 5), Rational(6, 5)};
  }
  if (!is_feasible(primal_lp, cert.known_primal) || !is_feasible(dual_lp, cert.known_dual)) {
    throw CertificateError("closed-form primal/dual pair infeasible" + where);
  }
  const Rational known_primal = objective_value(primal_lp.c, cert.known_primal);
  const Rational known_dual = -objective_value(dual_lp.c, cert.known_dual);
  if (known_primal != known_dual || known_primal != cert.objective ||
      cert.objective != attempts_closed_form(n)) {
    throw CertificateError("closed-form certificate disagrees with simplex optimum " +
                           format_exact(cert.objective) + where);
  }
  return cert;
}

/// Lower bound on the attempts of any strategy starting from N EPR pairs.
inline Rational lp_attempts_bound(Count n) { return certify_attempts_bound(n).objective; }

/// Q(N) <= N/5 + 2, valid for N >= 6.
inline Rational analytic_upper_bound(Count n) {
  if (n < 6) {
    throw std::domain_error("N/5 + 2 holds for N >= 6; use lp_attempts_bound for N = " +
                            std::to_string(n));
  }
  return Rational(n, 5) + 2;
}

// ---------------------------------------------------------------------------
// Lower bounds
// ---------------------------------------------------------------------------

/// Yield of running a strategy on k independent parts and then joining the results insistently.
inline Rational combine_lower_bound(std::span<const Rational> parts) {
  if (parts.empty()) throw std::invalid_argument("combine_lower_bound needs at least one part");
  Rational total(0);
  for (const auto& q : parts) total += q;
  return total - 2 * Rational(parts.size() - 1);
}

/// Q(e_a + e_b) = a + b - 2 + 2^(1 - min(a, b)).
inline Rational two_chain_quality(Length a, Length b) {
  const Length m = std::min(a, b);
  if (m == 0) return Rational(a + b);
  Rational tail(1);
  for (Length i = 1; i < m; ++i) tail /= 2;
  return Rational(a) + Rational(b) - 2 + tail;
}

/// Sum_{i < min(a,b)} 2^-i, the attempts any strategy spends on e_a + e_b at p = 1/2.
inline Rational two_chain_attempts(Length a, Length b) {
  Rational total(0), term(1);
  for (Length i = 0; i < std::min(a, b); ++i) {
    total += term;
    term /= 2;
  }
  return total;
}

/// The linear-growth hypothesis failed for these block sizes.
class HypothesisViolation : public std::runtime_error {
 public:
  explicit HypothesisViolation(std::vector<Count> failing)
      : std::runtime_error(describe(failing)), failing_(std::move(failing)) {}
  const std::vector<Count>& failing() const { return failing_; }

 private:
  static std::string describe(const std::vector<Count>& failing) {
    std::string s = "(Q(n)-2)/n >= (Q(N0)-2)/N0 fails for n =";
    for (Count n : failing) s += " " + std::to_string(n);
    return s;
  }
  std::vector<Count> failing_;
};

/// Which block sizes the linear-growth hypothesis is checked on.
enum class BlockParity { all, even };

/// Q(N) >= base + slope * (N - n0) for N >= n0 (even N only when `even_only`).
struct LinearLowerBound {
  Count n0 = 0;
  Rational base;
  Rational slope;
  bool even_only = false;

  Rational operator()(Count n) const {
    if (n < n0) {
      throw std::domain_error("linear lower bound only holds for N >= " + std::to_string(n0));
    }
    if (even_only && n % 2 != 0) {
      throw std::domain_error("lower bound was certified for even N only");
    }
    return base + slope * Rational(n - n0);
  }
};

/**
 * Block construction lower bound. `yields[n]` is a strategy's exact expected
 * length on n EPR pairs for n = 0..2*n0. Requires
 * (yields[n]-2)/n >= (yields[n0]-2)/n0 for n0 <= n <= 2*n0.
 *
 * Odd block counts lag their even neighbours, so for large n0 the
 * hypothesis typically holds on even n only. With BlockParity::even (and an
 * even n0) only even n are checked, and the resulting bound applies to even
 * N, whose block decomposition N = k*n0 + M uses even blocks throughout.
 */
inline LinearLowerBound block_lower_bound(Count n0, std::span<const Rational> yields,
                                          BlockParity parity = BlockParity::all) {
  if (n0 < 1) throw std::invalid_argument("block size must be positive");
  if (parity == BlockParity::even && n0 % 2 != 0) {
    throw std::invalid_argument("even-only block bound needs an even N0");
  }
  if (yields.size() <= 2 * std::size_t{n0}) {
    throw std::invalid_argument("block lower bound needs yields for every n <= 2*N0 = " +
                                std::to_string(2 * n0));
  }
  const Rational slope = (yields[n0] - 2) / Rational(n0);
  std::vector<Count> failing;
  const Count step = parity == BlockParity::even ? 2 : 1;
  for (Count n = n0; n <= 2 * n0; n += step) {
    if ((yields[n] - 2) / Rational(n) < slope) failing.push_back(n);
  }
  if (!failing.empty()) throw HypothesisViolation(std::move(failing));
  return {n0, yields[n0], slope, parity == BlockParity::even};
}

/// Exact Modesty yields on n EPR pairs for n = 0..max_n, sharing one memo.
inline std::vector<Rational> modesty_yields(Count max_n, const Rational& p = Rational(1, 2)) {
  Modesty modesty;
  detail::StatelessEvaluator<Rational> eval(modesty, p);
  std::vector<Rational> out;
  out.reserve(max_n + 1);
  for (Count n = 0; n <= max_n; ++n) out.push_back(eval(Configuration::epr_pairs(n)).length);
  return out;
}

inline Rational modesty_lower_bound(Count n, Count n0, std::span<const Rational> modesty_table,
                                    BlockParity parity = BlockParity::all) {
  return block_lower_bound(n0, modesty_table, parity)(n);
}

/**
 * Yield guarantee for the blocks-of-eight strategy at N = 2^(3+m):
 * (137/2048) N + 2, the constant (Q(8) - 2)/8 with Q(8) = 649/256.
 */
inline Rational static_lower_bound(Count n) {
  if (n < 8 || (n & (n - 1)) != 0) {
    throw std::domain_error("static bound needs N = 2^(3+m), got " + std::to_string(n));
  }
  return Rational(137, 2048) * Rational(n) + 2;
}

// ---------------------------------------------------------------------------
// Greed
// ---------------------------------------------------------------------------

/// 2 Sum_{k <= (N-1)/2} 2^-N C(N,k) (N-2k), exactly.
inline Rational greed_closed_form_exact(Count n) {
  BigInt binom = 1;
  BigInt acc = 0;
  for (Count k = 0; 2 * k + 1 <= n; ++k) {
    acc += binom * BigInt(n - 2 * k);
    binom = binom * BigInt(n - k) / BigInt(k + 1);
  }
  BigInt den = 1;
  den <<= n;
  return Rational(2 * acc, den);
}

/// Same sum evaluated in log space; usable for large N.
inline double greed_closed_form(Count n) {
  const double nn = n;
  const double lg_n1 = std::lgamma(nn + 1);
  double total = 0;
  for (Count k = 0; 2 * k + 1 <= n; ++k) {
    const double log_term = lg_n1 - std::lgamma(k + 1.0) - std::lgamma(nn - k + 1) -
                            nn * std::numbers::ln2 + std::log(nn - 2.0 * k);
    total += std::exp(log_term);
  }
  return 2 * total;
}

inline double greed_asymptotic(Count n) { return std::sqrt(2.0 * n / std::numbers::pi); }

/// Chain length 2(1-p)/p beyond which insistent pairwise joining grows linearly.
template <class Scalar>
Scalar general_ps_initial_length(const Scalar& p) {
  check_probability(p);
  return 2 * (1 - p) / p;
}

// ---------------------------------------------------------------------------
// Inverse question
// ---------------------------------------------------------------------------

struct ResourceBounds {
  double sufficient;    // (1/alpha + eps) L pairs suffice asymptotically
  double insufficient;  // (1/alpha - eps) L pairs do not
};

inline ResourceBounds inverse_resource_bounds(double length, double alpha, double epsilon) {
  if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be strictly positive");
  if (!(alpha > 0)) throw std::invalid_argument("alpha must be strictly positive");
  return {(1 / alpha + epsilon) * length, (1 / alpha - epsilon) * length};
}

}  // namespace cluster_forge
