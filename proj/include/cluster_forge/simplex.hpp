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

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

namespace cluster_forge {

enum class LpStatus { optimal, infeasible, unbounded };

template <class Scalar>
using Matrix = std::vector<std::vector<Scalar>>;

/// minimize c.x subject to A x <= b, x >= 0. `b` may have negative entries.
template <class Scalar>
struct LinearProgram {
  Matrix<Scalar> a;
  std::vector<Scalar> b;
  std::vector<Scalar> c;

  std::size_t rows() const { return a.size(); }
  std::size_t cols() const { return c.size(); }
};

template <class Scalar>
struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  std::vector<Scalar> x;
  Scalar objective{0};
};

template <class Scalar>
bool is_feasible(const LinearProgram<Scalar>& lp, const std::vector<Scalar>& x) {
  if (x.size() != lp.cols()) return false;
  for (const auto& v : x) {
    if (v < 0) return false;
  }
  for (std::size_t i = 0; i < lp.rows(); ++i) {
    Scalar lhs{0};
    for (std::size_t j = 0; j < lp.cols(); ++j) lhs += lp.a[i][j] * x[j];
    if (lhs > lp.b[i]) return false;
  }
  return true;
}

template <class Scalar>
Scalar objective_value(const std::vector<Scalar>& c, const std::vector<Scalar>& x) {
  Scalar total{0};
  for (std::size_t j = 0; j < c.size(); ++j) total += c[j] * x[j];
  return total;
}

namespace detail {

/// Dense tableau, two-phase, Bland's rule. Intended for tiny exact programs.
template <class Scalar>
class Tableau {
 public:
  explicit Tableau(const LinearProgram<Scalar>& lp) : n_(lp.cols()), m_(lp.rows()) {
    // Columns: originals [0, n), slacks [n, n+m), artificials after that.
    std::vector<std::size_t> needs_artificial;
    for (std::size_t i = 0; i < m_; ++i) {
      if (lp.b[i] < 0) needs_artificial.push_back(i);
    }
    width_ = n_ + m_ + needs_artificial.size();
    rows_.assign(m_, std::vector<Scalar>(width_ + 1, Scalar{0}));
    basis_.assign(m_, 0);
    std::size_t next_art = n_ + m_;
    for (std::size_t i = 0; i < m_; ++i) {
      const bool flip = lp.b[i] < 0;
      for (std::size_t j = 0; j < n_; ++j) rows_[i][j] = flip ? -lp.a[i][j] : lp.a[i][j];
      rows_[i][n_ + i] = flip ? Scalar{-1} : Scalar{1};
      rows_[i][width_] = flip ? -lp.b[i] : lp.b[i];
      if (flip) {
        rows_[i][next_art] = 1;
        basis_[i] = next_art++;
      } else {
        basis_[i] = n_ + i;
      }
    }
    artificial_begin_ = n_ + m_;
  }

  LpSolution<Scalar> solve(const std::vector<Scalar>& c) {
    LpSolution<Scalar> out;
    if (width_ > artificial_begin_) {
      std::vector<Scalar> phase1(width_, Scalar{0});
      for (std::size_t j = artificial_begin_; j < width_; ++j) phase1[j] = 1;
      run(phase1, width_);
      if (value(phase1) != 0) return out;
      evict_artificials();
    }
    std::vector<Scalar> cost(width_, Scalar{0});
    for (std::size_t j = 0; j < n_; ++j) cost[j] = c[j];
    if (!run(cost, artificial_begin_)) {
      out.status = LpStatus::unbounded;
      return out;
    }
    out.status = LpStatus::optimal;
    out.x.assign(n_, Scalar{0});
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (basis_[i] < n_) out.x[basis_[i]] = rows_[i][width_];
    }
    out.objective = objective_value(c, out.x);
    return out;
  }

 private:
  Scalar reduced_cost(const std::vector<Scalar>& cost, std::size_t j) const {
    Scalar r = cost[j];
    for (std::size_t i = 0; i < rows_.size(); ++i) r -= cost[basis_[i]] * rows_[i][j];
    return r;
  }

  Scalar value(const std::vector<Scalar>& cost) const {
    Scalar v{0};
    for (std::size_t i = 0; i < rows_.size(); ++i) v += cost[basis_[i]] * rows_[i][width_];
    return v;
  }

  /// Minimizes over columns [0, usable). Returns false when unbounded.
  bool run(const std::vector<Scalar>& cost, std::size_t usable) {
    for (;;) {
      std::optional<std::size_t> entering;
      for (std::size_t j = 0; j < usable; ++j) {
        if (reduced_cost(cost, j) < 0) {
          entering = j;
          break;
        }
      }
      if (!entering) return true;
      std::optional<std::size_t> leaving;
      Scalar best_ratio{0};
      for (std::size_t i = 0; i < rows_.size(); ++i) {
        const Scalar& coef = rows_[i][*entering];
        if (coef <= 0) continue;
        Scalar ratio = rows_[i][width_] / coef;
        if (!leaving || ratio < best_ratio ||
            (ratio == best_ratio && basis_[i] < basis_[*leaving])) {
          leaving = i;
          best_ratio = std::move(ratio);
        }
      }
      if (!leaving) return false;
      pivot(*leaving, *entering);
    }
  }

  void pivot(std::size_t r, std::size_t c) {
    const Scalar pv = rows_[r][c];
    for (auto& v : rows_[r]) v /= pv;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (i == r || rows_[i][c] == 0) continue;
      const Scalar factor = rows_[i][c];
      for (std::size_t j = 0; j <= width_; ++j) rows_[i][j] -= factor * rows_[r][j];
    }
    basis_[r] = c;
  }

  void evict_artificials() {
    for (std::size_t i = 0; i < rows_.size();) {
      if (basis_[i] < artificial_begin_) {
        ++i;
        continue;
      }
      std::optional<std::size_t> col;
      for (std::size_t j = 0; j < artificial_begin_; ++j) {
        if (rows_[i][j] != 0) {
          col = j;
          break;
        }
      }
      if (col) {
        pivot(i, *col);
        ++i;
      } else {
        rows_.erase(rows_.begin() + static_cast<std::ptrdiff_t>(i));
        basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(i));
      }
    }
  }

  std::size_t n_, m_, width_ = 0, artificial_begin_ = 0;
  Matrix<Scalar> rows_;
  std::vector<std::size_t> basis_;
};

}  // namespace detail

template <class Scalar>
LpSolution<Scalar> solve_lp(const LinearProgram<Scalar>& lp) {
  if (lp.b.size() != lp.rows()) throw std::invalid_argument("lp: b has wrong length");
  for (const auto& row : lp.a) {
    if (row.size() != lp.cols()) throw std::invalid_argument("lp: ragged constraint matrix");
  }
  return detail::Tableau<Scalar>(lp).solve(lp.c);
}

/**
 * Dual of  min c.x s.t. A x <= b, x >= 0,  written in the same form:
 *   min b.y s.t. -A^T y <= c, y >= 0,
 * whose optimum is the negated primal optimum.
 */
template <class Scalar>
LinearProgram<Scalar> dual_of(const LinearProgram<Scalar>& lp) {
  LinearProgram<Scalar> d;
  d.c = lp.b;
  d.b = lp.c;
  d.a.assign(lp.cols(), std::vector<Scalar>(lp.rows(), Scalar{0}));
  for (std::size_t i = 0; i < lp.rows(); ++i) {
    for (std::size_t j = 0; j < lp.cols(); ++j) d.a[j][i] = -lp.a[i][j];
  }
  return d;
}

}  // namespace cluster_forge
