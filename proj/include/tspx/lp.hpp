#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tspx/error.hpp"
#include "tspx/rational.hpp"

namespace tspx {

class IterationLimit : public InternalError {
 public:
  explicit IterationLimit(const std::string& what) : InternalError(what) {}
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "Optimal";
    case LpStatus::Infeasible: return "Infeasible";
    case LpStatus::Unbounded: return "Unbounded";
  }
  return "?";
}

struct LpVariable {
  Rational objective;
  Rational lower;                 // finite lower bound (0 by default)
  std::optional<Rational> upper;  // optional finite upper bound
};

struct LpRow {
  std::vector<std::pair<int, Rational>> coeffs;  // sparse (var index, coefficient)
  char sense = '=';                              // '<', '=', '>'
  Rational rhs;
};

// Minimization LP over rational data.
struct LpProblem {
  std::vector<LpVariable> vars;
  std::vector<LpRow> rows;

  int add_variable(Rational objective, Rational lower = Rational(0),
                   std::optional<Rational> upper = std::nullopt) {
    vars.push_back({std::move(objective), std::move(lower), std::move(upper)});
    return static_cast<int>(vars.size()) - 1;
  }

  void add_row(std::vector<std::pair<int, Rational>> coeffs, char sense, Rational rhs) {
    rows.push_back({std::move(coeffs), sense, std::move(rhs)});
  }

  void validate() const {
    for (const auto& v : vars)
      if (v.upper && *v.upper < v.lower) throw InputError("variable bounds inconsistent");
    for (const auto& r : rows) {
      if (r.sense != '<' && r.sense != '=' && r.sense != '>')
        throw InputError("row sense must be '<', '=' or '>'");
      for (const auto& [j, c] : r.coeffs)
        if (j < 0 || j >= static_cast<int>(vars.size()))
          throw InputError("row references invalid variable index");
    }
  }
};

// Dense-tableau simplex over exact rationals. Bland's rule is used for both
// the primal and the dual loop, which guarantees termination; the iteration
// limit is a guard only. Rows can be appended after an optimal solve and the
// solver reoptimizes with the dual simplex, which is what the cutting-plane
// driver relies on.
class SimplexSolver {
 public:
  explicit SimplexSolver(const LpProblem& p, long max_pivots = 2000000)
      : max_pivots_(max_pivots) {
    p.validate();
    ns_ = static_cast<int>(p.vars.size());
    lo_.reserve(ns_);
    cols_ = 0;
    for (const auto& v : p.vars) {
      lo_.push_back(v.lower);
      orig_cost_.push_back(v.objective);
      constant_ += v.objective * v.lower;
      state_.push_back(v.upper && *v.upper == v.lower ? ColState::Fixed : ColState::Normal);
      ++cols_;
    }
    for (const auto& r : p.rows) append_transformed_row(r);
    // upper bounds become rows in the shifted system
    for (int j = 0; j < ns_; ++j)
      if (p.vars[j].upper && state_[j] == ColState::Normal) {
        LpRow r;
        r.coeffs = {{j, Rational(1)}};
        r.sense = '<';
        r.rhs = *p.vars[j].upper;
        append_transformed_row(r);
      }
  }

  LpStatus solve() {
    status_ = run_two_phase();
    return status_;
  }

  // Appends rows to a solved-to-optimality tableau and reoptimizes.
  LpStatus add_rows_and_reoptimize(const std::vector<LpRow>& rows) {
    if (status_ != LpStatus::Optimal)
      throw InternalError("add_rows_and_reoptimize requires an optimal basis");
    for (const auto& r : rows) {
      int i = append_transformed_row(r);
      reduce_row_by_basis(i);
    }
    status_ = dual_loop() ? LpStatus::Optimal : LpStatus::Infeasible;
    return status_;
  }

  LpStatus status() const { return status_; }

  Rational objective_value() const {
    Rational z = -negz_;
    return z + constant_;
  }

  Rational variable_value(int j) const {
    Rational v = lo_[j];
    for (std::size_t i = 0; i < basis_.size(); ++i)
      if (basis_[i] == j) return v + rhs_[i];
    return v;
  }

  std::vector<Rational> variable_values() const {
    std::vector<Rational> out(lo_.begin(), lo_.end());
    for (std::size_t i = 0; i < basis_.size(); ++i)
      if (basis_[i] < ns_) out[basis_[i]] += rhs_[i];
    return out;
  }

  long pivot_count() const { return pivots_; }

 private:
  enum class ColState : unsigned char { Normal, Fixed, Dead };

  int new_column(ColState st) {
    for (auto& row : tab_) row.emplace_back(0);
    cost_.emplace_back(0);
    state_.push_back(st);
    return cols_++;
  }

  // Shifts out lower bounds, folds fixed variables into the rhs, converts
  // '>' to '<' and attaches a slack to inequalities. Returns the row index.
  int append_transformed_row(const LpRow& r) {
    std::vector<Rational> row(cols_, Rational(0));
    Rational rhs = r.rhs;
    for (const auto& [j, c] : r.coeffs) {
      rhs -= c * lo_[j];
      if (state_[j] == ColState::Fixed) continue;  // value folded via lo_
      row[j] += c;
    }
    if (r.sense != '=') {
      Rational sign(r.sense == '<' ? 1 : -1);
      for (auto& c : row) c *= sign;
      rhs *= sign;
      int s = new_column(ColState::Normal);
      row.resize(cols_, Rational(0));
      row[s] = 1;
      tab_.push_back(std::move(row));
      rhs_.push_back(std::move(rhs));
      basis_.push_back(s);  // provisional; phase 1 / reduce fixes it up
      return static_cast<int>(tab_.size()) - 1;
    }
    tab_.push_back(std::move(row));
    rhs_.push_back(std::move(rhs));
    basis_.push_back(-1);
    return static_cast<int>(tab_.size()) - 1;
  }

  // Eliminates basic variables from a freshly appended row so the tableau
  // stays in canonical form; the row's slack becomes basic.
  void reduce_row_by_basis(int i) {
    if (basis_[i] == -1) throw InternalError("cannot append an equality row after solve");
    for (std::size_t r = 0; r < tab_.size(); ++r) {
      if (static_cast<int>(r) == i) continue;
      int b = basis_[r];
      if (b == -1 || sgn(tab_[i][b]) == 0) continue;
      Rational f = tab_[i][b];
      axpy(tab_[i], tab_[r], f);
      rhs_[i] -= f * rhs_[r];
    }
  }

  static int sgn(const Rational& x) { return mpq_sgn(x.get_mpq_t()); }

  // dst -= f * src over all columns, skipping zeros in src
  void axpy(std::vector<Rational>& dst, const std::vector<Rational>& src, const Rational& f) {
    for (int j = 0; j < cols_; ++j)
      if (sgn(src[j]) != 0) dst[j] -= f * src[j];
  }

  void pivot(int r, int c) {
    if (++pivots_ > max_pivots_) throw IterationLimit("simplex pivot limit exceeded");
    Rational inv = 1 / tab_[r][c];
    if (inv != 1) {
      for (int j = 0; j < cols_; ++j)
        if (sgn(tab_[r][j]) != 0) tab_[r][j] *= inv;
      rhs_[r] *= inv;
      tab_[r][c] = 1;  // exact by construction
    }
    for (std::size_t i = 0; i < tab_.size(); ++i) {
      if (static_cast<int>(i) == r || sgn(tab_[i][c]) == 0) continue;
      Rational f = tab_[i][c];
      axpy(tab_[i], tab_[r], f);
      rhs_[i] -= f * rhs_[r];
    }
    if (sgn(cost_[c]) != 0) {
      Rational f = cost_[c];
      for (int j = 0; j < cols_; ++j)
        if (sgn(tab_[r][j]) != 0) cost_[j] -= f * tab_[r][j];
      negz_ -= f * rhs_[r];
    }
    basis_[r] = c;
  }

  // Primal simplex, Bland's rule: entering = lowest-index column with a
  // negative reduced cost, leaving = lowest basic index among ratio ties.
  bool primal_loop() {
    for (;;) {
      int c = -1;
      for (int j = 0; j < cols_; ++j)
        if (state_[j] == ColState::Normal && sgn(cost_[j]) < 0) {
          c = j;
          break;
        }
      if (c == -1) return true;
      int r = -1;
      Rational best;
      for (std::size_t i = 0; i < tab_.size(); ++i) {
        if (sgn(tab_[i][c]) <= 0) continue;
        Rational ratio = rhs_[i] / tab_[i][c];
        if (r == -1 || ratio < best || (ratio == best && basis_[i] < basis_[r])) {
          r = static_cast<int>(i);
          best = std::move(ratio);
        }
      }
      if (r == -1) return false;  // unbounded
      pivot(r, c);
    }
  }

  // Dual simplex, Bland-style: leaving = lowest basic index among infeasible
  // rows; entering = lowest index among dual ratio ties.
  bool dual_loop() {
    for (;;) {
      int r = -1;
      for (std::size_t i = 0; i < tab_.size(); ++i)
        if (sgn(rhs_[i]) < 0 && (r == -1 || basis_[i] < basis_[r]))
          r = static_cast<int>(i);
      if (r == -1) return true;
      int c = -1;
      Rational best;
      for (int j = 0; j < cols_; ++j) {
        if (state_[j] != ColState::Normal || sgn(tab_[r][j]) >= 0) continue;
        Rational ratio = cost_[j] / -tab_[r][j];
        if (c == -1 || ratio < best || (ratio == best && j < c)) {
          c = j;
          best = std::move(ratio);
        }
      }
      if (c == -1) return false;  // no way to restore feasibility
      pivot(r, c);
    }
  }

  LpStatus run_two_phase() {
    // phase 1: artificial basis
    const int m = static_cast<int>(tab_.size());
    for (int i = 0; i < m; ++i) {
      if (sgn(rhs_[i]) < 0) {
        for (int j = 0; j < cols_; ++j)
          if (sgn(tab_[i][j]) != 0) tab_[i][j] = -tab_[i][j];
        rhs_[i] = -rhs_[i];
      }
    }
    int art_base = cols_;
    for (int i = 0; i < m; ++i) {
      int a = new_column(ColState::Normal);
      tab_[i].resize(cols_, Rational(0));
      tab_[i][a] = 1;
      basis_[i] = a;
    }
    for (auto& row : tab_) row.resize(cols_, Rational(0));
    cost_.assign(cols_, Rational(0));
    negz_ = 0;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < cols_; ++j)
        if (sgn(tab_[i][j]) != 0) cost_[j] -= tab_[i][j];
      negz_ -= rhs_[i];
    }
    for (int a = art_base; a < cols_; ++a) cost_[a] += 1;
    if (!primal_loop()) throw InternalError("phase-1 LP unbounded");
    if (sgn(negz_) != 0) return LpStatus::Infeasible;  // -z > 0 impossible; z > 0 here
    // drive artificials out of the basis; drop rows that turn out redundant
    for (int i = static_cast<int>(tab_.size()) - 1; i >= 0; --i) {
      if (basis_[i] < art_base) continue;
      int c = -1;
      for (int j = 0; j < art_base; ++j)
        if (state_[j] == ColState::Normal && sgn(tab_[i][j]) != 0) {
          c = j;
          break;
        }
      if (c != -1) {
        pivot(i, c);
      } else {
        tab_.erase(tab_.begin() + i);
        rhs_.erase(rhs_.begin() + i);
        basis_.erase(basis_.begin() + i);
      }
    }
    for (int a = art_base; a < cols_; ++a) state_[a] = ColState::Dead;
    // phase 2: rebuild reduced costs for the true objective
    cost_.assign(cols_, Rational(0));
    for (int j = 0; j < ns_; ++j)
      if (state_[j] != ColState::Fixed) cost_[j] = orig_cost_[j];
    negz_ = 0;
    for (std::size_t i = 0; i < tab_.size(); ++i) {
      int b = basis_[i];
      if (b < ns_ && sgn(orig_cost_[b]) != 0) {
        Rational f = orig_cost_[b];
        for (int j = 0; j < cols_; ++j)
          if (sgn(tab_[i][j]) != 0) cost_[j] -= f * tab_[i][j];
        negz_ -= f * rhs_[i];
      }
    }
    return primal_loop() ? LpStatus::Optimal : LpStatus::Unbounded;
  }

  int ns_ = 0;
  int cols_ = 0;
  std::vector<Rational> lo_;
  std::vector<Rational> orig_cost_;
  std::vector<ColState> state_;
  std::vector<std::vector<Rational>> tab_;
  std::vector<Rational> rhs_;
  std::vector<Rational> cost_;
  std::vector<int> basis_;
  Rational negz_;
  Rational constant_;
  LpStatus status_ = LpStatus::Infeasible;
  long pivots_ = 0;
  long max_pivots_;
};

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Rational objective;
  std::vector<Rational> x;
};

// Basic (vertex) optimum of an LP with exact rational arithmetic.
inline LpResult simplex_solve(const LpProblem& p, long max_pivots = 2000000) {
  SimplexSolver solver(p, max_pivots);
  LpResult result;
  result.status = solver.solve();
  if (result.status == LpStatus::Optimal) {
    result.objective = solver.objective_value();
    result.x = solver.variable_values();
  }
  return result;
}

}  // namespace tspx
