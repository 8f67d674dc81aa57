#pragma once

#include <limits>
#include <vector>

#include "cpwa/types.hpp"

namespace cpwa {

enum class LpStatus { Optimal, Infeasible, Unbounded };

/// min objective.x  s.t.  A x <= b,  var_lo <= x <= var_hi.
/// Bounds default to unbounded (+-inf entries allowed).
struct LpProblem {
  Vec objective;
  Mat A;   // may have zero rows
  Vec b;
  Vec var_lo;  // empty => all -inf
  Vec var_hi;  // empty => all +inf

  int num_vars() const { return static_cast<int>(objective.size()); }
  void add_row(const Vec& a, double rhs);
};

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Vec x;
  double objective = std::numeric_limits<double>::quiet_NaN();
};

/// Dense two-phase simplex with Bland's rule (deterministic pivoting).
LpSolution solve_lp(const LpProblem& problem);

}  // namespace cpwa
