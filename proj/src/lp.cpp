#include "cpwa/lp.hpp"

#include <cmath>

namespace cpwa {

namespace {

// Pivots smaller than this are rejected: dividing a row by a near-zero pivot
// amplifies roundoff enough to corrupt the tableau and report infeasible
// points as optimal.
constexpr double kPivotTol = 1e-7;
constexpr double kCostTol = 1e-9;

// Tableau for  min c.y  s.t.  A y = b, y >= 0, b >= 0, with a known basis.
struct Tableau {
  Mat A;
  Vec b;
  Vec c;
  std::vector<int> basis;  // basis[r] = column basic in row r
  double shift = 0.0;      // constant added to the objective

  int rows() const { return static_cast<int>(A.rows()); }
  int cols() const { return static_cast<int>(A.cols()); }

  void price_out_basis() {
    for (int r = 0; r < rows(); ++r) {
      const double cb = c[basis[r]];
      if (cb != 0.0) {
        c -= cb * A.row(r).transpose();
        shift += cb * b[r];
        c[basis[r]] = 0.0;
      }
    }
  }

  void pivot(int row, int col) {
    const double p = A(row, col);
    A.row(row) /= p;
    b[row] /= p;
    for (int r = 0; r < rows(); ++r) {
      if (r == row) continue;
      const double f = A(r, col);
      if (f != 0.0) {
        A.row(r) -= f * A.row(row);
        b[r] -= f * b[row];
      }
    }
    const double fc = c[col];
    if (fc != 0.0) {
      c -= fc * A.row(row).transpose();
      shift += fc * b[row];
    }
    basis[row] = col;
  }

  // Returns Optimal or Unbounded. Bland's rule throughout.
  LpStatus run(int allowed_cols) {
    for (;;) {
      int enter = -1;
      for (int j = 0; j < allowed_cols; ++j) {
        if (c[j] < -kCostTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return LpStatus::Optimal;
      int leave = -1;
      double best_ratio = 0.0;
      for (int r = 0; r < rows(); ++r) {
        const double a = A(r, enter);
        if (a > kPivotTol) {
          const double ratio = b[r] / a;
          if (leave < 0 || ratio < best_ratio - kPivotTol ||
              (ratio < best_ratio + kPivotTol && basis[r] < basis[leave])) {
            leave = r;
            best_ratio = ratio;
          }
        }
      }
      if (leave < 0) return LpStatus::Unbounded;
      pivot(leave, enter);
    }
  }
};

}  // namespace

void LpProblem::add_row(const Vec& a, double rhs) {
  const int n = num_vars();
  Mat na(A.rows() + 1, n);
  if (A.rows() > 0) na.topRows(A.rows()) = A;
  na.row(A.rows()) = a.transpose();
  A = std::move(na);
  Vec nb(b.size() + 1);
  if (b.size() > 0) nb.head(b.size()) = b;
  nb[b.size()] = rhs;
  b = std::move(nb);
}

LpSolution solve_lp(const LpProblem& problem) {
  const int n0 = problem.num_vars();
  const double inf = std::numeric_limits<double>::infinity();

  // Collect all inequalities: rows of A plus finite variable bounds.
  std::vector<Vec> rows;
  std::vector<double> rhs;
  for (int r = 0; r < problem.A.rows(); ++r) {
    rows.push_back(problem.A.row(r).transpose());
    rhs.push_back(problem.b[r]);
  }
  for (int j = 0; j < n0; ++j) {
    if (problem.var_lo.size() > 0 && problem.var_lo[j] > -inf) {
      Vec a = Vec::Zero(n0);
      a[j] = -1.0;
      rows.push_back(a);
      rhs.push_back(-problem.var_lo[j]);
    }
    if (problem.var_hi.size() > 0 && problem.var_hi[j] < inf) {
      Vec a = Vec::Zero(n0);
      a[j] = 1.0;
      rows.push_back(a);
      rhs.push_back(problem.var_hi[j]);
    }
  }
  const int m = static_cast<int>(rows.size());

  // Standard form: x = y+ - y-, slack per row, artificials where b < 0.
  const int n_split = 2 * n0;
  int n_art = 0;
  for (int r = 0; r < m; ++r)
    if (rhs[r] < 0.0) ++n_art;
  const int n_total = n_split + m + n_art;

  Tableau t;
  t.A = Mat::Zero(m, n_total);
  t.b = Vec::Zero(m);
  t.basis.resize(m);
  int art = n_split + m;
  for (int r = 0; r < m; ++r) {
    double sgn = 1.0;
    if (rhs[r] < 0.0) sgn = -1.0;
    for (int j = 0; j < n0; ++j) {
      t.A(r, 2 * j) = sgn * rows[r][j];
      t.A(r, 2 * j + 1) = -sgn * rows[r][j];
    }
    t.A(r, n_split + r) = sgn;  // slack
    t.b[r] = sgn * rhs[r];
    if (sgn < 0.0) {
      t.A(r, art) = 1.0;
      t.basis[r] = art;
      ++art;
    } else {
      t.basis[r] = n_split + r;
    }
  }

  // Phase 1.
  if (n_art > 0) {
    t.c = Vec::Zero(n_total);
    for (int j = n_split + m; j < n_total; ++j) t.c[j] = 1.0;
    t.shift = 0.0;
    t.price_out_basis();
    t.run(n_total);
    if (t.shift > 1e-7) {
      LpSolution sol;
      sol.status = LpStatus::Infeasible;
      return sol;
    }
    // Drive any residual artificials out of the basis.
    for (int r = 0; r < m; ++r) {
      if (t.basis[r] >= n_split + m) {
        int col = -1;
        for (int j = 0; j < n_split + m; ++j) {
          if (std::abs(t.A(r, j)) > kPivotTol) {
            col = j;
            break;
          }
        }
        if (col >= 0) t.pivot(r, col);
        // else the row is redundant; the artificial stays basic at zero.
      }
    }
  }

  // Phase 2 over the original + slack columns only.
  t.c = Vec::Zero(n_total);
  for (int j = 0; j < n0; ++j) {
    t.c[2 * j] = problem.objective[j];
    t.c[2 * j + 1] = -problem.objective[j];
  }
  t.shift = 0.0;
  t.price_out_basis();
  const LpStatus st = t.run(n_split + m);

  LpSolution sol;
  sol.status = st;
  if (st == LpStatus::Optimal) {
    Vec y = Vec::Zero(n_total);
    for (int r = 0; r < m; ++r) y[t.basis[r]] = t.b[r];
    sol.x = Vec(n0);
    for (int j = 0; j < n0; ++j) sol.x[j] = y[2 * j] - y[2 * j + 1];
    sol.objective = problem.objective.dot(sol.x);
  }
  return sol;
}

}  // namespace cpwa
