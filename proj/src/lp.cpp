#include "mmot/lp.hpp"

#include <limits>
#include <vector>

#include "mmot/errors.hpp"

namespace mmot {

namespace {

constexpr double kPivotFloor = 1e-11;  // smallest usable pivot element

struct Tableau {
  RowMatrix t;             // rows x (ncols + 1), last column is the rhs
  Eigen::VectorXd red;     // reduced costs, ncols
  std::vector<int> basis;  // basic column per row
  int rows = 0;
  int ncols = 0;

  double rhs(int r) const { return t(r, ncols); }

  void pivot(int row, int col) {
    const double piv = t(row, col);
    t.row(row) /= piv;
    for (int i = 0; i < rows; ++i) {
      if (i == row) continue;
      const double f = t(i, col);
      if (f != 0.0) t.row(i) -= f * t.row(row);
    }
    const double d = red[col];
    if (d != 0.0) red -= d * t.row(row).head(ncols).transpose();
    basis[row] = col;
  }
};

// entering column or -1 when optimal; `allowed` bounds the searchable range
int choose_entering(const Tableau& tb, PivotRule rule, int allowed,
                    double tol) {
  if (rule == PivotRule::Bland) {
    for (int j = 0; j < allowed; ++j)
      if (tb.red[j] > tol) return j;
    return -1;
  }
  int best = -1;
  double best_val = tol;
  for (int j = 0; j < allowed; ++j) {
    if (tb.red[j] > best_val) {
      best_val = tb.red[j];
      best = j;
    }
  }
  return best;
}

// min-ratio row; ties broken by smallest basis index (anti-cycling)
int choose_leaving(const Tableau& tb, int col) {
  int row = -1;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < tb.rows; ++i) {
    const double a = tb.t(i, col);
    if (a <= kPivotFloor) continue;
    const double ratio = std::max(tb.rhs(i), 0.0) / a;
    if (ratio < best - 1e-15 ||
        (ratio <= best + 1e-15 && (row < 0 || tb.basis[i] < tb.basis[row]))) {
      best = ratio;
      row = i;
    }
  }
  return row;
}

long run_simplex(Tableau& tb, PivotRule rule, int allowed, double tol,
                 long max_pivots) {
  long pivots = 0;
  long stall = 0;
  PivotRule active = rule;
  while (true) {
    const int col = choose_entering(tb, active, allowed, tol);
    if (col < 0) return pivots;
    const int row = choose_leaving(tb, col);
    if (row < 0)
      throw SolverError("LP unbounded; transport polytopes are bounded, so "
                        "the constraint matrix is inconsistent");
    const double step = std::max(tb.rhs(row), 0.0) / tb.t(row, col);
    tb.pivot(row, col);
    ++pivots;
    if (pivots > max_pivots) throw SolverError("LP pivot limit exceeded");
    // Dantzig can cycle on degenerate vertices; hand over to Bland
    if (active == PivotRule::Dantzig) {
      stall = step <= 1e-14 ? stall + 1 : 0;
      if (stall > 2000) active = PivotRule::Bland;
    }
  }
}

}  // namespace

LpResult maximize_equality_lp(const Eigen::VectorXd& c, const RowMatrix& A,
                              const Eigen::VectorXd& b,
                              const LpSettings& settings) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  if (c.size() != n || b.size() != m)
    throw ValidationError("LP dimension mismatch");

  Tableau tb;
  tb.rows = m;
  tb.ncols = n + m;  // real variables then artificials
  tb.t.resize(m, tb.ncols + 1);
  tb.t.leftCols(n) = A;
  tb.t.middleCols(n, m) = RowMatrix::Identity(m, m);
  tb.t.col(tb.ncols) = b;
  for (int i = 0; i < m; ++i) {
    if (b[i] < 0.0) tb.t.row(i) = -tb.t.row(i);
  }
  tb.basis.resize(m);
  for (int i = 0; i < m; ++i) tb.basis[i] = n + i;

  // phase 1: max -sum(artificials); reduced cost of x_j is the column sum
  tb.red = Eigen::VectorXd::Zero(tb.ncols);
  tb.red.head(n) = tb.t.leftCols(n).colwise().sum();

  LpResult out;
  out.pivots_phase1 = run_simplex(tb, settings.pivot, n, settings.opt_tol,
                                  settings.max_pivots);

  double infeas = 0.0;
  for (int i = 0; i < m; ++i)
    if (tb.basis[i] >= n) infeas += std::max(tb.rhs(i), 0.0);
  if (infeas > settings.feas_tol)
    throw SolverError("LP infeasible (phase-1 residual " +
                      std::to_string(infeas) + ")");

  // pivot lingering zero-level artificials out on any usable real column
  for (int i = 0; i < m; ++i) {
    if (tb.basis[i] < n) continue;
    for (int j = 0; j < n; ++j) {
      if (std::abs(tb.t(i, j)) > 1e-9) {
        tb.pivot(i, j);
        break;
      }
    }
    // a row with no usable column is redundant; its artificial stays basic
    // at level zero and is never selected again
  }

  // phase 2 objective; artificials keep cost zero and cannot enter
  tb.red.setZero();
  tb.red.head(n) = c;
  for (int i = 0; i < m; ++i) {
    const int j = tb.basis[i];
    const double cb = j < n ? c[j] : 0.0;
    if (cb != 0.0) tb.red -= cb * tb.t.row(i).head(tb.ncols).transpose();
  }
  out.pivots_phase2 = run_simplex(tb, settings.pivot, n, settings.opt_tol,
                                  settings.max_pivots);

  out.x = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i) {
    if (tb.basis[i] < n) out.x[tb.basis[i]] = std::max(tb.rhs(i), 0.0);
  }
  out.objective = c.dot(out.x);
  return out;
}

}  // namespace mmot
