#pragma once

#include <Eigen/Dense>

#include "mmot/problem.hpp"

namespace mmot {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct LpSettings {
  PivotRule pivot = PivotRule::Bland;
  double feas_tol = 1e-9;
  double opt_tol = 1e-10;
  long max_pivots = 1000000;
};

struct LpResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  long pivots_phase1 = 0;
  long pivots_phase2 = 0;
};

/// Solves  max c.x  subject to  A x = b, x >= 0  by two-phase primal
/// simplex on the dense tableau. A must have full row rank; b may have any
/// sign (rows are flipped internally). Throws SolverError on infeasibility
/// or pivot exhaustion; bounded feasible problems always terminate under
/// the Bland rule, and the Dantzig rule falls back to Bland when it stalls.
LpResult maximize_equality_lp(const Eigen::VectorXd& c, const RowMatrix& A,
                              const Eigen::VectorXd& b,
                              const LpSettings& settings = {});

}  // namespace mmot
