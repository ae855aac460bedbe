#pragma once

#include "mmot/coupling.hpp"
#include "mmot/problem.hpp"

namespace mmot {

/// Exact maximizer of sum_t gamma_t b(t) over plans with the prescribed
/// marginals, by dense-tableau simplex. One redundant row per extra
/// marginal group is dropped; the returned plan is an optimal vertex.
/// Throws ValidationError when the variable count exceeds the cap.
Coupling solve_mk_exact(const Problem& problem);

/// Entropically regularized plan by iterative proportional scaling over
/// the m marginal groups. Runs in the scaled domain for eps >= 1e-2 and in
/// the log domain below; a scaled-domain under/overflow restarts the run
/// in the log domain. Entries below 1e-14 are pruned and the plan is
/// renormalized to unit mass; the achieved marginal violation is reported
/// in info. Throws SolverError on non-convergence.
Coupling solve_mk_entropic(const Problem& problem, double eps);
Coupling solve_mk_entropic(const Problem& problem);  // settings.entropic_eps

/// Surplus values on the full tuple grid (first index slowest).
std::vector<double> surplus_tensor(const Problem& problem,
                                   const TupleIndexer& indexer);

}  // namespace mmot
