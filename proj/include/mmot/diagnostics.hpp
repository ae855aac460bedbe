#pragma once

#include "mmot/coupling.hpp"
#include "mmot/surplus.hpp"

namespace mmot {

struct SwapViolation {
  int entry_a = 0;  // positions in coupling.entries
  int entry_b = 0;
  double deficit = 0.0;  // improvement a swap would realize
};

struct SwapReport {
  int coordinate = 0;
  long pairs_checked = 0;
  std::vector<SwapViolation> violations;
};

/// Two-point feasible-perturbation test: for support tuples s, t and a
/// coordinate i, optimality forces
///   b(s) + b(t) >= b(s with i from t) + b(t with i from s) - tol.
SwapReport swap_monotonicity_check(const Coupling& c, const Surplus& s, int i,
                                   double tol = 1e-8);

struct SpacelikeReport {
  long pairs = 0;          // pairs within the locality radius
  long nonnegative = 0;    // pairs with q >= -tol
  double worst = 0.0;      // most negative q seen (0 when none)
  double fraction = 1.0;   // nonnegative / pairs (1 when no pairs)
  double delta_loc = 0.0;  // locality radius used
  // heuristic discretization of a tangent-space statement; not pass/fail
};

/// Chord form q(s; v) = sum_{i>=2} v_1^T D^2_{x_1 x_i} b(s) v_i over
/// support pairs whose first coordinates lie within delta_loc
/// (0.2 x first-coordinate support diameter).
SpacelikeReport spacelike_diagnostic(const Coupling& c, const Surplus& s,
                                     double tol = 1e-8);

struct MongeReport {
  bool is_graph = false;
  std::vector<int> tuples_per_first;      // per first-marginal atom in support
  std::vector<double> dominant_share;     // heaviest tuple mass share
  std::vector<int> first_atoms;           // the atom indices, in order
};

/// Groups support tuples by the first index; the plan is a graph over the
/// first variable iff each group is a single tuple.
MongeReport graph_check(const Coupling& c);

}  // namespace mmot
