#pragma once

#include "mmot/coupling.hpp"
#include "mmot/problem.hpp"

namespace mmot {

/// Mass share below which a split image still counts as a single-valued map.
inline constexpr double kTieTol = 1e-6;

struct PlanEntry {
  int zi = 0;  // atom index in nu
  int xi = 0;  // atom index in mu
  double mass = 0.0;
};

/// Optimal two-marginal plan between contracts nu and one agent category.
struct TransportPlan {
  std::vector<PlanEntry> entries;
  DiscreteMeasure nu;
  DiscreteMeasure mu;
  double value = 0.0;  // sum mass * f(x, z)

  std::vector<double> nu_masses() const;
  std::vector<double> mu_masses() const;
};

/// Exact LP optimum of sup sum f(x, z) dpi over plans with marginals nu
/// and mu. Throws ValidationError when |nu| * |mu| exceeds the cap.
TransportPlan solve_ot2(const PreferenceFunction& f, const DiscreteMeasure& nu,
                        const DiscreteMeasure& mu,
                        const SolverSettings& settings = {});

/// sum_i T_{f_i}(nu, mu_i). Needs a sup-form oracle in the problem.
double mam_objective(const DiscreteMeasure& nu, const Problem& problem);

struct MamSolution {
  DiscreteMeasure nu;
  Coupling coupling;  // the exact transport plan behind nu
};

/// Exact contract measure: solve the multi-marginal problem and push the
/// optimal plan forward through the inner maximizer.
MamSolution solve_mam_via_mk(const Problem& problem);

/// Product-of-conditionals coupling built from m two-marginal plans that
/// share the contract marginal nu. Feasible for the multi-marginal problem
/// by construction. Throws ValidationError when a plan's nu-side marginal
/// disagrees with nu.
Coupling glue_plans(const DiscreteMeasure& nu,
                    const std::vector<TransportPlan>& plans,
                    const Surplus& surplus);

struct FixedPointResult {
  DiscreteMeasure nu;
  std::vector<double> trace;  // accepted objective values, non-decreasing
  int outer_iters = 0;
  bool converged = false;          // improvement fell below 1e-9
  std::vector<int> frozen_atoms;   // relocation failures, if any
};

/// Free-support alternating maximization: re-solve the m plans, then move
/// each contract atom to the maximizer of its plan-weighted payoff. A
/// local method; the trace is non-decreasing by construction and an
/// unexplained decrease aborts with InternalError.
FixedPointResult solve_mam_fixed_point(const Problem& problem,
                                       const DiscreteMeasure& init,
                                       int max_outer = 100);

/// Tabulated map from contract atoms to one agent category.
struct MongeMap {
  DiscreteMeasure domain;        // canonical nu
  std::vector<int> to_index;     // dominant image atom per domain atom
  std::vector<Vector> to_point;
  std::vector<double> share;     // mass share of the dominant image

  bool pure(double tau = kTieTol) const;
  double worst_share() const;
};

struct MongeExtraction {
  DiscreteMeasure nu;           // canonical order used by all maps
  std::vector<MongeMap> maps;   // one per marginal
  bool all_pure = false;
};

/// Re-solves the m plans against nu (in canonical atom order, so the
/// result is invariant under relabeling) and reads off dominant images.
/// Tie failures are flagged, not thrown.
MongeExtraction extract_monge_maps(const DiscreteMeasure& nu,
                                   const Problem& problem);

/// G_i = F_i after inverting F_1 on its image. Throws ValidationError when
/// two contract atoms share an F_1 image (the colliding pair is named).
std::vector<MongeMap> compose_monge_maps(const std::vector<MongeMap>& maps);

struct EquivalenceReport {
  double mk_value = 0.0;
  double mam_value = 0.0;
  double glued_value = 0.0;
  double gap = 0.0;  // |mk - mam|
  std::vector<double> t_values;
  int nu_support = 0;
  int gamma_support = 0;
  bool ce_pure = false;   // every plan a graph over nu
  bool cmn_pure = false;  // gamma a graph over the first variable
  bool reconstruction_checked = false;
  double reconstruction_linf = 0.0;  // gamma vs (F_1,...,F_m)#nu
  double pivot_value_gap = 0.0;      // |bland - dantzig| objective
  double pivot_coupling_linf = 0.0;  // entrywise plan disagreement
};

/// Runs both formulations on one instance and cross-checks them. Value
/// disagreements beyond 1e-7 relative are toolkit defects and throw
/// InternalError.
EquivalenceReport verify_equivalence(const Problem& problem);

}  // namespace mmot
