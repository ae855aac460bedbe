#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mmot/measure.hpp"

namespace mmot {

/// Linear/tuple index conversion over the product of support sizes.
/// The first index varies slowest.
class TupleIndexer {
 public:
  explicit TupleIndexer(std::vector<int> sizes);

  long count() const { return count_; }
  int arity() const { return static_cast<int>(sizes_.size()); }
  const std::vector<int>& sizes() const { return sizes_; }

  std::vector<int> tuple(long linear) const;
  long linear(const std::vector<int>& tuple) const;

 private:
  std::vector<int> sizes_;
  std::vector<long> strides_;
  long count_ = 1;
};

struct CouplingEntry {
  std::vector<int> idx;  // one atom index per marginal
  double mass = 0.0;
};

struct SolverInfo {
  std::string method;          // "exact-lp" or "entropic"
  std::string pivot_rule;      // exact only
  long pivots_phase1 = 0;
  long pivots_phase2 = 0;
  long iterations = 0;         // entropic sweeps
  double eps = 0.0;            // entropic regularization
  double regularized_objective = 0.0;
  double marginal_violation = 0.0;  // worst per-atom violation at return
  bool log_domain = false;
};

/// Sparse plan over the product of the marginal supports. Produced by the
/// solvers; open data plus free validators rather than a guarded class, so
/// diagnostics and serialization can work on partial or hand-built plans.
struct Coupling {
  std::vector<CouplingEntry> entries;
  std::vector<DiscreteMeasure> marginals;
  double objective = 0.0;
  SolverInfo info;

  int arity() const { return static_cast<int>(marginals.size()); }
  double total_mass() const;

  /// Coordinates of the support tuple behind an entry.
  std::vector<Vector> tuple_points(const CouplingEntry& e) const;
};

/// Mass of the i-th marginal of the plan, atom by atom.
std::vector<double> marginal_masses(const Coupling& c, int i);

/// i-th marginal as a measure on the i-th support.
DiscreteMeasure marginal(const Coupling& c, int i);

/// Worst per-atom deviation of any marginal from its target.
double marginal_violation(const Coupling& c);

/// Positivity, arity and index-range checks plus total mass within tol.
void validate_coupling(const Coupling& c, double total_tol = 1e-12);

/// Image measure of the plan under a tuple -> point map, with merging.
DiscreteMeasure pushforward(
    const Coupling& c,
    const std::function<Vector(const std::vector<Vector>&)>& map,
    double merge_tol = kMergeTol);

}  // namespace mmot
