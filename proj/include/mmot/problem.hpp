#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "mmot/measure.hpp"
#include "mmot/surplus.hpp"

namespace mmot {

enum class PivotRule { Bland, Dantzig };

struct SolverSettings {
  PivotRule pivot = PivotRule::Bland;
  double feas_tol = 1e-9;
  double opt_tol = 1e-10;
  long variable_cap = 20000;  // product of support sizes
  double entropic_eps = 1e-3;
  long entropic_max_iter = 50000;
  double entropic_marginal_tol = 1e-8;
};

/// The data of one transport instance: m marginals on a common R^n plus
/// the surplus pricing their tuples. Immutable after construction; safe to
/// share across concurrent solver runs.
struct Problem {
  std::vector<DiscreteMeasure> marginals;
  std::shared_ptr<const Surplus> surplus;
  SolverSettings settings;

  Problem(std::vector<DiscreteMeasure> marginals_,
          std::shared_ptr<const Surplus> surplus_, SolverSettings settings_ = {});

  int arity() const { return static_cast<int>(marginals.size()); }
  int dim() const { return marginals.front().dim(); }

  /// The oracle when the surplus is of sup form, else null.
  const SurplusOracle* oracle() const {
    return dynamic_cast<const SurplusOracle*>(surplus.get());
  }
};

enum class WeightScheme { Uniform, Random };

struct InstanceSpec {
  int m = 2;
  int n = 1;
  int atoms = 2;          // per marginal
  Vector box_lo;          // defaults to -1
  Vector box_hi;          // defaults to +1
  WeightScheme weights = WeightScheme::Uniform;
  std::uint64_t seed = 0;
};

/// Deterministic in the seed. Atoms are drawn uniformly in the box and get
/// a tiny jitter (1e-7 of the box diameter) so no two atoms coincide.
std::vector<DiscreteMeasure> generate_marginals(const InstanceSpec& spec);

/// Marginals as above with a quadratic-preference oracle sized to them.
Problem generate_instance(const InstanceSpec& spec);

/// Same marginals, caller-chosen preference kinds ("quadratic", "brenier",
/// "concave_sum"; "heinich" builds the linear-plus-head family).
Problem generate_instance(const InstanceSpec& spec,
                          const std::vector<std::string>& pref_kinds);

/// Oracle whose search box is sized to the marginals of the problem.
std::shared_ptr<SurplusOracle> make_oracle_for(
    const std::vector<DiscreteMeasure>& marginals,
    const std::vector<std::string>& pref_kinds, NewtonSettings newton = {});

}  // namespace mmot
