#pragma once

#include <string>

#include "mmot/surplus.hpp"

namespace mmot {

struct ConditionSampleSpec {
  Box x_box;               // sampling region for agent types
  int tuples = 40;         // sampled tuples for H2/H3 and condition III
  int pair_samples = 200;  // sampled pairs for H1/H4/H5
  std::uint64_t seed = 0;
};

struct ConditionCheck {
  std::string name;
  double margin = 0.0;  // the quantity defined per check; sign carries pass
  bool pass = false;
  long samples = 0;
  std::vector<Vector> witness;  // points realizing the worst margin
};

/// Certificate over samples only; never exhaustive.
struct ConditionReport {
  std::vector<ConditionCheck> checks;
  bool all_pass = false;
  std::string note;
};

/// Samples the declared domains and measures, per hypothesis:
///  - non-degeneracy: min |det D^2_{x z} f_i| over (x, z) pairs,
///  - unique inner maximizer: max multistart spread over tuples,
///  - curvature: max eigenvalue of B over tuples (pass when < 0),
///  - twist in each argument: min separation ratio of the gradient maps
///    over distinct sampled pairs (pass when > 1e-8),
///  - condition III: min eigenvalue of T over sampled argument choices
///    (pass when > 0).
ConditionReport check_conditions(const Surplus& surplus,
                                 const ConditionSampleSpec& spec);

}  // namespace mmot
