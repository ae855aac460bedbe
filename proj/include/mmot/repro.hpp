#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mmot {

struct ReproCheck {
  std::string label;
  double claimed = 0.0;
  double computed = 0.0;
  double tolerance = 0.0;
  bool pass = false;  // |claimed - computed| <= tolerance
};

struct ReproReport {
  std::string name;
  std::string note;
  std::vector<ReproCheck> checks;
  bool pass = false;
};

/// The quadratic family collapses to a pairwise distance sum: checks the
/// optimal value against -(1/2m) sum_ij |x_i - x_j|^2 and the maximizer
/// against the coordinate mean on seeded tuples across m in {2,3,5} and
/// n in {1,2,3}.
ReproReport repro_quadratic_identity(int samples = 1000,
                                     std::uint64_t seed = 20240501);

/// The three-marginal cross-Hessian product C23 C13^{-1} C12 is symmetric
/// for every sup-form surplus but equals the asymmetric A for the direct
/// bilinear surplus, so the bilinear surplus cannot be of sup form.
ReproReport repro_symmetry_obstruction();

/// The soft-distance preference admits closed-form contract responses at
/// 0 and at p = (2.5, 0); the induced response matrix T has top eigenvalue
/// 1/sqrt(5) - 2/3 < 0, so the positive-definiteness condition fails.
ReproReport repro_condition_iii_failure();

/// Linear preferences against one conjugate head reproduce h(sum x_i) for
/// quadratic-form h, with the contract at 2 Q sum x_i.
ReproReport repro_heinich(std::uint64_t seed = 20240502);

std::vector<ReproReport> run_all_repro_cases();

/// Fixed-width pass/fail table, one line per check.
void print_repro_table(const std::vector<ReproReport>& reports,
                       std::ostream& os);

}  // namespace mmot
