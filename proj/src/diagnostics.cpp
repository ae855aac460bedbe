#include "mmot/diagnostics.hpp"

#include <map>

#include "mmot/errors.hpp"

namespace mmot {

SwapReport swap_monotonicity_check(const Coupling& c, const Surplus& s, int i,
                                   double tol) {
  if (i < 0 || i >= c.arity())
    throw ValidationError("swap coordinate out of range");
  SwapReport report;
  report.coordinate = i;
  const int e = static_cast<int>(c.entries.size());
  for (int a = 0; a < e; ++a) {
    for (int b = a + 1; b < e; ++b) {
      if (c.entries[a].idx[i] == c.entries[b].idx[i]) continue;
      auto xs_a = c.tuple_points(c.entries[a]);
      auto xs_b = c.tuple_points(c.entries[b]);
      const double direct = s.value(xs_a) + s.value(xs_b);
      std::swap(xs_a[i], xs_b[i]);
      const double swapped = s.value(xs_a) + s.value(xs_b);
      ++report.pairs_checked;
      if (swapped > direct + tol)
        report.violations.push_back({a, b, swapped - direct});
    }
  }
  return report;
}

SpacelikeReport spacelike_diagnostic(const Coupling& c, const Surplus& s,
                                     double tol) {
  SpacelikeReport report;
  const int m = c.arity();
  const int e = static_cast<int>(c.entries.size());
  if (e < 2) return report;  // nothing local to compare

  // locality radius from the first-coordinate spread of the support
  double diam = 0.0;
  for (int a = 0; a < e; ++a) {
    for (int b = a + 1; b < e; ++b) {
      const Vector pa = c.marginals[0].point(c.entries[a].idx[0]);
      const Vector pb = c.marginals[0].point(c.entries[b].idx[0]);
      diam = std::max(diam, (pa - pb).norm());
    }
  }
  report.delta_loc = 0.2 * diam;

  for (int a = 0; a < e; ++a) {
    const auto xs_a = c.tuple_points(c.entries[a]);
    std::vector<Matrix> cross;  // D^2_{x_1 x_i} b at s, i >= 2
    bool have_cross = false;
    for (int b = 0; b < e; ++b) {
      if (b == a) continue;
      const auto xs_b = c.tuple_points(c.entries[b]);
      if ((xs_b[0] - xs_a[0]).norm() > report.delta_loc) continue;
      if (!have_cross) {
        for (int i = 1; i < m; ++i)
          cross.push_back(s.cross_hessian(0, i, xs_a));
        have_cross = true;
      }
      const Vector v1 = xs_b[0] - xs_a[0];
      double q = 0.0;
      for (int i = 1; i < m; ++i)
        q += v1.dot(cross[i - 1] * (xs_b[i] - xs_a[i]));
      ++report.pairs;
      if (q >= -tol)
        ++report.nonnegative;
      else
        report.worst = std::min(report.worst, q);
    }
  }
  if (report.pairs > 0)
    report.fraction =
        static_cast<double>(report.nonnegative) / static_cast<double>(report.pairs);
  return report;
}

MongeReport graph_check(const Coupling& c) {
  MongeReport report;
  std::map<int, std::vector<const CouplingEntry*>> groups;
  for (const auto& e : c.entries) groups[e.idx[0]].push_back(&e);
  report.is_graph = true;
  for (const auto& [first, list] : groups) {
    report.first_atoms.push_back(first);
    report.tuples_per_first.push_back(static_cast<int>(list.size()));
    double total = 0.0;
    double heaviest = 0.0;
    for (const auto* e : list) {
      total += e->mass;
      heaviest = std::max(heaviest, e->mass);
    }
    report.dominant_share.push_back(total > 0.0 ? heaviest / total : 1.0);
    if (list.size() != 1) report.is_graph = false;
  }
  return report;
}

}  // namespace mmot
