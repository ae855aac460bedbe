#include "mmot/conditions.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "mmot/errors.hpp"
#include "mmot/rng.hpp"

namespace mmot {

namespace {

constexpr double kTwistThreshold = 1e-8;

Vector sample_box(Rng& rng, const Box& box) {
  Vector x(box.dim());
  for (int d = 0; d < box.dim(); ++d) x[d] = rng.uniform(box.lo[d], box.hi[d]);
  return x;
}

}  // namespace

ConditionReport check_conditions(const Surplus& surplus,
                                 const ConditionSampleSpec& spec) {
  const auto* oracle = dynamic_cast<const SurplusOracle*>(&surplus);
  if (!oracle)
    throw ValidationError(
        "not a sup-form oracle; hypothesis checks need the preference tuple");

  const int m = oracle->arity();
  const int n = oracle->dim();
  if (spec.x_box.dim() != n)
    throw ValidationError("sample box dimension mismatch");
  if (spec.tuples < 1 || spec.pair_samples < 1)
    throw ValidationError("sample counts must be positive");

  Rng rng(spec.seed);
  ConditionReport report;
  const Box& zb = oracle->z_box();

  {  // non-degeneracy of every mixed block
    ConditionCheck c;
    c.name = "H1 non-degeneracy";
    c.margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      for (int s = 0; s < spec.pair_samples; ++s) {
        const Vector x = sample_box(rng, spec.x_box);
        const Vector z = sample_box(rng, zb);
        const double det =
            std::abs(oracle->prefs()[i]->hess_xz(x, z).determinant());
        ++c.samples;
        if (det < c.margin) {
          c.margin = det;
          c.witness = {x, z};
        }
      }
    }
    c.pass = c.samples > 0 && c.margin > 0.0;
    report.checks.push_back(std::move(c));
  }

  std::vector<std::vector<Vector>> tuples;
  for (int s = 0; s < spec.tuples; ++s) {
    std::vector<Vector> xs;
    for (int i = 0; i < m; ++i) xs.push_back(sample_box(rng, spec.x_box));
    tuples.push_back(std::move(xs));
  }

  {  // uniqueness of the inner maximizer, by multistart agreement
    ConditionCheck c;
    c.name = "H2 unique maximizer";
    for (const auto& xs : tuples) {
      const ZbarResult r = oracle->solve_zbar_detailed(xs);
      ++c.samples;
      if (r.status == ZbarStatus::NoConvergence) {
        c.margin = std::numeric_limits<double>::infinity();
        c.witness = xs;
        break;
      }
      if (r.multistart_spread > c.margin) {
        c.margin = r.multistart_spread;
        c.witness = xs;
      }
    }
    c.pass = c.samples > 0 && c.margin <= oracle->newton().multistart_agreement;
    report.checks.push_back(std::move(c));
  }

  {  // negative definite curvature at the maximizer
    ConditionCheck c;
    c.name = "H3 curvature nonsingular";
    c.margin = -std::numeric_limits<double>::infinity();
    for (const auto& xs : tuples) {
      const ZbarResult r = oracle->solve_zbar_detailed(xs);
      if (r.status == ZbarStatus::NoConvergence) continue;
      ++c.samples;
      if (r.hess_max_eig > c.margin) {
        c.margin = r.hess_max_eig;
        c.witness = xs;
      }
    }
    c.pass = c.samples > 0 && c.margin < 0.0;
    report.checks.push_back(std::move(c));
  }

  {  // first preference twisted in the contract argument
    ConditionCheck c;
    c.name = "H4 first-coordinate twist";
    c.margin = std::numeric_limits<double>::infinity();
    const auto& f1 = *oracle->prefs()[0];
    for (int s = 0; s < spec.pair_samples; ++s) {
      const Vector x = sample_box(rng, spec.x_box);
      const Vector za = sample_box(rng, zb);
      const Vector zc = sample_box(rng, zb);
      const double dz = (za - zc).norm();
      if (dz < 1e-12) continue;
      const double ratio = (f1.grad_x(x, za) - f1.grad_x(x, zc)).norm() / dz;
      ++c.samples;
      if (ratio < c.margin) {
        c.margin = ratio;
        c.witness = {x, za, zc};
      }
    }
    c.pass = c.samples > 0 && c.margin > kTwistThreshold;
    report.checks.push_back(std::move(c));
  }

  {  // every preference twisted in the type argument
    ConditionCheck c;
    c.name = "H5 contract twist";
    c.margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      const auto& fi = *oracle->prefs()[i];
      for (int s = 0; s < spec.pair_samples; ++s) {
        const Vector z = sample_box(rng, zb);
        const Vector xa = sample_box(rng, spec.x_box);
        const Vector xc = sample_box(rng, spec.x_box);
        const double dx = (xa - xc).norm();
        if (dx < 1e-12) continue;
        const double ratio = (fi.grad_z(xa, z) - fi.grad_z(xc, z)).norm() / dx;
        ++c.samples;
        if (ratio < c.margin) {
          c.margin = ratio;
          c.witness = {xa, xc, z};
        }
      }
    }
    c.pass = c.samples > 0 && c.margin > kTwistThreshold;
    report.checks.push_back(std::move(c));
  }

  if (m == 3) {  // second-order condition on the contract response
    ConditionCheck c;
    c.name = "condition III";
    c.margin = std::numeric_limits<double>::infinity();
    for (const auto& xs : tuples) {
      const Vector x1t = sample_box(rng, spec.x_box);
      const Vector x3t = sample_box(rng, spec.x_box);
      try {
        const Matrix t =
            condition_iii_matrix(*oracle, xs[0], xs[1], xs[2], x1t, x3t);
        Eigen::SelfAdjointEigenSolver<Matrix> es(t);
        const double lmin = es.eigenvalues().minCoeff();
        ++c.samples;
        if (lmin < c.margin) {
          c.margin = lmin;
          c.witness = {xs[0], xs[1], xs[2], x1t, x3t};
        }
      } catch (const SolverError&) {
        // skip tuples whose inner problem fails; H2/H3 report those
      }
    }
    c.pass = c.samples > 0 && c.margin > 0.0;
    report.checks.push_back(std::move(c));
  }

  report.all_pass = true;
  for (const auto& c : report.checks) report.all_pass &= c.pass;
  report.note =
      "sampled certificate over " + std::to_string(spec.tuples) + " tuples and " +
      std::to_string(spec.pair_samples) + " pairs per check; not exhaustive";
  return report;
}

}  // namespace mmot
