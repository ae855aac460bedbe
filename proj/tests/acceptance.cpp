// Acceptance suite: every criterion prints one PASS/FAIL line and the
// binary exits nonzero if any fail. Tolerances are pinned in code.

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mmot/diagnostics.hpp"
#include "mmot/matching.hpp"
#include "mmot/mk_solvers.hpp"
#include "mmot/repro.hpp"
#include "mmot/surplus.hpp"
#include "test_support.hpp"

using namespace mmot;
using namespace mmot::test;

namespace {

int failures = 0;

void criterion(int number, const std::string& title, double time_limit_s,
               const std::function<bool(std::string&)>& body) {
  std::string detail;
  bool ok = false;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
    ok = false;
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  if (secs >= time_limit_s) {
    ok = false;
    detail += (detail.empty() ? "" : "; ") + std::string("over time limit");
  }
  if (!ok) ++failures;
  std::printf("criterion %d: %s  %-46s [%6.2f s]  %s\n", number,
              ok ? "PASS" : "FAIL", title.c_str(), secs, detail.c_str());
  std::fflush(stdout);
}

Box cube(int n, double half) {
  return Box{Vector::Constant(n, -half), Vector::Constant(n, half)};
}

SurplusOracle quadratic_oracle(int m, int n) {
  return SurplusOracle(std::vector<PrefPtr>(m, make_quadratic(n)),
                       cube(n, 8.0));
}

SurplusOracle brenier_oracle(int m, int n) {
  return SurplusOracle(std::vector<PrefPtr>(m, make_brenier(n)), cube(n, 10.0));
}

std::vector<SurplusOracle> builtin_oracles(int m, int n) {
  Matrix q = Matrix::Identity(n, n);
  q(0, 0) = 1.5;
  std::vector<PrefPtr> heinich{make_heinich(q)};
  for (int i = 1; i < m; ++i) heinich.push_back(make_linear(n));
  std::vector<SurplusOracle> out;
  out.push_back(quadratic_oracle(m, n));
  out.push_back(brenier_oracle(m, n));
  out.push_back(SurplusOracle(std::vector<PrefPtr>(m, make_concave_sum(n)),
                              cube(n, 10.0)));
  out.push_back(SurplusOracle(std::move(heinich), cube(n, 60.0)));
  return out;
}

// the shared instance family behind criteria 4, 7, 8 and 9
std::vector<Problem> equivalence_instances() {
  std::vector<Problem> out;
  for (int trial = 0; trial < 50; ++trial) {
    InstanceSpec spec;
    spec.m = 3;
    spec.n = 1 + trial % 2;
    spec.atoms = 2 + trial % 4;  // 2..5 atoms per marginal
    spec.weights =
        trial % 3 == 0 ? WeightScheme::Uniform : WeightScheme::Random;
    spec.seed = 7000 + trial;
    const std::string kind = trial % 2 == 0 ? "quadratic" : "brenier";
    out.push_back(
        generate_instance(spec, std::vector<std::string>(3, kind)));
  }
  return out;
}

}  // namespace

int main() {
  // criterion 1: closed-form contract responses and the failing condition
  criterion(1, "contract response values and negative T", 1.0,
            [](std::string& detail) {
    SurplusOracle oracle = brenier_oracle(3, 2);
    const Vector zero = Vector::Zero(2);
    const Vector p{{2.5, 0.0}};
    bool ok = true;

    const Vector zp = oracle.solve_zbar(std::vector<Vector>{p, zero, p}).z;
    ok &= (zp + 0.8 * p).norm() <= 1e-8;

    const Matrix b0 = oracle.B_matrix(std::vector<Vector>{zero, zero, zero});
    ok &= (b0 + 3.0 * Matrix::Identity(2, 2)).norm() <= 1e-8;

    const Matrix t = condition_iii_matrix(oracle, zero, zero, zero, p, p);
    Eigen::SelfAdjointEigenSolver<Matrix> es(t);
    const double lmax = es.eigenvalues().maxCoeff();
    const double bound = 1.0 / std::sqrt(5.0) - 2.0 / 3.0;
    ok &= lmax <= bound + 1e-8;
    ok &= lmax < 0.0;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "|z+0.8p|=%.2e, lmax(T)=%.6f",
                  (zp + 0.8 * p).norm(), lmax);
    detail = buf;
    return ok;
  });

  // criterion 2: quadratic surplus equals the pairwise-distance closed form
  criterion(2, "quadratic identity on 1000 seeded tuples", 5.0,
            [](std::string& detail) {
    Rng rng(20240501);
    const int ms[] = {2, 3, 5};
    const int ns[] = {1, 2, 3};
    double worst_value = 0.0, worst_mean = 0.0;
    int drawn = 0;
    while (drawn < 1000) {
      for (int m : ms)
        for (int n : ns) {
          if (drawn >= 1000) break;
          ++drawn;
          SurplusOracle oracle = quadratic_oracle(m, n);
          auto xs = random_tuple(rng, m, n, -2, 2);
          Vector mean = Vector::Zero(n);
          for (const auto& x : xs) mean += x;
          mean /= m;
          double closed = 0.0;
          for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j)
              closed += (xs[i] - xs[j]).squaredNorm();
          closed = -closed / (2.0 * m);
          const ZbarResult r = oracle.solve_zbar(xs);
          worst_value =
              std::max(worst_value, std::abs(r.objective - closed) /
                                        (1.0 + std::abs(closed)));
          worst_mean = std::max(worst_mean, (r.z - mean).norm());
        }
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "value err %.2e, mean err %.2e",
                  worst_value, worst_mean);
    detail = buf;
    return worst_value <= 1e-10 && worst_mean <= 1e-10;
  });

  // criterion 3: symmetry of the cross-Hessian product
  criterion(3, "symmetry obstruction at 100 points per surplus", 5.0,
            [](std::string& detail) {
    bool ok = true;
    Matrix a(2, 2);
    a << 1.0, 1.0, 0.0, 1.0;
    const BilinearSurplus bilinear(a);
    Rng rng(303);
    double worst_bilinear = 0.0;
    for (int s = 0; s < 100; ++s) {
      auto xs = random_tuple(rng, 3, 2, -2, 2);
      worst_bilinear = std::max(
          worst_bilinear,
          (symmetry_product(bilinear, xs[0], xs[1], xs[2]) - a).norm());
    }
    ok &= worst_bilinear <= 1e-12;

    double worst_asym = 0.0;
    Matrix q(2, 2);
    q << 1.5, 0.25, 0.25, 0.75;
    std::vector<PrefPtr> heinich{make_heinich(q), make_linear(2),
                                 make_linear(2)};
    std::vector<SurplusOracle> oracles;
    oracles.push_back(quadratic_oracle(3, 2));
    oracles.push_back(brenier_oracle(3, 2));
    oracles.push_back(SurplusOracle(std::move(heinich), cube(2, 60.0)));
    for (const auto& oracle : oracles) {
      for (int s = 0; s < 100; ++s) {
        auto xs = random_tuple(rng, 3, 2, -2, 2);
        const Matrix sp = symmetry_product(oracle, xs[0], xs[1], xs[2]);
        worst_asym = std::max(worst_asym, (sp - sp.transpose()).norm());
      }
    }
    ok &= worst_asym <= 1e-8;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "|S-A|=%.2e, max |S-S^T|=%.2e",
                  worst_bilinear, worst_asym);
    detail = buf;
    return ok;
  });

  // shared state across criteria 4, 7, 8, 9
  std::vector<Problem> instances;
  std::vector<Coupling> exact_solutions;
  std::vector<double> mam_values;

  // criterion 4: the two formulations agree on 50 seeded instances
  criterion(4, "formulation equivalence on 50 instances", 60.0,
            [&](std::string& detail) {
    instances = equivalence_instances();
    bool ok = true;
    double worst_gap = 0.0, worst_glue = 0.0, worst_rec = 0.0;
    int pure_count = 0;
    for (const auto& p : instances) {
      const EquivalenceReport r = verify_equivalence(p);
      const double tol = 1e-7 * (1.0 + std::abs(r.mk_value));
      worst_gap = std::max(worst_gap, r.gap);
      worst_glue =
          std::max(worst_glue, std::abs(r.mk_value - r.glued_value));
      ok &= r.gap <= tol;
      ok &= std::abs(r.mk_value - r.glued_value) <= tol;
      if (r.reconstruction_checked) {
        ++pure_count;
        worst_rec = std::max(worst_rec, r.reconstruction_linf);
        ok &= r.reconstruction_linf <= 1e-9;
      }
      mam_values.push_back(r.mam_value);
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "gap %.2e, glue %.2e, rec %.2e (%d/50 pure)", worst_gap,
                  worst_glue, worst_rec, pure_count);
    detail = buf;
    return ok;
  });

  // criterion 5: derivative formulas against finite differences
  criterion(5, "derivative formulas vs finite differences", 10.0,
            [](std::string& detail) {
    Rng rng(505);
    bool ok = true;
    double worst1 = 0.0, worst2 = 0.0;
    for (auto& oracle : builtin_oracles(3, 2)) {
      for (int s = 0; s < 100; ++s) {
        const auto xs = random_tuple(rng, 3, 2, -1.5, 1.5);
        const int i = static_cast<int>(rng.index(3));
        int j = static_cast<int>(rng.index(3));
        if (j == i) j = (j + 1) % 3;

        const Vector g = oracle.grad_b(xs, i);
        auto b_of_xi = [&](const Vector& xi) {
          auto ys = xs;
          ys[i] = xi;
          return oracle.value(ys);
        };
        const double e1 =
            (g - fd_gradient(b_of_xi, xs[i])).norm() / (1.0 + g.norm());
        worst1 = std::max(worst1, e1);

        const Matrix jz = oracle.jac_zbar(xs, i);
        auto z_of_xi = [&](const Vector& xi) {
          auto ys = xs;
          ys[i] = xi;
          return oracle.solve_zbar(ys).z;
        };
        const double e2a =
            (jz - fd_jacobian(z_of_xi, xs[i])).norm() / (1.0 + jz.norm());

        const Matrix h = oracle.hess_b_cross(xs, i, j);
        auto b_of_pair = [&](const Vector& xi, const Vector& xj) {
          auto ys = xs;
          ys[i] = xi;
          ys[j] = xj;
          return oracle.value(ys);
        };
        const double e2b =
            (h - fd_cross_hessian(b_of_pair, xs[i], xs[j])).norm() /
            (1.0 + h.norm());
        worst2 = std::max(worst2, std::max(e2a, e2b));
      }
    }
    ok &= worst1 <= 1e-5 && worst2 <= 1e-4;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "grad err %.2e, second-order err %.2e",
                  worst1, worst2);
    detail = buf;
    return ok;
  });

  // criterion 6: exact LP against exhaustive vertex enumeration
  std::vector<Problem> small_instances;
  std::vector<Coupling> small_solutions;
  criterion(6, "exact solver vs brute-force enumeration", 30.0,
            [&](std::string& detail) {
    bool ok = true;
    double worst = 0.0;

    // every support-size combination with at most 8 variables
    const std::vector<std::vector<int>> shapes = {
        {2, 2}, {2, 3}, {3, 2}, {2, 4}, {4, 2}, {2, 2, 2}};
    int count = 0;
    for (const auto& shape : shapes) {
      for (int rep = 0; rep < 2; ++rep) {
        const std::string kind = (count % 2 == 0) ? "quadratic" : "brenier";
        ++count;
        Rng rng(6000 + 10 * count);
        std::vector<DiscreteMeasure> marginals;
        for (int size : shape) {
          std::vector<Vector> pts;
          std::vector<double> ws;
          for (int k = 0; k < size; ++k) {
            pts.push_back(Vector{{rng.uniform(-1, 1)}});
            ws.push_back(rng.uniform(0.2, 1.0));
          }
          marginals.push_back(DiscreteMeasure::normalized(pts, ws));
        }
        auto oracle = make_oracle_for(
            marginals, std::vector<std::string>(shape.size(), kind));
        Problem p(marginals, oracle);
        const Coupling gamma = solve_mk_exact(p);
        const auto sys = transport_system(p.marginals);
        const auto c = surplus_vector(p.marginals, *p.surplus);
        const auto brute = enumerate_vertex_max(c, sys.a, sys.b);
        worst = std::max(worst, std::abs(gamma.objective - brute.best));
        ok &= std::abs(gamma.objective - brute.best) <= 1e-10;
        small_instances.push_back(p);
        small_solutions.push_back(gamma);
      }
    }

    // sorted four-atom instance: the monotone assignment wins
    {
      auto coords = uniform_measure_1d({0.0, 1.0, 2.0, 3.0});
      std::vector<DiscreteMeasure> marginals(3, coords);
      auto oracle = make_oracle_for(marginals, {"quadratic", "quadratic",
                                                "quadratic"});
      Problem p(marginals, oracle);
      const Coupling gamma = solve_mk_exact(p);
      bool monotone = gamma.entries.size() == 4;
      for (const auto& e : gamma.entries)
        monotone &= (e.idx[1] == e.idx[0] && e.idx[2] == e.idx[0]);
      ok &= monotone;

      std::vector<int> perm = {0, 1, 2, 3};
      std::vector<std::vector<int>> perms;
      do perms.push_back(perm);
      while (std::next_permutation(perm.begin(), perm.end()));
      double best = -1e100;
      std::vector<Vector> xs(3);
      for (const auto& s2 : perms)
        for (const auto& s3 : perms) {
          double v = 0.0;
          for (int k = 0; k < 4; ++k) {
            xs[0] = p.marginals[0].point(k);
            xs[1] = p.marginals[1].point(s2[k]);
            xs[2] = p.marginals[2].point(s3[k]);
            v += 0.25 * p.surplus->value(xs);
          }
          best = std::max(best, v);
        }
      ok &= std::abs(gamma.objective - best) <= 1e-10;
      small_instances.push_back(p);
      small_solutions.push_back(gamma);
    }

    char buf[128];
    std::snprintf(buf, sizeof(buf), "max LP/brute gap %.2e over %zu instances",
                  worst, small_instances.size());
    detail = buf;
    return ok;
  });

  // criterion 7: optimality diagnostics on every exact solution above
  criterion(7, "swap optimality and positive definite core", 30.0,
            [&](std::string& detail) {
    bool ok = true;
    long swap_violations = 0;
    exact_solutions.clear();
    for (const auto& p : instances) exact_solutions.push_back(solve_mk_exact(p));
    for (std::size_t k = 0; k < instances.size(); ++k) {
      for (int i = 0; i < instances[k].arity(); ++i)
        swap_violations += static_cast<long>(
            swap_monotonicity_check(exact_solutions[k], *instances[k].surplus, i)
                .violations.size());
    }
    for (std::size_t k = 0; k < small_instances.size(); ++k) {
      for (int i = 0; i < small_instances[k].arity(); ++i)
        swap_violations += static_cast<long>(
            swap_monotonicity_check(small_solutions[k],
                                    *small_instances[k].surplus, i)
                .violations.size());
    }
    ok &= swap_violations == 0;

    // positive definite contract-mediated core at sampled support tuples
    double min_eig = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < instances.size(); ++k) {
      const auto* oracle = instances[k].oracle();
      if (!oracle) continue;
      for (const auto& e : exact_solutions[k].entries) {
        const auto xs = exact_solutions[k].tuple_points(e);
        const Matrix core = oracle->indirect_hessian(xs, 0, 0);
        Eigen::SelfAdjointEigenSolver<Matrix> es(
            0.5 * (core + core.transpose()));
        min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
      }
    }
    ok &= min_eig > 0.0;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%ld swap violations, min core eig %.3e",
                  swap_violations, min_eig);
    detail = buf;
    return ok;
  });

  // criterion 8: entropic solver against the exact values
  criterion(8, "entropic cross-check", 120.0, [&](std::string& detail) {
    bool ok = true;
    double worst_rel = 0.0, worst_marginal = 0.0;
    for (std::size_t k = 0; k < instances.size(); ++k) {
      const Coupling ent = solve_mk_entropic(instances[k], 1e-3);
      const double exact = exact_solutions[k].objective;
      const double rel =
          std::abs(ent.objective - exact) / (1.0 + std::abs(exact));
      worst_rel = std::max(worst_rel, rel);
      worst_marginal = std::max(worst_marginal, ent.info.marginal_violation);
      ok &= rel <= 0.02;
      ok &= ent.info.marginal_violation <= 1e-8 + 1e-12;
    }
    // the log-domain path at eps = 1e-4 stays finite
    for (std::size_t k = 0; k < 4; ++k) {
      const Coupling ent = solve_mk_entropic(instances[k], 1e-4);
      ok &= ent.info.log_domain;
      ok &= std::isfinite(ent.objective);
      for (const auto& e : ent.entries) ok &= std::isfinite(e.mass);
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "max rel gap %.2e, max marginal %.2e",
                  worst_rel, worst_marginal);
    detail = buf;
    return ok;
  });

  // criterion 9: the fixed-point solver is monotone and bounded by the optimum
  criterion(9, "fixed-point solver trace and bound", 60.0,
            [&](std::string& detail) {
    bool ok = true;
    double worst_over = -1e100;
    Rng rng(909);
    for (std::size_t k = 0; k < instances.size(); k += 7) {
      const Problem& p = instances[k];
      const MamSolution sol = solve_mam_via_mk(p);
      const double exact = mam_values.empty()
                               ? mam_objective(sol.nu, p)
                               : mam_values[k];

      // initialized at the exact optimizer: one outer pass, no improvement
      const FixedPointResult at_opt = solve_mam_fixed_point(p, sol.nu, 40);
      ok &= at_opt.outer_iters == 1;
      ok &= at_opt.converged;
      ok &= at_opt.trace.back() <= exact + 1e-9;

      // random initializations stay monotone and below the optimum
      for (int rep = 0; rep < 2; ++rep) {
        std::vector<Vector> pts;
        const int atoms = sol.nu.size();
        for (int a = 0; a < atoms; ++a) {
          Vector z(p.dim());
          for (int d = 0; d < p.dim(); ++d) z[d] = rng.uniform(-1.5, 1.5);
          pts.push_back(std::move(z));
        }
        const FixedPointResult fp = solve_mam_fixed_point(
            p, DiscreteMeasure(pts, std::vector<double>(atoms, 1.0 / atoms)),
            60);
        for (std::size_t t = 1; t < fp.trace.size(); ++t)
          ok &= fp.trace[t] >= fp.trace[t - 1];
        worst_over = std::max(worst_over, fp.trace.back() - exact);
        ok &= fp.trace.back() <= exact + 1e-9;
      }
    }
    char buf[128];
    std::snprintf(buf, sizeof(buf), "max final-minus-exact %.2e", worst_over);
    detail = buf;
    return ok;
  });

  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}
