#include "mmot/matching.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "mmot/errors.hpp"
#include "mmot/lp.hpp"
#include "mmot/mk_solvers.hpp"
#include "mmot/diagnostics.hpp"

namespace mmot {

std::vector<double> TransportPlan::nu_masses() const {
  std::vector<double> mass(nu.size(), 0.0);
  for (const auto& e : entries) mass[e.zi] += e.mass;
  return mass;
}

std::vector<double> TransportPlan::mu_masses() const {
  std::vector<double> mass(mu.size(), 0.0);
  for (const auto& e : entries) mass[e.xi] += e.mass;
  return mass;
}

TransportPlan solve_ot2(const PreferenceFunction& f, const DiscreteMeasure& nu,
                        const DiscreteMeasure& mu,
                        const SolverSettings& settings) {
  if (nu.dim() != mu.dim() || nu.dim() != f.dim())
    throw ValidationError("dimension mismatch in two-marginal problem");
  const long nz = nu.size();
  const long nx = mu.size();
  if (nz * nx > settings.variable_cap)
    throw ValidationError("variable cap exceeded: " + std::to_string(nz * nx) +
                          " > " + std::to_string(settings.variable_cap));

  // z index slowest; one redundant mu row dropped
  const long n_vars = nz * nx;
  const int rows = static_cast<int>(nz + nx - 1);
  Eigen::VectorXd c(n_vars);
  for (long k = 0; k < nz; ++k)
    for (long l = 0; l < nx; ++l)
      c[k * nx + l] = f.value(mu.point(static_cast<int>(l)),
                              nu.point(static_cast<int>(k)));

  RowMatrix a = RowMatrix::Zero(rows, n_vars);
  Eigen::VectorXd rhs(rows);
  for (long k = 0; k < nz; ++k) {
    rhs[k] = nu.weight(static_cast<int>(k));
    for (long l = 0; l < nx; ++l) a(k, k * nx + l) = 1.0;
  }
  for (long l = 0; l + 1 < nx; ++l) {
    rhs[nz + l] = mu.weight(static_cast<int>(l));
    for (long k = 0; k < nz; ++k) a(nz + l, k * nx + l) = 1.0;
  }

  LpSettings lps;
  lps.pivot = settings.pivot;
  lps.feas_tol = settings.feas_tol;
  lps.opt_tol = settings.opt_tol;
  LpResult lp;
  try {
    lp = maximize_equality_lp(c, a, rhs, lps);
  } catch (const SolverError& e) {
    throw InternalError(std::string("two-marginal LP failed: ") + e.what());
  }

  TransportPlan plan{.entries = {}, .nu = nu, .mu = mu, .value = lp.objective};
  for (long k = 0; k < nz; ++k)
    for (long l = 0; l < nx; ++l)
      if (lp.x[k * nx + l] > 1e-13)
        plan.entries.push_back({static_cast<int>(k), static_cast<int>(l),
                                lp.x[k * nx + l]});
  return plan;
}

namespace {

const SurplusOracle& require_oracle(const Problem& problem) {
  const SurplusOracle* oracle = problem.oracle();
  if (!oracle)
    throw ValidationError("operation needs a sup-form oracle surplus");
  return *oracle;
}

std::vector<TransportPlan> solve_all_plans(const DiscreteMeasure& nu,
                                           const Problem& problem) {
  const auto& oracle = require_oracle(problem);
  std::vector<TransportPlan> plans;
  plans.reserve(problem.arity());
  for (int i = 0; i < problem.arity(); ++i)
    plans.push_back(solve_ot2(*oracle.prefs()[i], nu, problem.marginals[i],
                              problem.settings));
  return plans;
}

}  // namespace

double mam_objective(const DiscreteMeasure& nu, const Problem& problem) {
  double total = 0.0;
  for (const auto& plan : solve_all_plans(nu, problem)) total += plan.value;
  return total;
}

MamSolution solve_mam_via_mk(const Problem& problem) {
  const auto& oracle = require_oracle(problem);
  Coupling gamma = solve_mk_exact(problem);
  DiscreteMeasure nu = pushforward(
      gamma, [&](const std::vector<Vector>& xs) { return oracle.solve_zbar(xs).z; });
  return {std::move(nu), std::move(gamma)};
}

Coupling glue_plans(const DiscreteMeasure& nu,
                    const std::vector<TransportPlan>& plans,
                    const Surplus& surplus) {
  if (plans.size() < 2) throw ValidationError("need m >= 2 plans to glue");
  const int m = static_cast<int>(plans.size());
  if (surplus.arity() != m)
    throw ValidationError("surplus arity does not match plan count");

  double t_sum = 0.0;
  for (int i = 0; i < m; ++i) {
    const auto mass = plans[i].nu_masses();
    if (static_cast<int>(mass.size()) != nu.size())
      throw ValidationError("marginal mismatch among plans: plan " +
                            std::to_string(i) + " indexes a different nu");
    for (int k = 0; k < nu.size(); ++k)
      if (std::abs(mass[k] - nu.weight(k)) > 1e-9)
        throw ValidationError("marginal mismatch among plans: plan " +
                              std::to_string(i) + " disagrees with nu at atom " +
                              std::to_string(k));
    t_sum += plans[i].value;
  }

  // rows of each plan grouped by contract atom
  std::vector<std::vector<std::vector<PlanEntry>>> rows(m);
  for (int i = 0; i < m; ++i) {
    rows[i].resize(nu.size());
    for (const auto& e : plans[i].entries) rows[i][e.zi].push_back(e);
  }

  std::map<std::vector<int>, double> mass_by_tuple;
  for (int k = 0; k < nu.size(); ++k) {
    const double wk = nu.weight(k);
    // product over categories of the conditional rows at this contract
    std::vector<int> cursor(m, 0);
    while (true) {
      double mass = wk;
      std::vector<int> idx(m);
      for (int i = 0; i < m; ++i) {
        const auto& e = rows[i][k][cursor[i]];
        idx[i] = e.xi;
        mass *= e.mass / wk;
      }
      if (mass > 0.0) mass_by_tuple[idx] += mass;
      int d = m - 1;
      while (d >= 0 && ++cursor[d] == static_cast<int>(rows[d][k].size())) {
        cursor[d] = 0;
        --d;
      }
      if (d < 0) break;
    }
  }

  Coupling out;
  out.info.method = "glued";
  for (int i = 0; i < m; ++i) out.marginals.push_back(plans[i].mu);
  double obj = 0.0;
  for (const auto& [idx, mass] : mass_by_tuple) {
    out.entries.push_back({idx, mass});
    obj += mass * surplus.value(out.tuple_points(out.entries.back()));
  }
  out.objective = obj;
  out.info.marginal_violation = marginal_violation(out);

  // pointwise the surplus dominates the sum of payoffs at any contract
  if (obj < t_sum - 1e-9)
    throw InternalError("glued objective fell below the sum of plan values");
  return out;
}

FixedPointResult solve_mam_fixed_point(const Problem& problem,
                                       const DiscreteMeasure& init,
                                       int max_outer) {
  const auto& oracle = require_oracle(problem);
  if (max_outer < 1) throw ValidationError("max_outer must be positive");
  const int n = problem.dim();

  FixedPointResult out;
  std::vector<Vector> atoms = init.points();
  std::vector<double> weights = init.weights();

  auto current_nu = [&]() {
    return DiscreteMeasure(atoms, weights);
  };

  auto plans = solve_all_plans(current_nu(), problem);
  double obj = 0.0;
  for (const auto& p : plans) obj += p.value;
  out.trace.push_back(obj);

  for (int outer = 0; outer < max_outer; ++outer) {
    ++out.outer_iters;

    // move each contract atom to the maximizer of its plan-weighted payoff
    for (int k = 0; k < static_cast<int>(atoms.size()); ++k) {
      std::vector<std::tuple<const PreferenceFunction*, Vector, double>> rows;
      for (int i = 0; i < problem.arity(); ++i)
        for (const auto& e : plans[i].entries)
          if (e.zi == k)
            rows.emplace_back(oracle.prefs()[i].get(),
                              problem.marginals[i].point(e.xi), e.mass);
      if (rows.empty()) continue;

      auto relocation_value = [&](const Vector& z) {
        double v = 0.0;
        for (const auto& [f, x, mass] : rows) v += mass * f->value(x, z);
        return v;
      };
      auto relocation_grad = [&](const Vector& z) {
        Vector g = Vector::Zero(n);
        for (const auto& [f, x, mass] : rows) g += mass * f->grad_z(x, z);
        return g;
      };
      auto relocation_hess = [&](const Vector& z) {
        Matrix h = Matrix::Zero(n, n);
        for (const auto& [f, x, mass] : rows) h += mass * f->hess_zz(x, z);
        return h;
      };

      const double before = relocation_value(atoms[k]);
      NewtonOutcome run =
          newton_maximize(relocation_value, relocation_grad, relocation_hess,
                          atoms[k], oracle.newton());
      if (!run.converged) {
        out.frozen_atoms.push_back(k);  // keep the old position
        continue;
      }
      if (run.value >= before) atoms[k] = run.z;
    }

    auto new_plans = solve_all_plans(current_nu(), problem);
    double new_obj = 0.0;
    for (const auto& p : new_plans) new_obj += p.value;

    if (new_obj < out.trace.back() - 1e-9 * (1.0 + std::abs(out.trace.back())))
      throw InternalError("fixed-point objective decreased");

    const double improvement = new_obj - out.trace.back();
    if (new_obj >= out.trace.back()) {
      out.trace.push_back(new_obj);
      plans = std::move(new_plans);
    }
    if (improvement < 1e-9) {
      out.converged = true;
      break;
    }
  }

  out.nu = current_nu();
  return out;
}

bool MongeMap::pure(double tau) const {
  for (double s : share)
    if (s < 1.0 - tau) return false;
  return true;
}

double MongeMap::worst_share() const {
  double worst = 1.0;
  for (double s : share) worst = std::min(worst, s);
  return worst;
}

MongeExtraction extract_monge_maps(const DiscreteMeasure& nu,
                                   const Problem& problem) {
  MongeExtraction out{.nu = nu.canonical(), .maps = {}, .all_pure = true};
  const auto plans = solve_all_plans(out.nu, problem);
  for (int i = 0; i < problem.arity(); ++i) {
    MongeMap map{.domain = out.nu, .to_index = {}, .to_point = {}, .share = {}};
    map.to_index.assign(out.nu.size(), -1);
    map.to_point.assign(out.nu.size(), Vector());
    map.share.assign(out.nu.size(), 0.0);
    std::vector<double> best(out.nu.size(), 0.0);
    std::vector<double> total(out.nu.size(), 0.0);
    for (const auto& e : plans[i].entries) {
      total[e.zi] += e.mass;
      if (e.mass > best[e.zi]) {
        best[e.zi] = e.mass;
        map.to_index[e.zi] = e.xi;
        map.to_point[e.zi] = problem.marginals[i].point(e.xi);
      }
    }
    for (int k = 0; k < out.nu.size(); ++k) {
      if (map.to_index[k] < 0)
        throw InternalError("plan left a contract atom unmatched");
      map.share[k] = total[k] > 0.0 ? best[k] / total[k] : 1.0;
    }
    if (!map.pure()) out.all_pure = false;
    out.maps.push_back(std::move(map));
  }
  return out;
}

std::vector<MongeMap> compose_monge_maps(const std::vector<MongeMap>& maps) {
  if (maps.size() < 2)
    throw ValidationError("need at least two maps to compose");
  const MongeMap& f1 = maps.front();
  const int k = f1.domain.size();
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) {
      if ((f1.to_point[a] - f1.to_point[b]).norm() <= 1e-9) {
        std::ostringstream os;
        os << "first map not invertible: contract atoms " << a << " and " << b
           << " share the image";
        throw ValidationError(os.str());
      }
    }
  }

  // domain of the composed maps: the first-category image with nu weights
  std::vector<Vector> pts(f1.to_point.begin(), f1.to_point.end());
  DiscreteMeasure domain(pts, f1.domain.weights());

  std::vector<MongeMap> out;
  for (std::size_t i = 1; i < maps.size(); ++i) {
    MongeMap g{.domain = domain,
               .to_index = maps[i].to_index,
               .to_point = maps[i].to_point,
               .share = maps[i].share};
    out.push_back(std::move(g));
  }
  return out;
}

namespace {

double reconstruction_distance(const Coupling& gamma,
                               const MongeExtraction& extraction) {
  std::map<std::vector<int>, double> from_maps;
  const int m = static_cast<int>(extraction.maps.size());
  for (int k = 0; k < extraction.nu.size(); ++k) {
    std::vector<int> idx(m);
    for (int i = 0; i < m; ++i) idx[i] = extraction.maps[i].to_index[k];
    from_maps[idx] += extraction.nu.weight(k);
  }
  std::map<std::vector<int>, double> from_gamma;
  for (const auto& e : gamma.entries) from_gamma[e.idx] += e.mass;

  double linf = 0.0;
  for (const auto& [idx, mass] : from_maps) {
    const auto it = from_gamma.find(idx);
    const double other = it == from_gamma.end() ? 0.0 : it->second;
    linf = std::max(linf, std::abs(mass - other));
  }
  for (const auto& [idx, mass] : from_gamma) {
    if (!from_maps.count(idx)) linf = std::max(linf, mass);
  }
  return linf;
}

}  // namespace

EquivalenceReport verify_equivalence(const Problem& problem) {
  const auto& oracle = require_oracle(problem);
  EquivalenceReport report;

  MamSolution sol = solve_mam_via_mk(problem);
  report.mk_value = sol.coupling.objective;
  report.gamma_support = static_cast<int>(sol.coupling.entries.size());
  report.nu_support = sol.nu.size();

  const auto plans = solve_all_plans(sol.nu, problem);
  report.mam_value = 0.0;
  for (const auto& p : plans) {
    report.t_values.push_back(p.value);
    report.mam_value += p.value;
  }
  report.gap = std::abs(report.mk_value - report.mam_value);

  const Coupling glued = glue_plans(sol.nu, plans, oracle);
  report.glued_value = glued.objective;

  const MongeExtraction extraction = extract_monge_maps(sol.nu, problem);
  report.ce_pure = extraction.all_pure;
  report.cmn_pure = graph_check(sol.coupling).is_graph;
  if (extraction.all_pure) {
    report.reconstruction_checked = true;
    report.reconstruction_linf =
        reconstruction_distance(sol.coupling, extraction);
  }

  // uniqueness evidence: an independent solve under the other pivot rule
  {
    Problem other = problem;
    other.settings.pivot = problem.settings.pivot == PivotRule::Bland
                               ? PivotRule::Dantzig
                               : PivotRule::Bland;
    const Coupling gamma2 = solve_mk_exact(other);
    report.pivot_value_gap = std::abs(gamma2.objective - report.mk_value);
    std::map<std::vector<int>, double> a, b;
    for (const auto& e : sol.coupling.entries) a[e.idx] += e.mass;
    for (const auto& e : gamma2.entries) b[e.idx] += e.mass;
    double linf = 0.0;
    for (const auto& [idx, mass] : a) {
      const auto it = b.find(idx);
      linf = std::max(linf,
                      std::abs(mass - (it == b.end() ? 0.0 : it->second)));
    }
    for (const auto& [idx, mass] : b)
      if (!a.count(idx)) linf = std::max(linf, mass);
    report.pivot_coupling_linf = linf;
  }

  const double tol = 1e-7 * (1.0 + std::abs(report.mk_value));
  if (report.gap > tol)
    throw InternalError("formulations disagree: |MK - MAM| = " +
                        std::to_string(report.gap));
  if (std::abs(report.mk_value - report.glued_value) > tol)
    throw InternalError("glued coupling value disagrees with MK optimum");
  return report;
}

}  // namespace mmot
