#include "mmot/mk_solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mmot/errors.hpp"
#include "mmot/lp.hpp"

namespace mmot {

namespace {

std::vector<int> support_sizes(const Problem& p) {
  std::vector<int> sizes;
  sizes.reserve(p.marginals.size());
  for (const auto& mu : p.marginals) sizes.push_back(mu.size());
  return sizes;
}

constexpr double kPrune = 1e-14;

}  // namespace

std::vector<double> surplus_tensor(const Problem& problem,
                                   const TupleIndexer& indexer) {
  std::vector<double> b(indexer.count());
  std::vector<Vector> xs(problem.arity());
  for (long t = 0; t < indexer.count(); ++t) {
    const auto idx = indexer.tuple(t);
    for (int i = 0; i < problem.arity(); ++i)
      xs[i] = problem.marginals[i].point(idx[i]);
    try {
      b[t] = problem.surplus->value(xs);
    } catch (const SolverError& e) {
      throw SolverError("surplus evaluation failed at tuple " +
                        std::to_string(t) + ": " + e.what());
    }
  }
  return b;
}

Coupling solve_mk_exact(const Problem& problem) {
  const auto sizes = support_sizes(problem);
  TupleIndexer indexer(sizes);
  if (indexer.count() > problem.settings.variable_cap)
    throw ValidationError(
        "variable cap exceeded: " + std::to_string(indexer.count()) +
        " tuples > cap " + std::to_string(problem.settings.variable_cap));

  const auto b_vals = surplus_tensor(problem, indexer);
  const long n_vars = indexer.count();
  const int m = problem.arity();

  // marginal constraint groups; each sums to the total mass, so one row per
  // extra group is redundant and dropped to keep the matrix full rank
  int rows = 0;
  for (int i = 0; i < m; ++i) rows += sizes[i] - (i > 0 ? 1 : 0);

  RowMatrix a = RowMatrix::Zero(rows, n_vars);
  Eigen::VectorXd rhs(rows);
  {
    int r0 = 0;
    for (int i = 0; i < m; ++i) {
      const int kept = sizes[i] - (i > 0 ? 1 : 0);
      for (int k = 0; k < kept; ++k)
        rhs[r0 + k] = problem.marginals[i].weight(k);
      r0 += kept;
    }
  }
  for (long t = 0; t < n_vars; ++t) {
    const auto idx = indexer.tuple(t);
    int r0 = 0;
    for (int i = 0; i < m; ++i) {
      const int kept = sizes[i] - (i > 0 ? 1 : 0);
      if (idx[i] < kept) a(r0 + idx[i], t) = 1.0;
      r0 += kept;
    }
  }

  LpSettings lps;
  lps.pivot = problem.settings.pivot;
  lps.feas_tol = problem.settings.feas_tol;
  lps.opt_tol = problem.settings.opt_tol;
  Eigen::VectorXd c =
      Eigen::Map<const Eigen::VectorXd>(b_vals.data(), n_vars);

  LpResult lp;
  try {
    lp = maximize_equality_lp(c, a, rhs, lps);
  } catch (const SolverError& e) {
    // normalized marginals always admit the product plan
    throw InternalError(std::string("transport LP failed: ") + e.what());
  }

  Coupling out;
  out.marginals = problem.marginals;
  out.info.method = "exact-lp";
  out.info.pivot_rule =
      problem.settings.pivot == PivotRule::Bland ? "bland" : "dantzig";
  out.info.pivots_phase1 = lp.pivots_phase1;
  out.info.pivots_phase2 = lp.pivots_phase2;
  for (long t = 0; t < n_vars; ++t) {
    if (lp.x[t] > 1e-13) out.entries.push_back({indexer.tuple(t), lp.x[t]});
  }
  out.objective = lp.objective;
  out.info.marginal_violation = marginal_violation(out);
  if (out.info.marginal_violation > problem.settings.feas_tol)
    throw InternalError("exact plan violates a marginal constraint by " +
                        std::to_string(out.info.marginal_violation));
  return out;
}

namespace {

struct EntropicState {
  std::vector<std::vector<double>> pot;  // per marginal, per atom
  long sweeps = 0;
};

double entry_log_mass(const std::vector<double>& b_over_eps,
                      const EntropicState& st, const TupleIndexer& indexer,
                      long t) {
  const auto idx = indexer.tuple(t);
  double l = b_over_eps[t];
  for (std::size_t i = 0; i < st.pot.size(); ++i) l += st.pot[i][idx[i]];
  return l;
}

// worst per-atom marginal violation of exp(l)
double log_domain_violation(const Problem& p, const TupleIndexer& indexer,
                            const std::vector<double>& b_over_eps,
                            const EntropicState& st) {
  double worst = 0.0;
  for (int i = 0; i < p.arity(); ++i) {
    std::vector<double> mass(p.marginals[i].size(), 0.0);
    for (long t = 0; t < indexer.count(); ++t) {
      const auto idx = indexer.tuple(t);
      mass[idx[i]] += std::exp(entry_log_mass(b_over_eps, st, indexer, t));
    }
    for (int k = 0; k < p.marginals[i].size(); ++k)
      worst = std::max(worst, std::abs(mass[k] - p.marginals[i].weight(k)));
  }
  return worst;
}

// one scaling sweep over all marginal groups, in place
void log_domain_sweep(const Problem& p, const TupleIndexer& indexer,
                      const std::vector<double>& b_over_eps,
                      EntropicState& st) {
  const int m = p.arity();
  for (int i = 0; i < m; ++i) {
    const int s = p.marginals[i].size();
    std::vector<double> peak(s, -std::numeric_limits<double>::infinity());
    std::vector<double> acc(s, 0.0);
    // log-sum-exp over each slice {t : t_i = a}, excluding pot[i]
    for (long t = 0; t < indexer.count(); ++t) {
      const auto idx = indexer.tuple(t);
      double l = b_over_eps[t];
      for (int j = 0; j < m; ++j)
        if (j != i) l += st.pot[j][idx[j]];
      auto& pk = peak[idx[i]];
      auto& ac = acc[idx[i]];
      if (l <= pk) {
        ac += std::exp(l - pk);
      } else {
        ac = ac * std::exp(pk - l) + 1.0;
        pk = l;
      }
    }
    for (int a = 0; a < s; ++a)
      st.pot[i][a] = std::log(p.marginals[i].weight(a)) -
                     (peak[a] + std::log(acc[a]));
  }
  ++st.sweeps;
}

// scaled-domain sweeps; returns true on convergence, false when the run
// should move to the log domain (under/overflow or a stalled tail)
bool scaled_domain_solve(const Problem& p, const TupleIndexer& indexer,
                         const std::vector<double>& b_vals, double eps,
                         std::vector<double>& plan, long budget,
                         long& sweeps_used) {
  const int m = p.arity();
  const long n = indexer.count();
  const double shift = *std::max_element(b_vals.begin(), b_vals.end());
  std::vector<double> kernel(n);
  for (long t = 0; t < n; ++t) kernel[t] = std::exp((b_vals[t] - shift) / eps);

  std::vector<std::vector<double>> u(m);
  for (int i = 0; i < m; ++i) u[i].assign(p.marginals[i].size(), 1.0);

  auto plan_entry = [&](long t, const std::vector<int>& idx) {
    double v = kernel[t];
    for (int i = 0; i < m; ++i) v *= u[i][idx[i]];
    return v;
  };

  for (long it = 0; it < budget; ++it) {
    for (int i = 0; i < m; ++i) {
      std::vector<double> denom(p.marginals[i].size(), 0.0);
      for (long t = 0; t < n; ++t) {
        const auto idx = indexer.tuple(t);
        double v = kernel[t];
        for (int j = 0; j < m; ++j)
          if (j != i) v *= u[j][idx[j]];
        denom[idx[i]] += v;
      }
      for (int a = 0; a < p.marginals[i].size(); ++a) {
        const double d = denom[a];
        if (!(d > 0.0) || !std::isfinite(d)) return false;  // escalate
        u[i][a] = p.marginals[i].weight(a) / d;
        if (!std::isfinite(u[i][a])) return false;
      }
    }
    ++sweeps_used;

    double worst = 0.0;
    for (int i = 0; i < m; ++i) {
      std::vector<double> mass(p.marginals[i].size(), 0.0);
      for (long t = 0; t < n; ++t) mass[indexer.tuple(t)[i]] += plan_entry(t, indexer.tuple(t));
      for (int k = 0; k < p.marginals[i].size(); ++k)
        worst = std::max(worst, std::abs(mass[k] - p.marginals[i].weight(k)));
    }
    if (worst <= p.settings.entropic_marginal_tol) {
      plan.resize(n);
      for (long t = 0; t < n; ++t) plan[t] = plan_entry(t, indexer.tuple(t));
      return true;
    }
  }
  return false;  // stalled; the log-domain path carries on
}

// Newton ascent on the smooth dual of the regularized problem. The plan
// stays exp((b + sum potentials)/eps) throughout; proportional scaling is
// block coordinate ascent on the same dual and stalls on degenerate
// optima, where the dual optimum is a flat set. Counts against `budget`.
bool dual_newton_polish(const Problem& p, const TupleIndexer& indexer,
                        const std::vector<double>& b_over_eps,
                        EntropicState& st, long budget, long& used) {
  const int m = p.arity();
  const long n = indexer.count();
  int dim = 0;
  std::vector<int> offset(m, 0);
  for (int i = 0; i < m; ++i) {
    offset[i] = dim;
    dim += p.marginals[i].size();
  }

  auto dual_value = [&]() {
    double v = 0.0;
    for (int i = 0; i < m; ++i)
      for (int a = 0; a < p.marginals[i].size(); ++a)
        v += st.pot[i][a] * p.marginals[i].weight(a);
    double s = 0.0;
    for (long t = 0; t < n; ++t)
      s += std::exp(entry_log_mass(b_over_eps, st, indexer, t));
    return v - s;
  };

  for (long it = 0; it < budget; ++it) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(dim);
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(dim, dim);
    for (long t = 0; t < n; ++t) {
      const auto idx = indexer.tuple(t);
      const double mass = std::exp(entry_log_mass(b_over_eps, st, indexer, t));
      for (int i = 0; i < m; ++i) {
        grad[offset[i] + idx[i]] -= mass;
        for (int j = 0; j < m; ++j)
          hess(offset[i] + idx[i], offset[j] + idx[j]) += mass;
      }
    }
    for (int i = 0; i < m; ++i)
      for (int a = 0; a < p.marginals[i].size(); ++a)
        grad[offset[i] + a] += p.marginals[i].weight(a);

    const double viol = grad.cwiseAbs().maxCoeff();
    if (viol <= p.settings.entropic_marginal_tol) return true;
    ++used;

    // ridge keeps the translation-invariant directions harmless
    hess.diagonal().array() += 1e-12 + 1e-9 * viol;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    if (ldlt.info() != Eigen::Success) return false;
    const Eigen::VectorXd step = ldlt.solve(grad);

    const double base = dual_value();
    double scale = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 50; ++ls) {
      for (int i = 0; i < m; ++i)
        for (int a = 0; a < p.marginals[i].size(); ++a)
          st.pot[i][a] += scale * step[offset[i] + a];
      const double cand = dual_value();
      if (std::isfinite(cand) && cand >= base) {
        moved = true;
        break;
      }
      for (int i = 0; i < m; ++i)
        for (int a = 0; a < p.marginals[i].size(); ++a)
          st.pot[i][a] -= scale * step[offset[i] + a];
      scale *= 0.5;
    }
    if (!moved) return false;
  }
  return false;
}

}  // namespace

Coupling solve_mk_entropic(const Problem& problem, double eps) {
  if (!(eps > 0.0)) throw ValidationError("entropic eps must be positive");
  const auto sizes = support_sizes(problem);
  TupleIndexer indexer(sizes);
  if (indexer.count() > problem.settings.variable_cap)
    throw ValidationError(
        "variable cap exceeded: " + std::to_string(indexer.count()) +
        " tuples > cap " + std::to_string(problem.settings.variable_cap));

  const auto b_vals = surplus_tensor(problem, indexer);
  const long n = indexer.count();
  const long max_iter = problem.settings.entropic_max_iter;

  std::vector<double> plan;
  long sweeps = 0;
  bool log_domain = eps < 1e-2;

  if (!log_domain) {
    const long budget = std::min<long>(500, max_iter);
    if (!scaled_domain_solve(problem, indexer, b_vals, eps, plan, budget,
                             sweeps)) {
      // scaling factors left the representable range or the tail stalled
      log_domain = true;
    }
  }

  if (log_domain) {
    EntropicState st;
    st.pot.resize(problem.arity());
    for (int i = 0; i < problem.arity(); ++i)
      st.pot[i].assign(problem.marginals[i].size(), 0.0);

    // warm start the potentials through a decreasing-eps ladder
    std::vector<double> ladder;
    for (double e = std::max(eps, 0.5); e > eps; e *= 0.5)
      ladder.push_back(e);
    ladder.push_back(eps);

    std::vector<double> b_over_eps(n);
    bool converged = false;
    for (std::size_t stage = 0; stage < ladder.size(); ++stage) {
      const double e = ladder[stage];
      const bool final_stage = stage + 1 == ladder.size();
      // potentials are stored in units of log-mass; rescale b only
      for (long t = 0; t < n; ++t) b_over_eps[t] = b_vals[t] / e;
      const double tol = final_stage
                             ? problem.settings.entropic_marginal_tol
                             : std::max(1e-4, problem.settings.entropic_marginal_tol);
      const long remaining = std::max<long>(0, max_iter - sweeps);
      const long budget = std::min<long>(final_stage ? 300 : 200, remaining);
      long done = 0;
      while (done < budget) {
        log_domain_sweep(problem, indexer, b_over_eps, st);
        ++done;
        ++sweeps;
        if (log_domain_violation(problem, indexer, b_over_eps, st) <= tol) {
          converged = final_stage;
          break;
        }
      }
      if (final_stage && !converged) {
        // proportional scaling stalls on degenerate optima; finish the
        // ascent on the same dual with Newton steps
        long polish_used = 0;
        converged = dual_newton_polish(problem, indexer, b_over_eps, st,
                                       std::min<long>(200, max_iter),
                                       polish_used);
        sweeps += polish_used;
      }
      if (final_stage && !converged)
        throw SolverError("entropic solver did not converge within " +
                          std::to_string(sweeps) + " sweeps");
    }

    plan.resize(n);
    for (long t = 0; t < n; ++t)
      plan[t] = std::exp(entry_log_mass(b_over_eps, st, indexer, t));
  }

  Coupling out;
  out.marginals = problem.marginals;
  out.info.method = "entropic";
  out.info.eps = eps;
  out.info.iterations = sweeps;
  out.info.log_domain = log_domain;

  double total = 0.0;
  for (long t = 0; t < n; ++t)
    if (plan[t] > kPrune) total += plan[t];
  if (!(total > 0.0)) throw SolverError("entropic plan lost all mass");

  double obj = 0.0;
  double entropy = 0.0;
  for (long t = 0; t < n; ++t) {
    if (plan[t] <= kPrune) continue;
    const double mass = plan[t] / total;
    out.entries.push_back({indexer.tuple(t), mass});
    obj += mass * b_vals[t];
    entropy -= mass * std::log(mass);
  }
  out.objective = obj;
  out.info.regularized_objective = obj + eps * entropy;
  out.info.marginal_violation = marginal_violation(out);
  return out;
}

Coupling solve_mk_entropic(const Problem& problem) {
  return solve_mk_entropic(problem, problem.settings.entropic_eps);
}

}  // namespace mmot
