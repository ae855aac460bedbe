#include "mmot/io.hpp"

#include <fstream>

#include "mmot/errors.hpp"

namespace mmot {

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (int d = 0; d < v.size(); ++d) out.push_back(v[d]);
  return out;
}

Vector vector_from_json(const Json& j) {
  if (!j.is_array() || j.empty())
    throw ValidationError("expected a nonempty coordinate array");
  Vector v(static_cast<int>(j.size()));
  for (int d = 0; d < v.size(); ++d) v[d] = j[d].get<double>();
  return v;
}

namespace {

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty())
    throw ValidationError("expected a matrix as an array of rows");
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j[0].size());
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (static_cast<int>(j[r].size()) != cols)
      throw ValidationError("ragged matrix rows");
    for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

}  // namespace

Json measure_to_json(const DiscreteMeasure& mu) {
  Json j;
  j["dim"] = mu.dim();
  Json atoms = Json::array();
  for (int k = 0; k < mu.size(); ++k) {
    Json atom;
    atom["x"] = vector_to_json(mu.point(k));
    atom["w"] = mu.weight(k);
    atoms.push_back(atom);
  }
  j["atoms"] = atoms;
  return j;
}

DiscreteMeasure measure_from_json(const Json& j) {
  if (!j.contains("dim") || !j.contains("atoms"))
    throw ValidationError("measure JSON needs 'dim' and 'atoms'");
  const int dim = j["dim"].get<int>();
  std::vector<Vector> points;
  std::vector<double> weights;
  for (const auto& atom : j["atoms"]) {
    Vector x = vector_from_json(atom.at("x"));
    if (x.size() != dim)
      throw ValidationError("atom dimension disagrees with 'dim'");
    points.push_back(std::move(x));
    weights.push_back(atom.at("w").get<double>());
  }
  return DiscreteMeasure::normalized(std::move(points), std::move(weights));
}

Json settings_to_json(const SolverSettings& s) {
  Json j;
  j["pivot"] = s.pivot == PivotRule::Bland ? "bland" : "dantzig";
  j["feas_tol"] = s.feas_tol;
  j["opt_tol"] = s.opt_tol;
  j["variable_cap"] = s.variable_cap;
  j["entropic_eps"] = s.entropic_eps;
  j["entropic_max_iter"] = s.entropic_max_iter;
  j["entropic_marginal_tol"] = s.entropic_marginal_tol;
  return j;
}

SolverSettings settings_from_json(const Json& j, SolverSettings base) {
  SolverSettings s = base;
  if (j.contains("pivot")) {
    const std::string p = j["pivot"].get<std::string>();
    if (p == "bland")
      s.pivot = PivotRule::Bland;
    else if (p == "dantzig")
      s.pivot = PivotRule::Dantzig;
    else
      throw ValidationError("unknown pivot rule: " + p);
  }
  if (j.contains("feas_tol")) s.feas_tol = j["feas_tol"].get<double>();
  if (j.contains("opt_tol")) s.opt_tol = j["opt_tol"].get<double>();
  if (j.contains("variable_cap"))
    s.variable_cap = j["variable_cap"].get<long>();
  if (j.contains("entropic_eps"))
    s.entropic_eps = j["entropic_eps"].get<double>();
  if (j.contains("entropic_max_iter"))
    s.entropic_max_iter = j["entropic_max_iter"].get<long>();
  if (j.contains("entropic_marginal_tol"))
    s.entropic_marginal_tol = j["entropic_marginal_tol"].get<double>();
  if (s.feas_tol <= 0 || s.opt_tol <= 0 || s.entropic_eps <= 0 ||
      s.entropic_marginal_tol <= 0 || s.variable_cap <= 0)
    throw ValidationError("solver tolerances must be positive");
  return s;
}

std::shared_ptr<const Surplus> surplus_from_json(
    const Json& j, const std::vector<DiscreteMeasure>& marginals) {
  if (j.contains("bilinear")) {
    return std::make_shared<BilinearSurplus>(
        matrix_from_json(j["bilinear"].at("A")));
  }
  if (!j.contains("prefs"))
    throw ValidationError("oracle JSON needs 'prefs' or 'bilinear'");
  if (marginals.empty()) throw ValidationError("no marginals for the oracle");
  const int n = marginals.front().dim();

  std::vector<PrefPtr> prefs;
  for (const auto& pj : j["prefs"]) {
    const std::string kind = pj.at("kind").get<std::string>();
    if (kind == "quadratic") {
      prefs.push_back(make_quadratic(n));
    } else if (kind == "linear") {
      prefs.push_back(make_linear(n));
    } else if (kind == "brenier") {
      prefs.push_back(make_brenier(n));
    } else if (kind == "heinich") {
      if (!pj.contains("Q"))
        throw ValidationError("heinich preference needs 'Q'");
      prefs.push_back(make_heinich(matrix_from_json(pj["Q"])));
    } else if (kind == "concave_sum") {
      const double quad = pj.value("quad", 0.5);
      const double soft = pj.value("soft", 1.0);
      prefs.push_back(make_concave_sum(n, quad, soft));
    } else {
      throw ValidationError("unknown preference kind: " + kind);
    }
  }
  if (prefs.size() != marginals.size())
    throw ValidationError("need one preference per marginal");

  Box z_box;
  if (j.contains("z_box")) {
    z_box.lo = vector_from_json(j["z_box"].at("lo"));
    z_box.hi = vector_from_json(j["z_box"].at("hi"));
  } else {
    std::vector<Vector> support;
    for (const auto& mu : marginals)
      for (const auto& p : mu.points()) support.push_back(p);
    z_box = default_z_box(support);
  }

  NewtonSettings newton;
  if (j.contains("newton")) {
    const auto& nj = j["newton"];
    newton.max_iter = nj.value("max_iter", newton.max_iter);
    newton.grad_tol = nj.value("grad_tol", newton.grad_tol);
    newton.multistart_agreement =
        nj.value("multistart_agreement", newton.multistart_agreement);
  }
  return std::make_shared<SurplusOracle>(std::move(prefs), std::move(z_box),
                                         newton);
}

Json coupling_to_json(const Coupling& c) {
  Json j;
  j["objective"] = c.objective;
  Json entries = Json::array();
  for (const auto& e : c.entries) {
    Json entry;
    entry["idx"] = e.idx;
    entry["mass"] = e.mass;
    entries.push_back(entry);
  }
  j["entries"] = entries;
  Json info;
  info["method"] = c.info.method;
  if (!c.info.pivot_rule.empty()) info["pivot_rule"] = c.info.pivot_rule;
  info["pivots_phase1"] = c.info.pivots_phase1;
  info["pivots_phase2"] = c.info.pivots_phase2;
  if (c.info.method == "entropic") {
    info["iterations"] = c.info.iterations;
    info["eps"] = c.info.eps;
    info["regularized_objective"] = c.info.regularized_objective;
    info["log_domain"] = c.info.log_domain;
  }
  info["marginal_violation"] = c.info.marginal_violation;
  j["solver"] = info;
  return j;
}

Json plan_to_json(const TransportPlan& p) {
  Json j;
  j["value"] = p.value;
  Json entries = Json::array();
  for (const auto& e : p.entries) {
    Json entry;
    entry["z"] = e.zi;
    entry["x"] = e.xi;
    entry["mass"] = e.mass;
    entries.push_back(entry);
  }
  j["entries"] = entries;
  return j;
}

Json monge_map_to_json(const MongeMap& m) {
  Json j;
  Json pairs = Json::array();
  for (int k = 0; k < m.domain.size(); ++k) {
    Json pair;
    pair["from"] = vector_to_json(m.domain.point(k));
    pair["to"] = vector_to_json(m.to_point[k]);
    pair["to_index"] = m.to_index[k];
    pair["share"] = m.share[k];
    pairs.push_back(pair);
  }
  j["pairs"] = pairs;
  j["pure"] = m.pure();
  j["worst_share"] = m.worst_share();
  return j;
}

Json equivalence_to_json(const EquivalenceReport& r) {
  Json j;
  j["mk_value"] = r.mk_value;
  j["mam_value"] = r.mam_value;
  j["glued_value"] = r.glued_value;
  j["gap"] = r.gap;
  j["t_values"] = r.t_values;
  j["nu_support"] = r.nu_support;
  j["gamma_support"] = r.gamma_support;
  j["carlier_ekeland_pure"] = r.ce_pure;
  j["chiappori_mccann_nesheim_pure"] = r.cmn_pure;
  j["reconstruction_checked"] = r.reconstruction_checked;
  j["reconstruction_linf"] = r.reconstruction_linf;
  j["pivot_value_gap"] = r.pivot_value_gap;
  j["pivot_coupling_linf"] = r.pivot_coupling_linf;
  return j;
}

Json condition_report_to_json(const ConditionReport& r) {
  Json j;
  Json checks = Json::array();
  for (const auto& c : r.checks) {
    Json cj;
    cj["name"] = c.name;
    cj["margin"] = c.margin;
    cj["pass"] = c.pass;
    cj["samples"] = c.samples;
    Json witness = Json::array();
    for (const auto& w : c.witness) witness.push_back(vector_to_json(w));
    cj["witness"] = witness;
    checks.push_back(cj);
  }
  j["checks"] = checks;
  j["all_pass"] = r.all_pass;
  j["note"] = r.note;
  return j;
}

Json repro_report_to_json(const ReproReport& r) {
  Json j;
  j["name"] = r.name;
  j["note"] = r.note;
  j["pass"] = r.pass;
  Json checks = Json::array();
  for (const auto& c : r.checks) {
    Json cj;
    cj["label"] = c.label;
    cj["claimed"] = c.claimed;
    cj["computed"] = c.computed;
    cj["tolerance"] = c.tolerance;
    cj["pass"] = c.pass;
    checks.push_back(cj);
  }
  j["checks"] = checks;
  return j;
}

Json swap_report_to_json(const SwapReport& r) {
  Json j;
  j["coordinate"] = r.coordinate;
  j["pairs_checked"] = r.pairs_checked;
  Json v = Json::array();
  for (const auto& viol : r.violations) {
    Json vj;
    vj["entry_a"] = viol.entry_a;
    vj["entry_b"] = viol.entry_b;
    vj["deficit"] = viol.deficit;
    v.push_back(vj);
  }
  j["violations"] = v;
  return j;
}

Json spacelike_report_to_json(const SpacelikeReport& r) {
  Json j;
  j["pairs"] = r.pairs;
  j["nonnegative"] = r.nonnegative;
  j["fraction"] = r.fraction;
  j["worst"] = r.worst;
  j["delta_loc"] = r.delta_loc;
  j["note"] = "chord heuristic on nearby support pairs; not a pass/fail test";
  return j;
}

Json monge_report_to_json(const MongeReport& r) {
  Json j;
  j["is_graph"] = r.is_graph;
  j["first_atoms"] = r.first_atoms;
  j["tuples_per_first"] = r.tuples_per_first;
  j["dominant_share"] = r.dominant_share;
  return j;
}

Json fixed_point_to_json(const FixedPointResult& r) {
  Json j;
  j["nu"] = measure_to_json(r.nu);
  j["trace"] = r.trace;
  j["outer_iters"] = r.outer_iters;
  j["converged"] = r.converged;
  j["frozen_atoms"] = r.frozen_atoms;
  return j;
}

InstanceSpec instance_spec_from_json(const Json& j) {
  InstanceSpec spec;
  spec.m = j.value("m", spec.m);
  spec.n = j.value("n", spec.n);
  spec.atoms = j.value("atoms", spec.atoms);
  if (j.contains("box")) {
    spec.box_lo = vector_from_json(j["box"].at("lo"));
    spec.box_hi = vector_from_json(j["box"].at("hi"));
  }
  if (j.contains("weights")) {
    const std::string w = j["weights"].get<std::string>();
    if (w == "uniform")
      spec.weights = WeightScheme::Uniform;
    else if (w == "random")
      spec.weights = WeightScheme::Random;
    else
      throw ValidationError("unknown weight scheme: " + w);
  }
  spec.seed = j.value("seed", spec.seed);
  return spec;
}

void write_json_file(const Json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << j.dump(2) << '\n';
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  try {
    Json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("invalid JSON in " + path + ": " + e.what());
  }
}

}  // namespace mmot
