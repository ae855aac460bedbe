#include "mmot/run.hpp"

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "mmot/errors.hpp"
#include "mmot/mk_solvers.hpp"
#include "mmot/rng.hpp"

namespace fs = std::filesystem;

namespace mmot {

namespace {

class RunLog {
 public:
  explicit RunLog(const fs::path& path) : out_(path) {}

  void event(const std::string& kind, const Json& payload = Json::object()) {
    Json line;
    line["event"] = kind;
    for (auto& [k, v] : payload.items()) line[k] = v;
    out_ << line.dump() << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
};

std::vector<DiscreteMeasure> marginals_from_manifest(const Json& problem,
                                                     Json& resolved,
                                                     RunLog* log = nullptr) {
  if (!problem.contains("marginals"))
    throw ValidationError("manifest problem needs 'marginals'");
  std::vector<DiscreteMeasure> out;
  Json resolved_marginals = Json::array();
  int index = 0;
  for (const auto& mj : problem["marginals"]) {
    DiscreteMeasure mu;
    if (mj.contains("path")) {
      LoadInfo info;
      const std::string path = mj.at("path").get<std::string>();
      mu = load_measure(path, mj.value("format", std::string("csv")), &info);
      if (log)
        log->event("measure-loaded", {{"marginal", index},
                                      {"path", path},
                                      {"total_mass", info.total_mass},
                                      {"rescale", info.rescale}});
    } else {
      mu = measure_from_json(mj);
    }
    resolved_marginals.push_back(measure_to_json(mu));
    out.push_back(std::move(mu));
    ++index;
  }
  resolved["marginals"] = resolved_marginals;
  return out;
}

struct LoadedProblem {
  Problem problem;
  Json resolved;  // manifest problem block with measures inlined
};

LoadedProblem problem_from_manifest(const Json& manifest,
                                    const RunOverrides& overrides,
                                    RunLog* log = nullptr) {
  if (!manifest.contains("problem"))
    throw ValidationError("manifest needs a 'problem' block");
  const Json& pj = manifest["problem"];
  Json resolved = pj;
  auto marginals = marginals_from_manifest(pj, resolved, log);
  if (!pj.contains("oracle"))
    throw ValidationError("manifest problem needs an 'oracle'");
  auto surplus = surplus_from_json(pj["oracle"], marginals);
  SolverSettings settings;
  if (pj.contains("settings")) settings = settings_from_json(pj["settings"]);
  if (overrides.pivot) settings.pivot = *overrides.pivot;
  if (overrides.entropic_eps) settings.entropic_eps = *overrides.entropic_eps;
  resolved["settings"] = settings_to_json(settings);
  return {Problem(std::move(marginals), std::move(surplus), settings),
          std::move(resolved)};
}

Json versions_json() {
  Json j;
  j["toolkit"] = kToolkitVersion;
  j["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
               std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  j["compiler"] = __VERSION__;
  return j;
}

fs::path prepare_out_dir(const std::string& command, const Json& manifest,
                         const RunOverrides& overrides) {
  std::string dir;
  if (overrides.out_dir)
    dir = *overrides.out_dir;
  else if (manifest.contains("out"))
    dir = manifest["out"].get<std::string>();
  else
    dir = "mmot-run-" + command;
  fs::create_directories(dir);
  return dir;
}

void do_solve_mk(const Json& manifest, const RunOverrides& overrides,
                 const fs::path& out, RunLog& log) {
  LoadedProblem lp = problem_from_manifest(manifest, overrides);
  const Problem& problem = lp.problem;

  Coupling gamma = solve_mk_exact(problem);
  write_json_file(coupling_to_json(gamma), (out / "coupling.json").string());
  log.event("artifact", {{"file", "coupling.json"}});

  Json diag;
  diag["graph"] = monge_report_to_json(graph_check(gamma));
  Json swaps = Json::array();
  for (int i = 0; i < problem.arity(); ++i)
    swaps.push_back(
        swap_report_to_json(swap_monotonicity_check(gamma, *problem.surplus, i)));
  diag["swap"] = swaps;
  diag["spacelike"] =
      spacelike_report_to_json(spacelike_diagnostic(gamma, *problem.surplus));
  write_json_file(diag, (out / "diagnostics.json").string());
  log.event("artifact", {{"file", "diagnostics.json"}});

  const bool want_entropic =
      overrides.entropic_eps.has_value() || manifest.contains("entropic");
  if (want_entropic) {
    double eps = problem.settings.entropic_eps;
    if (manifest.contains("entropic") && manifest["entropic"].is_object())
      eps = manifest["entropic"].value("eps", eps);
    if (overrides.entropic_eps) eps = *overrides.entropic_eps;
    Coupling ent = solve_mk_entropic(problem, eps);
    write_json_file(coupling_to_json(ent),
                    (out / "coupling_entropic.json").string());
    log.event("artifact", {{"file", "coupling_entropic.json"}});
  }

  write_coupling_csv(gamma, (out / "coupling_support.csv").string());
  log.event("artifact", {{"file", "coupling_support.csv"}});
}

void do_solve_mam(const Json& manifest, const RunOverrides& overrides,
                  const fs::path& out, RunLog& log) {
  LoadedProblem lp = problem_from_manifest(manifest, overrides);
  const Problem& problem = lp.problem;

  MamSolution sol = solve_mam_via_mk(problem);
  write_json_file(measure_to_json(sol.nu), (out / "nu.json").string());
  write_json_file(coupling_to_json(sol.coupling),
                  (out / "coupling.json").string());
  log.event("artifact", {{"file", "nu.json"}});

  MongeExtraction extraction = extract_monge_maps(sol.nu, problem);
  Json maps;
  Json f_maps = Json::array();
  for (const auto& m : extraction.maps) f_maps.push_back(monge_map_to_json(m));
  maps["F"] = f_maps;
  std::vector<MongeMap> g_maps;
  if (extraction.all_pure) {
    try {
      g_maps = compose_monge_maps(extraction.maps);
      Json gj = Json::array();
      for (const auto& m : g_maps) gj.push_back(monge_map_to_json(m));
      maps["G"] = gj;
    } catch (const ValidationError& e) {
      maps["G_error"] = e.what();
    }
  }
  maps["pure"] = extraction.all_pure;
  write_json_file(maps, (out / "maps.json").string());
  log.event("artifact", {{"file", "maps.json"}});

  // plans against the canonical contract measure used by the maps
  const auto& oracle = *problem.oracle();
  Json plans = Json::array();
  for (int i = 0; i < problem.arity(); ++i)
    plans.push_back(plan_to_json(solve_ot2(*oracle.prefs()[i], extraction.nu,
                                           problem.marginals[i],
                                           problem.settings)));
  write_json_file(plans, (out / "plans.json").string());
  log.event("artifact", {{"file", "plans.json"}});

  // fixed-point pass; by default initialized at the exact contract measure
  int max_outer = 100;
  std::string init_kind = "via_mk";
  int init_atoms = sol.nu.size();
  if (manifest.contains("fixed_point")) {
    const auto& fj = manifest["fixed_point"];
    max_outer = fj.value("max_outer", max_outer);
    init_kind = fj.value("init", init_kind);
    init_atoms = fj.value("atoms", init_atoms);
  }
  DiscreteMeasure init = sol.nu;
  if (init_kind == "random") {
    std::uint64_t seed = overrides.seed.value_or(
        manifest.value("seed", static_cast<std::uint64_t>(0)));
    Rng rng(seed);
    std::vector<Vector> support;
    for (const auto& mu : problem.marginals)
      for (const auto& p : mu.points()) support.push_back(p);
    const Box box = default_z_box(support);
    std::vector<Vector> pts;
    for (int k = 0; k < init_atoms; ++k) {
      Vector z(problem.dim());
      for (int d = 0; d < problem.dim(); ++d)
        z[d] = rng.uniform(box.lo[d], box.hi[d]);
      pts.push_back(std::move(z));
    }
    init = DiscreteMeasure(std::move(pts),
                           std::vector<double>(init_atoms, 1.0 / init_atoms));
  } else if (init_kind != "via_mk") {
    throw ValidationError("unknown fixed_point init: " + init_kind);
  }
  FixedPointResult fp = solve_mam_fixed_point(problem, init, max_outer);
  write_json_file(fixed_point_to_json(fp), (out / "fixed_point.json").string());
  log.event("artifact", {{"file", "fixed_point.json"}});

  write_atoms_csv(sol.nu, (out / "nu_atoms.csv").string());
  write_map_arrows_csv(extraction.maps, g_maps,
                       (out / "map_arrows.csv").string());
  write_trace_csv(fp.trace, (out / "objective_trace.csv").string());
  log.event("artifact", {{"file", "objective_trace.csv"}});
}

void do_verify_equivalence(const Json& manifest, const RunOverrides& overrides,
                           const fs::path& out, RunLog& log) {
  LoadedProblem lp = problem_from_manifest(manifest, overrides);
  const EquivalenceReport report = verify_equivalence(lp.problem);
  write_json_file(equivalence_to_json(report),
                  (out / "equivalence.json").string());
  log.event("artifact", {{"file", "equivalence.json"}});
}

void do_check_surplus(const Json& manifest, const RunOverrides& overrides,
                      const fs::path& out, RunLog& log) {
  LoadedProblem lp = problem_from_manifest(manifest, overrides);
  const Problem& problem = lp.problem;

  ConditionSampleSpec spec;
  {
    Vector lo = problem.marginals.front().bounding_box().first;
    Vector hi = problem.marginals.front().bounding_box().second;
    for (const auto& mu : problem.marginals) {
      const auto [l, h] = mu.bounding_box();
      lo = lo.cwiseMin(l);
      hi = hi.cwiseMax(h);
    }
    // widen degenerate boxes so sampling has room
    for (int d = 0; d < problem.dim(); ++d) {
      if (hi[d] - lo[d] < 1e-9) {
        lo[d] -= 0.5;
        hi[d] += 0.5;
      }
    }
    spec.x_box = Box{lo, hi};
  }
  spec.seed = overrides.seed.value_or(
      manifest.value("seed", static_cast<std::uint64_t>(0)));
  if (manifest.contains("samples")) {
    const auto& sj = manifest["samples"];
    spec.tuples = sj.value("tuples", spec.tuples);
    spec.pair_samples = sj.value("pairs", spec.pair_samples);
    spec.seed = sj.value("seed", spec.seed);
    if (sj.contains("x_box")) {
      spec.x_box.lo = vector_from_json(sj["x_box"].at("lo"));
      spec.x_box.hi = vector_from_json(sj["x_box"].at("hi"));
    }
  }

  Json report = condition_report_to_json(check_conditions(*lp.problem.surplus, spec));

  if (manifest.contains("condition_iii")) {
    const auto* oracle = problem.oracle();
    if (!oracle)
      throw ValidationError("condition III points need a sup-form oracle");
    Json points = Json::array();
    for (const auto& cj : manifest["condition_iii"]) {
      const Matrix t = condition_iii_matrix(
          *oracle, vector_from_json(cj.at("x1")), vector_from_json(cj.at("x2")),
          vector_from_json(cj.at("x3")), vector_from_json(cj.at("x1t")),
          vector_from_json(cj.at("x3t")));
      Eigen::SelfAdjointEigenSolver<Matrix> es(t);
      Json pj;
      Json rows = Json::array();
      for (int r = 0; r < t.rows(); ++r) {
        Json row = Json::array();
        for (int c = 0; c < t.cols(); ++c) row.push_back(t(r, c));
        rows.push_back(row);
      }
      pj["T"] = rows;
      Json eigs = Json::array();
      for (int k = 0; k < t.rows(); ++k) eigs.push_back(es.eigenvalues()[k]);
      pj["eigenvalues"] = eigs;
      pj["positive_definite"] = es.eigenvalues().minCoeff() > 0.0;
      points.push_back(pj);
    }
    report["condition_iii_points"] = points;
  }

  write_json_file(report, (out / "conditions.json").string());
  log.event("artifact", {{"file", "conditions.json"}});
}

int do_paper_repro(const fs::path& out, RunLog& log) {
  const auto reports = run_all_repro_cases();
  Json j = Json::array();
  bool all_pass = true;
  for (const auto& r : reports) {
    j.push_back(repro_report_to_json(r));
    all_pass &= r.pass;
  }
  write_json_file(j, (out / "repro.json").string());
  log.event("artifact", {{"file", "repro.json"}});
  print_repro_table(reports, std::cout);
  if (!all_pass) {
    log.event("error", {{"exit_code", kExitAssertion},
                        {"error", "reproduction checks failed"}});
    return kExitAssertion;
  }
  return kExitOk;
}

void do_gen_instance(const Json& manifest, const RunOverrides& overrides,
                     const fs::path& out, RunLog& log) {
  if (!manifest.contains("instance"))
    throw ValidationError("gen-instance needs an 'instance' block");
  InstanceSpec spec = instance_spec_from_json(manifest["instance"]);
  if (overrides.seed) spec.seed = *overrides.seed;

  std::vector<std::string> kinds(spec.m, "quadratic");
  if (manifest["instance"].contains("prefs")) {
    kinds.clear();
    for (const auto& k : manifest["instance"]["prefs"])
      kinds.push_back(k.get<std::string>());
  }
  const auto marginals = generate_marginals(spec);
  if (static_cast<int>(kinds.size()) != spec.m)
    throw ValidationError("instance prefs must list one kind per marginal");

  Json problem;
  Json mj = Json::array();
  for (const auto& mu : marginals) mj.push_back(measure_to_json(mu));
  problem["marginals"] = mj;
  Json prefs = Json::array();
  for (const auto& k : kinds) {
    Json p;
    p["kind"] = k;
    if (k == "heinich") {
      Json q = Json::array();
      for (int r = 0; r < spec.n; ++r) {
        Json row = Json::array();
        for (int c = 0; c < spec.n; ++c) row.push_back(r == c ? 1.0 : 0.0);
        q.push_back(row);
      }
      p["Q"] = q;
    }
    prefs.push_back(p);
  }
  Json oracle;
  oracle["prefs"] = prefs;
  problem["oracle"] = oracle;
  problem["settings"] = settings_to_json(SolverSettings{});

  Json out_manifest;
  out_manifest["problem"] = problem;
  out_manifest["seed"] = spec.seed;
  write_json_file(out_manifest, (out / "problem.json").string());
  log.event("artifact", {{"file", "problem.json"}});
}

}  // namespace

void write_coupling_csv(const Coupling& c, const std::string& path) {
  if (c.entries.empty())
    throw InternalError("refusing to plot an empty coupling");
  std::ofstream csv(path);
  if (!csv) throw ValidationError("cannot write " + path);
  const int m = c.arity();
  const int n = c.marginals.front().dim();
  for (int i = 0; i < m; ++i)
    for (int d = 0; d < n; ++d) csv << "x" << i + 1 << "_" << d + 1 << ",";
  csv << "mass\n";
  csv.precision(17);
  for (const auto& e : c.entries) {
    for (int i = 0; i < m; ++i) {
      const Vector& p = c.marginals[i].point(e.idx[i]);
      for (int d = 0; d < n; ++d) csv << p[d] << ",";
    }
    csv << e.mass << "\n";
  }
}

void write_atoms_csv(const DiscreteMeasure& mu, const std::string& path) {
  if (mu.size() == 0) throw InternalError("refusing to plot an empty measure");
  std::ofstream csv(path);
  if (!csv) throw ValidationError("cannot write " + path);
  for (int d = 0; d < mu.dim(); ++d) csv << "z_" << d + 1 << ",";
  csv << "w\n";
  csv.precision(17);
  for (int k = 0; k < mu.size(); ++k) {
    for (int d = 0; d < mu.dim(); ++d) csv << mu.point(k)[d] << ",";
    csv << mu.weight(k) << "\n";
  }
}

void write_map_arrows_csv(const std::vector<MongeMap>& f_maps,
                          const std::vector<MongeMap>& g_maps,
                          const std::string& path) {
  if (f_maps.empty()) throw InternalError("no maps to plot");
  std::ofstream csv(path);
  if (!csv) throw ValidationError("cannot write " + path);
  const int n = f_maps.front().domain.dim();
  csv << "map,";
  for (int d = 0; d < n; ++d) csv << "from_" << d + 1 << ",";
  for (int d = 0; d < n; ++d)
    csv << "to_" << d + 1 << (d + 1 < n ? "," : "\n");
  csv.precision(17);
  auto emit = [&](const std::string& name, const MongeMap& m) {
    for (int k = 0; k < m.domain.size(); ++k) {
      csv << name << ",";
      for (int d = 0; d < n; ++d) csv << m.domain.point(k)[d] << ",";
      for (int d = 0; d < n; ++d)
        csv << m.to_point[k][d] << (d + 1 < n ? "," : "\n");
    }
  };
  for (std::size_t i = 0; i < f_maps.size(); ++i)
    emit("F" + std::to_string(i + 1), f_maps[i]);
  for (std::size_t i = 0; i < g_maps.size(); ++i)
    emit("G" + std::to_string(i + 2), g_maps[i]);
}

void write_trace_csv(const std::vector<double>& trace,
                     const std::string& path) {
  if (trace.empty()) throw InternalError("empty objective trace");
  std::ofstream csv(path);
  if (!csv) throw ValidationError("cannot write " + path);
  csv << "iter,objective\n";
  csv.precision(17);
  for (std::size_t k = 0; k < trace.size(); ++k)
    csv << k << "," << trace[k] << "\n";
}

int run_command_json(const std::string& command, const Json& manifest,
                     const RunOverrides& overrides) {
  fs::path out;
  try {
    out = prepare_out_dir(command, manifest, overrides);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  RunLog log(out / "run.log");
  log.event("start", {{"command", command}, {"toolkit", kToolkitVersion}});

  try {
    write_json_file(manifest, (out / "manifest.json").string());
    write_json_file(versions_json(), (out / "versions.json").string());

    if (command == "solve-mk") {
      do_solve_mk(manifest, overrides, out, log);
    } else if (command == "solve-mam") {
      do_solve_mam(manifest, overrides, out, log);
    } else if (command == "verify-equivalence") {
      do_verify_equivalence(manifest, overrides, out, log);
    } else if (command == "check-surplus") {
      do_check_surplus(manifest, overrides, out, log);
    } else if (command == "paper-repro") {
      return do_paper_repro(out, log);
    } else if (command == "gen-instance") {
      do_gen_instance(manifest, overrides, out, log);
    } else {
      throw ValidationError("unknown command: " + command);
    }

    // persist the settings the run actually used
    if (manifest.contains("problem")) {
      LoadedProblem lp = problem_from_manifest(manifest, overrides);
      write_json_file(settings_to_json(lp.problem.settings),
                      (out / "settings.json").string());
      Json resolved = manifest;
      resolved["problem"] = lp.resolved;
      write_json_file(resolved, (out / "manifest.json").string());
    }
    log.event("done");
    return kExitOk;
  } catch (const ValidationError& e) {
    log.event("error", {{"exit_code", kExitValidation}, {"error", e.what()}});
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    log.event("error", {{"exit_code", kExitValidation}, {"error", e.what()}});
    std::cerr << "manifest error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const SolverError& e) {
    log.event("error", {{"exit_code", kExitSolver}, {"error", e.what()}});
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const InternalError& e) {
    log.event("error", {{"exit_code", kExitAssertion}, {"error", e.what()}});
    std::cerr << "assertion failure: " << e.what() << "\n";
    return kExitAssertion;
  } catch (const std::exception& e) {
    log.event("error", {{"exit_code", kExitAssertion}, {"error", e.what()}});
    std::cerr << "unexpected error: " << e.what() << "\n";
    return kExitAssertion;
  }
}

int run_command(const std::string& command, const std::string& manifest_path,
                const RunOverrides& overrides) {
  Json manifest = Json::object();
  if (!manifest_path.empty()) {
    try {
      manifest = read_json_file(manifest_path);
    } catch (const ValidationError& e) {
      std::cerr << "validation error: " << e.what() << "\n";
      return kExitValidation;
    }
  } else if (command != "paper-repro") {
    std::cerr << "validation error: command '" << command
              << "' needs --manifest\n";
    return kExitValidation;
  }
  return run_command_json(command, manifest, overrides);
}

}  // namespace mmot
