#include "mmot/problem.hpp"

#include "mmot/errors.hpp"
#include "mmot/rng.hpp"

namespace mmot {

Problem::Problem(std::vector<DiscreteMeasure> marginals_,
                 std::shared_ptr<const Surplus> surplus_,
                 SolverSettings settings_)
    : marginals(std::move(marginals_)),
      surplus(std::move(surplus_)),
      settings(settings_) {
  if (marginals.size() < 2) throw ValidationError("need m >= 2 marginals");
  if (!surplus) throw ValidationError("problem needs a surplus");
  const int n = marginals.front().dim();
  for (const auto& mu : marginals)
    if (mu.dim() != n) throw ValidationError("marginal dimensions disagree");
  if (surplus->arity() != static_cast<int>(marginals.size()))
    throw ValidationError("surplus arity does not match marginal count");
  if (surplus->dim() != n)
    throw ValidationError("surplus dimension does not match marginals");
}

std::vector<DiscreteMeasure> generate_marginals(const InstanceSpec& spec) {
  if (spec.m < 2) throw ValidationError("instance needs m >= 2");
  if (spec.n < 1) throw ValidationError("instance needs n >= 1");
  if (spec.atoms < 1) throw ValidationError("empty marginal");

  Vector lo = spec.box_lo.size() == spec.n ? spec.box_lo
                                           : Vector::Constant(spec.n, -1.0);
  Vector hi = spec.box_hi.size() == spec.n ? spec.box_hi
                                           : Vector::Constant(spec.n, 1.0);
  if (((hi - lo).array() <= 0.0).any())
    throw ValidationError("empty bounding box");
  const double diam = (hi - lo).norm();
  const double jitter = 1e-7 * diam;

  Rng rng(spec.seed);
  std::vector<DiscreteMeasure> out;
  out.reserve(spec.m);
  for (int i = 0; i < spec.m; ++i) {
    std::vector<Vector> pts;
    std::vector<double> ws;
    for (int k = 0; k < spec.atoms; ++k) {
      Vector p(spec.n);
      for (int d = 0; d < spec.n; ++d) p[d] = rng.uniform(lo[d], hi[d]);
      // generic-position nudge; keeps repeated coordinates apart
      for (int d = 0; d < spec.n; ++d)
        p[d] += jitter * (rng.uniform() - 0.5);
      pts.push_back(std::move(p));
      ws.push_back(spec.weights == WeightScheme::Uniform
                       ? 1.0
                       : rng.uniform(0.2, 1.0));
    }
    out.push_back(
        DiscreteMeasure::normalized(std::move(pts), std::move(ws)));
  }
  return out;
}

std::shared_ptr<SurplusOracle> make_oracle_for(
    const std::vector<DiscreteMeasure>& marginals,
    const std::vector<std::string>& pref_kinds, NewtonSettings newton) {
  if (marginals.empty()) throw ValidationError("no marginals");
  const int n = marginals.front().dim();
  const int m = static_cast<int>(marginals.size());
  if (static_cast<int>(pref_kinds.size()) != m)
    throw ValidationError("need one preference kind per marginal");

  std::vector<PrefPtr> prefs;
  for (const auto& kind : pref_kinds) {
    if (kind == "quadratic") {
      prefs.push_back(make_quadratic(n));
    } else if (kind == "brenier") {
      prefs.push_back(make_brenier(n));
    } else if (kind == "concave_sum") {
      prefs.push_back(make_concave_sum(n));
    } else if (kind == "linear") {
      prefs.push_back(make_linear(n));
    } else if (kind == "heinich") {
      prefs.push_back(make_heinich(Matrix::Identity(n, n)));
    } else {
      throw ValidationError("unknown preference kind: " + kind);
    }
  }

  std::vector<Vector> support;
  for (const auto& mu : marginals)
    for (const auto& p : mu.points()) support.push_back(p);
  return std::make_shared<SurplusOracle>(std::move(prefs),
                                         default_z_box(support), newton);
}

Problem generate_instance(const InstanceSpec& spec) {
  return generate_instance(
      spec, std::vector<std::string>(spec.m, "quadratic"));
}

Problem generate_instance(const InstanceSpec& spec,
                          const std::vector<std::string>& pref_kinds) {
  auto marginals = generate_marginals(spec);
  auto oracle = make_oracle_for(marginals, pref_kinds);
  return Problem(std::move(marginals), std::move(oracle));
}

}  // namespace mmot
