#pragma once

#include <string>

#include "json.hpp"
#include "mmot/conditions.hpp"
#include "mmot/coupling.hpp"
#include "mmot/diagnostics.hpp"
#include "mmot/matching.hpp"
#include "mmot/problem.hpp"
#include "mmot/repro.hpp"

namespace mmot {

using Json = nlohmann::ordered_json;

Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j);

Json measure_to_json(const DiscreteMeasure& mu);
DiscreteMeasure measure_from_json(const Json& j);

Json settings_to_json(const SolverSettings& s);
SolverSettings settings_from_json(const Json& j, SolverSettings base = {});

/// Oracle spec:
///   { "prefs": [ { "kind": "quadratic" } , { "kind": "heinich", "Q": [[..]] },
///     ... ], "z_box": { "lo": [..], "hi": [..] }, "newton": { ... } }
/// or a direct surplus: { "bilinear": { "A": [[..]] } }.
/// When z_box is omitted it is sized to the marginals.
std::shared_ptr<const Surplus> surplus_from_json(
    const Json& j, const std::vector<DiscreteMeasure>& marginals);

Json coupling_to_json(const Coupling& c);
Json plan_to_json(const TransportPlan& p);
Json monge_map_to_json(const MongeMap& m);
Json equivalence_to_json(const EquivalenceReport& r);
Json condition_report_to_json(const ConditionReport& r);
Json repro_report_to_json(const ReproReport& r);
Json swap_report_to_json(const SwapReport& r);
Json spacelike_report_to_json(const SpacelikeReport& r);
Json monge_report_to_json(const MongeReport& r);
Json fixed_point_to_json(const FixedPointResult& r);

InstanceSpec instance_spec_from_json(const Json& j);

void write_json_file(const Json& j, const std::string& path);
Json read_json_file(const std::string& path);

}  // namespace mmot
