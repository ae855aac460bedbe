#include <string>

#include "CLI11.hpp"
#include "mmot/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"desk-scale multi-marginal transport and matching toolkit"};
  app.require_subcommand(1);

  std::string manifest;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double entropic_eps = 0.0;
  bool eps_set = false;
  std::string pivot;

  auto add_common = [&](CLI::App* cmd, bool manifest_required) {
    auto* m = cmd->add_option("--manifest", manifest, "manifest JSON path");
    if (manifest_required) m->required();
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--seed", seed, "override the manifest seed")
        ->each([&](const std::string&) { seed_set = true; });
    cmd->add_option("--entropic-eps", entropic_eps,
                    "entropic regularization (enables the entropic pass)")
        ->each([&](const std::string&) { eps_set = true; });
    cmd->add_option("--pivot", pivot, "bland or dantzig")
        ->check(CLI::IsMember({"bland", "dantzig"}));
  };

  add_common(app.add_subcommand("solve-mk",
                                "exact plan plus optimality diagnostics"),
             true);
  add_common(app.add_subcommand(
                 "solve-mam", "contract measure, plans and extracted maps"),
             true);
  add_common(app.add_subcommand("verify-equivalence",
                                "cross-check the two formulations"),
             true);
  add_common(app.add_subcommand("check-surplus",
                                "sampled hypothesis certificate"),
             true);
  add_common(app.add_subcommand("paper-repro",
                                "run the built-in reproduction cases"),
             false);
  add_common(app.add_subcommand("gen-instance",
                                "write a problem manifest from an instance spec"),
             true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return mmot::kExitValidation;
  }

  mmot::RunOverrides overrides;
  if (!out_dir.empty()) overrides.out_dir = out_dir;
  if (seed_set) overrides.seed = seed;
  if (eps_set) overrides.entropic_eps = entropic_eps;
  if (pivot == "bland") overrides.pivot = mmot::PivotRule::Bland;
  if (pivot == "dantzig") overrides.pivot = mmot::PivotRule::Dantzig;

  const std::string command = app.get_subcommands().front()->get_name();
  return mmot::run_command(command, manifest, overrides);
}
