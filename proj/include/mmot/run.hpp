#pragma once

#include <optional>
#include <string>

#include "mmot/io.hpp"

namespace mmot {

inline constexpr const char* kToolkitVersion = "0.1.0";

/// Exit code taxonomy shared by the CLI and the library-level runner.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitAssertion = 4;

struct RunOverrides {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> entropic_eps;  // also enables the entropic pass
  std::optional<PivotRule> pivot;
};

/// Executes one command against a manifest file and writes a
/// self-contained run directory: resolved manifest, settings, versions,
/// reports, plot CSVs and a machine-readable run log. Returns the exit
/// code; never throws.
///
/// Commands: solve-mk, solve-mam, verify-equivalence, check-surplus,
/// paper-repro, gen-instance.
int run_command(const std::string& command, const std::string& manifest_path,
                const RunOverrides& overrides = {});

/// Same, with the manifest already parsed (used by tests).
int run_command_json(const std::string& command, const Json& manifest,
                     const RunOverrides& overrides = {});

// plot series writers; throw on empty inputs
void write_coupling_csv(const Coupling& c, const std::string& path);
void write_atoms_csv(const DiscreteMeasure& mu, const std::string& path);
void write_map_arrows_csv(const std::vector<MongeMap>& f_maps,
                          const std::vector<MongeMap>& g_maps,
                          const std::string& path);
void write_trace_csv(const std::vector<double>& trace,
                     const std::string& path);

}  // namespace mmot
