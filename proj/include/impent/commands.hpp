#pragma once
// Subcommands of the impent tool. Each returns a process exit code:
// 0 success, 2 usage or configuration error, 3 partial sweep failure,
// 4 numerical failure.

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "impent/config.hpp"
#include "impent/scaling.hpp"

namespace impent {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitPartial = 3;
inline constexpr int kExitNumerical = 4;

/// Writes <out>/sweep.csv and <out>/sweep.meta.json.
int cmd_sweep(const RunConfig& config, std::ostream& log);

struct FitRequest {
  /// Modes to run, in order; identity reuses exponents from earlier modes.
  std::vector<std::string> modes;
  /// Sweep CSVs; for identity mode alone, fit-report JSONs are accepted too.
  std::vector<std::string> inputs;
  std::optional<double> j_prime;
};

/// Writes <out>/fit_<mode>_<measure>.json per mode and measure, plus
/// <out>/collapse_<measure>.csv (n, x, y) for the collapse mode.
int cmd_fit(const RunConfig& config, const FitRequest& request, std::ostream& log);

/// Dense-vs-Lanczos energies and Schmidt-vs-PPT negativities on the first,
/// middle and last grid point of every (J', N). Writes <out>/oracle_check.json.
int cmd_oracle_check(const RunConfig& config, bool inject_fault, std::ostream& log);

struct SynthRequest {
  SynthKind kind = SynthKind::Collapse7;
  SynthParams params;
  double noise = 0.0;
};

/// Writes <out>/synth.csv in the sweep schema (only the chosen measure column
/// is filled) and <out>/synth.meta.json.
int cmd_synth(const RunConfig& config, const SynthRequest& request, std::ostream& log);

/// Fit report for one mode; exposed for tests.
nlohmann::json fit_report(const RunConfig& config, const std::string& mode, const ScalingDataset& dataset,
                          const nlohmann::json& previous);

/// g_c implied by the policy: the refined peak of the largest size for
/// "peak" (and as the starting point for "fit"), the pinned value for "fixed".
double resolve_gc(const ScalingDataset& dataset, const GcPolicy& policy);

/// Full command-line entry point (argument parsing included).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace impent
