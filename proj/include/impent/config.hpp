#pragma once
// Run configuration: a JSON file with five sections, overridable from the
// command line. Every field has a documented default, and the resolved
// configuration is written back in full with each run.
//
//   {
//     "model":    {"kind": "2ikm", "j_prime": [0.4], "sizes": [8, 10, 12], "j2_ratio": 0.2412},
//     "grid":     {"min": 0.01, "max": 2.0, "count": 20, "spacing": "log"}   or {"values": [...]},
//     "solver":   {"tol": 1e-10, "max_iter": 5000, "krylov_max": 200, "seed": 1, "workers": 1,
//                  "dense_cap": 4096, "rdm_cap": 16384},
//     "analysis": {"measures": ["e1", "e2"], "pairwise": true, "zero_floor": 1e-8,
//                  "fit_modes": ["power", "collapse", "ansatz", "identity"], "gc_policy": "peak",
//                  "restarts": 16, "collapse_threshold": 0.01},
//     "io":       {"out": "out", "datasets": []}
//   }

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "impent/spinmodel.hpp"
#include "impent/sweep.hpp"

namespace impent {

struct GridConfig {
  double min = 0.01;
  double max = 2.0;
  int count = 20;
  GridSpacing spacing = GridSpacing::Log;
  /// Explicit control values; when nonempty they replace min/max/count.
  std::vector<double> values;

  std::vector<double> points() const;
  bool operator==(const GridConfig&) const = default;
};

enum class GcPolicyKind { Peak, Fixed, Fit };

/// "peak" pins g_c at the refined E peak of the largest size, "fixed=V" pins
/// it at V, "fit" lets the collapse and ansatz fits move it.
struct GcPolicy {
  GcPolicyKind kind = GcPolicyKind::Peak;
  double value = 0.0;

  static GcPolicy parse(const std::string& text);
  std::string str() const;
  bool operator==(const GcPolicy&) const = default;
};

struct RunConfig {
  ModelKind kind = ModelKind::TwoImpurityKondo;
  std::vector<double> j_primes{0.4};
  std::vector<int> sizes{8, 10, 12};
  double j2_ratio = kCriticalJ2Ratio;

  GridConfig grid;

  double tol = 1e-10;
  int max_iter = 5000;
  int krylov_max = 200;
  std::uint64_t seed = 1;
  int workers = 1;
  std::size_t dense_cap = 4096;
  std::size_t rdm_cap = std::size_t{1} << 14;

  std::vector<std::string> measures{"e1", "e2"};
  bool pairwise = true;
  double zero_floor = 1e-8;
  std::vector<std::string> fit_modes{"power", "collapse", "ansatz", "identity"};
  GcPolicy gc_policy;
  int restarts = 16;
  double collapse_threshold = 0.01;

  std::string out_dir = "out";
  std::vector<std::string> datasets;

  bool operator==(const RunConfig&) const = default;
};

/// Defaults that depend on the model: sizes, and a log K grid (2ikm) or a
/// linear Gamma grid centered at 1 (2ckm).
RunConfig default_config(ModelKind kind);

/// Fills every absent field with its default and rejects unknown keys and
/// mistyped values with a ConfigError naming the field (e.g. "grid.count").
RunConfig parse_config(const nlohmann::json& document);
/// Reads a config file. A run metadata file is accepted too: its "config"
/// member is parsed.
RunConfig load_config(const std::filesystem::path& path);

/// Every field, defaults included.
nlohmann::json to_json(const RunConfig& config);

/// Semantic checks that need no computation (size parity, grid order, ...).
void validate(const RunConfig& config);

/// Sweep settings for one J' value.
SweepSpec sweep_spec(const RunConfig& config, double j_prime);

}  // namespace impent
