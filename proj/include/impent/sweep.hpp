#pragma once
// Control-parameter sweeps over (g, N) grids, peak location and the
// Kondo-scale fit K_c ~ prefactor * exp(-alpha / J').

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "impent/eigensolve.hpp"
#include "impent/entanglement.hpp"
#include "impent/spinmodel.hpp"

namespace impent {

enum class GridSpacing { Linear, Log };

/// Strictly increasing control values. Throws ConfigError on bad input.
std::vector<double> make_grid(double min, double max, int count, GridSpacing spacing);
void check_grid(std::span<const double> grid);

struct SweepSpec {
  /// Template: kind, j_prime and j2_ratio are used; sizes and control come from the grid.
  ModelParams model;
  std::vector<double> grid;
  std::vector<int> sizes;
  /// Pairwise negativities (needed for E2 and the pi terms).
  bool pairwise = true;
  std::uint64_t seed = 1;
  int workers = 1;
  LanczosOptions solver;
  std::size_t rdm_cap = kDefaultRdmCap;
  double zero_floor = 1e-8;
};

/// Throws ConfigError naming the offending field.
void validate(const SweepSpec& spec);

struct SolverDiagnostics {
  int iterations = 0;
  int restarts = 0;
  double residual = 0.0;
  int sector = 0;
  std::string error;  ///< empty on success
};

struct SweepRecord {
  ModelKind model = ModelKind::TwoImpurityKondo;
  double j_prime = 0.0;
  double control = 0.0;
  int n_total = 0;
  double energy = 0.0;
  TripartiteMeasures measures;
  bool converged = false;
  SolverDiagnostics diagnostics;
};

/// Seed for one grid point: a hash of the model parameters, the sector and the user seed.
std::uint64_t point_seed(const ModelParams& params, int sz_twice, std::uint64_t user_seed);

/// Standalone solve of a single point (what run_sweep does per grid point).
/// Never throws for numerical failures; they land in diagnostics.error.
SweepRecord solve_point(const ModelParams& params, const SweepSpec& settings);

/// Records ordered by (N, g), independent of the worker count. Failed points
/// are kept with converged = false. Throws SweepError if every point fails.
std::vector<SweepRecord> run_sweep(const SweepSpec& spec);

enum class PeakMethod { GridArgmax, ParabolicRefined };

struct PeakEstimate {
  double g_peak = 0.0;
  double e_peak = 0.0;
  PeakMethod method = PeakMethod::GridArgmax;
  int n_total = 0;
  /// Set when refinement was requested but the argmax sits on the grid edge.
  bool boundary_warning = false;
};

/// curve: (g, E) pairs with g strictly increasing, at least 3 points. Ties
/// break toward smaller g. With refine, a parabola through the argmax and its
/// two neighbours gives the estimate.
PeakEstimate locate_peak(std::span<const std::pair<double, double>> curve, bool refine);

struct KondoScaleFit {
  double alpha = 0.0;
  double prefactor = 0.0;
  double residual = 0.0;  ///< RMS of ln K_c residuals
};

/// Least squares of ln K_c against 1/J'. peaks: (J', K_c) pairs.
KondoScaleFit fit_kondo_scale(std::span<const std::pair<double, double>> peaks);

/// (g, measure) curve for one size and J' extracted from sweep records;
/// failed records are skipped. measure is "e1" or "e2".
std::vector<std::pair<double, double>> curve_for(std::span<const SweepRecord> records, int n_total,
                                                 double j_prime, const std::string& measure);

}  // namespace impent
