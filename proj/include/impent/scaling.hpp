#pragma once
// Critical-exponent extraction from tripartite-entanglement tables.
//
//   peak scaling     E(g_c)  ~ N^lambda
//   ansatz           E = A / (|g - g_c|^beta + B N^-lambda)
//   finite-size form E = N^(beta/nu) f(N^(1/nu) |g - g_c|)
//   identity         beta = nu * lambda
//
// The collapse cost is our own quality metric for how well the rescaled
// curves of different sizes fall on one master curve; there is no canonical
// choice for it.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "impent/spinmodel.hpp"
#include "impent/sweep.hpp"

namespace impent {

struct ScalingRow {
  double g = 0.0;
  int n = 0;
  double e = 0.0;
};

struct ScalingDataset {
  std::string measure = "e1";
  ModelKind model = ModelKind::TwoImpurityKondo;
  double j_prime = 0.0;
  std::vector<ScalingRow> rows;
  std::optional<double> g_c;

  /// Distinct sizes, ascending.
  std::vector<int> sizes() const;
  /// (g, E) curve for one size, sorted by g.
  std::vector<std::pair<double, double>> curve(int n) const;
};

/// Rows for one measure ("e1" or "e2") and one J'. Failed or NaN rows are skipped.
ScalingDataset scaling_dataset(std::span<const SweepRecord> records, const std::string& measure,
                               double j_prime);
/// Distinct J' values in a record list, ascending.
std::vector<double> j_prime_values(std::span<const SweepRecord> records);
/// Records carrying only the dataset's measure column (others NaN); used to
/// write synthetic tables in the sweep CSV schema.
std::vector<SweepRecord> to_records(const ScalingDataset& dataset);

struct PowerLawFit {
  double lambda = 0.0;
  double amplitude = 0.0;
  double residual = 0.0;  ///< RMS of the ln E residuals
};

/// Least squares of ln E on ln N; values are (N, E) pairs, at least 3 sizes.
PowerLawFit fit_power_law(std::span<const std::pair<double, double>> values);

/// (N, E at the critical point) per size. With g_c given, each curve is
/// linearly interpolated at g_c; otherwise the refined peak value is used.
/// A size with a single row contributes that row as is.
std::vector<std::pair<double, double>> critical_values(const ScalingDataset& dataset,
                                                       std::optional<double> g_c);

struct CollapsePoint {
  int n = 0;
  double x = 0.0;  ///< N^(1/nu) |g - g_c|
  double y = 0.0;  ///< N^(-beta/nu) E
};

std::vector<CollapsePoint> rescale(const ScalingDataset& dataset, double nu, double beta, double g_c);

/// Mean squared deviation of every rescaled point from the piecewise-linear
/// interpolant of each other size's curve (where the x ranges overlap),
/// divided by the variance of all rescaled y. +inf when nothing overlaps.
double collapse_cost(const ScalingDataset& dataset, double nu, double beta, double g_c);

struct OptimizerRun {
  std::vector<double> start;
  std::vector<double> end;
  double cost = 0.0;
  int evals = 0;
};

struct CollapseFit {
  double nu = 0.0;
  double beta = 0.0;
  double g_c = 0.0;
  double quality = 0.0;
  std::vector<OptimizerRun> trace;
};

struct CollapseOptions {
  bool fit_gc = false;
  int restarts = 16;
  double nu_min = 0.5;
  double nu_max = 4.0;
  double beta_min = 0.0;
  double beta_max = 2.0;
  int max_evals = 3000;
};

/// Multi-start simplex search over (nu, beta) or (nu, beta, g_c). Starts lie on
/// a coarse grid over [nu_min, nu_max] x [beta_min, beta_max]. When g_c is
/// pinned it comes from dataset.g_c (required).
CollapseFit optimize_collapse(const ScalingDataset& dataset, bool fit_gc, int restarts);
CollapseFit optimize_collapse(const ScalingDataset& dataset, const CollapseOptions& options);

struct AnsatzFit {
  double a_coeff = 0.0;
  double b_coeff = 0.0;
  double beta = 0.0;
  double lambda = 0.0;
  double g_c = 0.0;
  double residual = 0.0;  ///< RMS of E_data / E_model - 1
  /// g_c cannot be identified (data on one side of it, or fitted outside the data).
  bool ill_conditioned = false;
};

struct AnsatzOptions {
  /// Defaults to fitting g_c when the dataset does not pin it.
  std::optional<bool> fit_gc;
  /// Optional starting exponents, e.g. from power-law and collapse fits.
  std::optional<double> beta_start;
  std::optional<double> lambda_start;
  int max_evals = 4000;
};

AnsatzFit fit_ansatz(const ScalingDataset& dataset, const AnsatzOptions& options = {});
double ansatz_value(const AnsatzFit& fit, double g, double n);

/// beta - nu * lambda.
double exponent_identity_residual(double beta, double nu, double lambda);

enum class SynthKind { Ansatz6, Collapse7 };
enum class ScalingFunction { Lorentzian, Exponential };  ///< 1/(1+x^2), exp(-x)

struct SynthParams {
  double a = 0.5;
  double b = 2.0;
  double beta = 0.38;
  double lambda = 0.19;
  double nu = 2.0;
  double g_c = 0.3;
  ScalingFunction f = ScalingFunction::Lorentzian;
  /// Interpret grid values as the signed scaling variable x, so that
  /// g = g_c + x N^(-1/nu) for every size (for Ansatz6, nu = beta/lambda).
  bool scaled_grid = false;
};

/// Deterministic synthetic table with multiplicative Gaussian noise
/// E *= 1 + noise * z. dataset.g_c is set to params.g_c.
ScalingDataset synth_generate(SynthKind kind, const SynthParams& params, std::span<const int> sizes,
                              std::span<const double> grid, double noise, std::uint64_t seed,
                              const std::string& measure = "e1");

}  // namespace impent
