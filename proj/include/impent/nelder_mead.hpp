#pragma once
// Derivative-free simplex minimization (Nelder-Mead with the standard
// reflection/expansion/contraction/shrink coefficients 1, 2, 1/2, 1/2).

#include <functional>
#include <span>
#include <vector>

namespace impent {

struct SimplexOptions {
  int max_evals = 4000;
  /// Stop when the spread of function values over the simplex drops below
  /// ftol * (|f_best| + tiny) and the simplex diameter below xtol.
  double ftol = 1e-14;
  double xtol = 1e-10;
};

struct SimplexResult {
  std::vector<double> x;
  double value = 0.0;
  int evals = 0;
  bool converged = false;
};

/// f may return +inf to reject a point (e.g. outside the feasible region);
/// the starting point itself must be finite.
SimplexResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                          std::span<const double> start, std::span<const double> step,
                          const SimplexOptions& options = {});

}  // namespace impent
