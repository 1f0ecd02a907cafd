#pragma once
// Ground states by Lanczos iteration with full reorthogonalization, and a
// dense symmetric eigensolve used as an independent oracle in tests and in
// the oracle-check command.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "impent/spinmodel.hpp"

namespace impent {

struct LanczosOptions {
  double tol = 1e-10;        ///< bound on ||H psi - E psi||
  int max_iter = 5000;       ///< total matrix-vector products over all restarts
  std::uint64_t seed = 0;
  int krylov_max = 200;      ///< Krylov dimension before a restart
};

struct GroundStateResult {
  double energy = 0.0;
  std::vector<double> vector;  ///< unit norm, over op.basis()
  double residual = 0.0;       ///< ||H psi - E psi||, recomputed explicitly
  int iterations = 0;          ///< matrix-vector products
  int restarts = 0;
  int sector = 0;              ///< sz_twice
  /// Lowest Ritz value after every Lanczos step, in order.
  std::vector<double> ritz_history;
};

/// Lowest eigenpair of op within its sector. Throws ConvergenceError (with
/// the best residual reached) when max_iter products do not suffice.
GroundStateResult ground_state(const SparseOperator& op, const LanczosOptions& options);
GroundStateResult ground_state(const SparseOperator& op, double tol, int max_iter, std::uint64_t seed);

/// Deterministic start vector in [-1, 1)^dim, normalized. Uses its own bit
/// mixing so results do not depend on the standard library's distributions.
std::vector<double> seeded_unit_vector(std::size_t dim, std::uint64_t seed);

struct DenseSpectrum {
  std::vector<double> eigenvalues;  ///< ascending
  std::vector<double> ground_vector;
};

inline constexpr std::size_t kDefaultDenseCap = 4096;

/// Full spectrum of the operator by a dense symmetric eigensolve. Throws
/// ScopeError when dim exceeds cap.
DenseSpectrum dense_spectrum_oracle(const SparseOperator& op, std::size_t cap = kDefaultDenseCap);

}  // namespace impent
