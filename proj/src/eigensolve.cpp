#include "impent/eigensolve.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>

#include "impent/errors.hpp"
#include "impent/kernels.hpp"

namespace impent {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct Ritz {
  double value;
  Eigen::VectorXd coeffs;
};

Ritz lowest_ritz(const std::vector<double>& alpha, const std::vector<double>& beta) {
  const auto m = static_cast<Eigen::Index>(alpha.size());
  Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), m);
  Eigen::VectorXd sub(std::max<Eigen::Index>(m - 1, 0));
  for (Eigen::Index i = 0; i + 1 < m; ++i) sub[i] = beta[static_cast<std::size_t>(i)];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  return {es.eigenvalues()[0], es.eigenvectors().col(0)};
}

// Two passes of classical Gram-Schmidt against every stored Lanczos vector.
void reorthogonalize(const std::vector<std::vector<double>>& basis, std::span<double> w) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& v : basis) kernels::axpy(-kernels::dot(v, w), v, w);
  }
}

}  // namespace

std::vector<double> seeded_unit_vector(std::size_t dim, std::uint64_t seed) {
  std::vector<double> v(dim);
  std::uint64_t state = seed;
  for (auto& x : v) {
    const double u = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
    x = 2.0 * u - 1.0;
  }
  const double n = kernels::norm(v);
  kernels::scal(1.0 / n, v);
  return v;
}

GroundStateResult ground_state(const SparseOperator& op, double tol, int max_iter, std::uint64_t seed) {
  LanczosOptions o;
  o.tol = tol;
  o.max_iter = max_iter;
  o.seed = seed;
  return ground_state(op, o);
}

GroundStateResult ground_state(const SparseOperator& op, const LanczosOptions& options) {
  const std::size_t dim = op.dim();
  GroundStateResult out;
  out.sector = op.basis().sz_twice();

  if (dim == 0) throw ScopeError("ground_state on an empty operator");
  if (dim == 1) {
    out.energy = op.entry(0, 0);
    out.vector = {1.0};
    return out;
  }

  // Scale for the breakdown test: max absolute row sum bounds ||H||.
  double h_scale = 0.0;
  for (std::size_t r = 0; r < dim; ++r) {
    double s = 0.0;
    for (std::uint64_t k = op.row_ptr()[r]; k < op.row_ptr()[r + 1]; ++k) s += std::abs(op.val()[k]);
    h_scale = std::max(h_scale, s);
  }
  const double breakdown = 1e-13 * std::max(h_scale, 1.0);
  const std::size_t krylov_max =
      std::min<std::size_t>(dim, static_cast<std::size_t>(std::max(options.krylov_max, 2)));

  std::vector<double> start = seeded_unit_vector(dim, options.seed);
  std::vector<double> w(dim), h_psi(dim);
  std::vector<std::vector<double>> lanczos;
  std::vector<double> alpha, beta;
  double best_residual = std::numeric_limits<double>::infinity();
  double previous_residual = best_residual;

  for (;;) {
    lanczos.clear();
    alpha.clear();
    beta.clear();
    lanczos.push_back(start);
    Ritz ritz{0.0, {}};

    for (std::size_t j = 0;; ++j) {
      const std::vector<double>& v = lanczos[j];
      op.apply(v, w);
      ++out.iterations;
      const double a = kernels::dot(v, w);
      kernels::axpy(-a, v, w);
      if (j > 0) kernels::axpy(-beta[j - 1], lanczos[j - 1], w);
      reorthogonalize(lanczos, w);
      const double b = kernels::norm(w);
      alpha.push_back(a);

      ritz = lowest_ritz(alpha, beta);
      out.ritz_history.push_back(ritz.value);
      const double estimate = b * std::abs(ritz.coeffs[ritz.coeffs.size() - 1]);
      if (estimate < 0.1 * options.tol || b < breakdown || j + 1 >= krylov_max ||
          out.iterations >= options.max_iter) {
        break;
      }
      beta.push_back(b);
      std::vector<double> next(w);
      kernels::scal(1.0 / b, next);
      lanczos.push_back(std::move(next));
    }

    // Ritz vector, then explicit Rayleigh quotient and residual.
    std::vector<double> psi(dim, 0.0);
    for (std::size_t i = 0; i < lanczos.size(); ++i) {
      kernels::axpy(ritz.coeffs[static_cast<Eigen::Index>(i)], lanczos[i], psi);
    }
    kernels::scal(1.0 / kernels::norm(psi), psi);
    op.apply(psi, h_psi);
    ++out.iterations;
    const double energy = kernels::dot(psi, h_psi);
    kernels::axpy(-energy, psi, h_psi);
    const double residual = kernels::norm(h_psi);
    best_residual = std::min(best_residual, residual);

    if (residual <= options.tol) {
      out.energy = energy;
      out.vector = std::move(psi);
      out.residual = residual;
      return out;
    }
    if (out.iterations >= options.max_iter) {
      throw ConvergenceError("Lanczos did not reach residual " + std::to_string(options.tol) + " in " +
                                 std::to_string(options.max_iter) + " products (best " +
                                 std::to_string(best_residual) + ")",
                             best_residual);
    }
    ++out.restarts;
    start = std::move(psi);
    if (residual > 0.5 * previous_residual) {
      // Stagnating: mix in a fresh deterministic direction.
      const auto kick = seeded_unit_vector(dim, options.seed + 0x51ED27ULL * out.restarts);
      kernels::axpy(1e-3, kick, start);
      kernels::scal(1.0 / kernels::norm(start), start);
    }
    previous_residual = residual;
  }
}

DenseSpectrum dense_spectrum_oracle(const SparseOperator& op, std::size_t cap) {
  const std::size_t dim = op.dim();
  if (dim > cap) {
    throw ScopeError("dense oracle: dimension " + std::to_string(dim) + " exceeds cap " + std::to_string(cap));
  }
  const auto n = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::uint64_t k = op.row_ptr()[r]; k < op.row_ptr()[r + 1]; ++k) {
      h(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(op.col()[k])) = op.val()[k];
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  DenseSpectrum out;
  out.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + n);
  out.ground_vector.assign(es.eigenvectors().col(0).data(), es.eigenvectors().col(0).data() + n);
  return out;
}

}  // namespace impent
