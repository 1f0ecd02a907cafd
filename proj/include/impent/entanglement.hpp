#pragma once
// Negativity-based bipartite and tripartite entanglement of real pure states.
//
// Negativity convention used throughout: N = sum_k |lambda_k| - 1 over the
// eigenvalues of the partially transposed density matrix. This is twice the
// other common convention (||rho^T||_1 - 1)/2, so a Bell pair has N = 1.
//
// Tripartite measures for blocks A, B, C:
//   E1   = (N_{A,BC} N_{B,AC} N_{C,AB})^(1/3)
//   pi_A = N_{A,BC}^2 - N_{A,B}^2 - N_{A,C}^2   (cyclic for pi_B, pi_C)
//   E2   = (pi_A + pi_B + pi_C) / 3
// One-vs-rest terms come from Schmidt coefficients; pairwise terms from the
// two-block reduced density matrix and an explicit partial transpose.

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "impent/spinmodel.hpp"

namespace impent {

using SiteSet = std::vector<int>;

/// Real amplitudes over an explicit list of configurations. Sector states and
/// arbitrary (e.g. locally rotated) states use the same representation.
struct StateVector {
  int n_sites = 0;
  std::vector<std::uint64_t> configs;
  std::vector<double> amps;
  SiteLayout layout;

  static StateVector from_sector(const SectorBasis& basis, std::span<const double> amps,
                                 SiteLayout layout = {});
  /// Dense amplitudes over all 2^n configurations; exact zeros are dropped.
  static StateVector from_dense(int n_sites, std::span<const double> full);

  double norm() const;
  /// 2^n dense amplitude vector (tests, small n only).
  std::vector<double> to_dense() const;
};

/// Reduced density matrix on `sites`, stored block-diagonally. Local bit i of
/// a block config corresponds to global site sites[i].
class DensityMatrix {
 public:
  struct Block {
    std::vector<std::uint32_t> configs;
    Eigen::MatrixXd rho;
  };

  DensityMatrix(SiteSet sites, std::vector<Block> blocks);
  /// Single-block matrix over all 2^|sites| configurations.
  static DensityMatrix from_dense(SiteSet sites, const Eigen::MatrixXd& rho);

  const SiteSet& sites() const { return sites_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  std::size_t full_dim() const { return std::size_t{1} << sites_.size(); }
  double trace() const;
  /// All eigenvalues of the stored blocks (absent configs contribute zeros).
  std::vector<double> eigenvalues() const;
  Eigen::MatrixXd to_dense() const;

 private:
  SiteSet sites_;
  std::vector<Block> blocks_;
};

inline constexpr std::size_t kDefaultRdmCap = std::size_t{1} << 14;

/// Tolerance below zero that is still treated as round-off.
inline constexpr double kNegativityClamp = 1e-10;

/// Clamps values in [-1e-10, 0) to 0; throws DomainError below that.
double clamp_negativity(double n);

/// Pure-state negativity across block | rest: (sum_i s_i)^2 - 1 with s_i the
/// Schmidt coefficients.
double schmidt_negativity(const StateVector& state, const SiteSet& block,
                          std::size_t cap = kDefaultRdmCap);

/// Schmidt coefficients across block | rest, descending.
std::vector<double> schmidt_coefficients(const StateVector& state, const SiteSet& block,
                                         std::size_t cap = kDefaultRdmCap);

/// keep must be a nonempty proper subset of the sites.
DensityMatrix reduced_density_matrix(const StateVector& state, const SiteSet& keep,
                                     std::size_t cap = kDefaultRdmCap);

/// |psi><psi| over all sites.
DensityMatrix pure_density_matrix(const StateVector& state, std::size_t cap = kDefaultRdmCap);

/// sum |lambda| - 1 over the spectrum of rho^{T_block}. The transpose is
/// assembled and diagonalized one connected block at a time (for S^z sector
/// states these are the fixed Sz(rest) - Sz(block) sectors).
double ppt_negativity(const DensityMatrix& rho, const SiteSet& transpose_block);

/// Full spectrum of the partial transpose, zero rows omitted.
std::vector<double> partial_transpose_spectrum(const DensityMatrix& rho, const SiteSet& transpose_block);

/// log(2n + 1), natural log.
double log_negativity(double n);

struct TripartitePartition {
  SiteSet block_a;
  SiteSet block_b;
  SiteSet block_c;

  /// Throws PartitionError unless the blocks are nonempty, disjoint and cover [0, n_sites).
  void validate(int n_sites) const;
};

/// A = impurities, B = left bulk, C = right bulk.
TripartitePartition default_partition(const ModelParams& params);

struct NegativitySet {
  double n_a_bc = 0.0;
  double n_b_ac = 0.0;
  double n_c_ab = 0.0;
  double n_ab = 0.0;
  double n_ac = 0.0;
  double n_bc = 0.0;
};

struct TripartiteMeasures {
  double e1 = 0.0;
  double e2 = 0.0;
  double pi_a = 0.0;
  double pi_b = 0.0;
  double pi_c = 0.0;
  NegativitySet negativities;
  NegativitySet log_negativities;
};

struct MeasureOptions {
  /// Pairwise terms (and hence E2, pi) are the expensive part; when false
  /// they are reported as NaN.
  bool pairwise = true;
  std::size_t cap = kDefaultRdmCap;
  /// Negativities below this are reported as exactly 0 before E1/E2 are
  /// assembled. A ground state known to residual r carries spurious Schmidt
  /// weight of order r/gap, which the cube root in E1 would otherwise amplify.
  double zero_floor = 0.0;
};

TripartiteMeasures tripartite_measures(const StateVector& state, const TripartitePartition& partition,
                                       const MeasureOptions& options = {});

/// Tolerance for the monogamy check pi_X >= -eps.
inline constexpr double kMonogamyTolerance = 1e-8;
bool satisfies_monogamy(const TripartiteMeasures& m, double eps = kMonogamyTolerance);

}  // namespace impent
