#pragma once
// Spin-chain emulations of the two-impurity (2IKM) and two-channel (2CKM)
// Kondo models, built as real symmetric sparse matrices inside one sector of
// conserved total S^z.
//
// Conventions:
//  * J1 = 1 is the unit of energy.
//  * Couplings multiply Pauli-vector products sigma_i . sigma_j, whose
//    two-site matrix has diagonal +1 (aligned) / -1 (anti-aligned) and
//    off-diagonal 2 between |up,down> and |down,up>. The singlet sits at -3.
//  * Open boundaries.
//  * Configurations are bit strings; bit p set means site p is spin up.
//
// Site layouts (bit position = index in the list):
//  2IKM: 0_L, 1_L, ..., (N_L-1)_L, 0_R, 1_R, ..., (N_R-1)_R
//        (the impurity 0_i counts toward N_i, so N = N_L + N_R)
//  2CKM: 0, 1_L, ..., N_L_L, 1_R, ..., N_R_R   (N = N_L + N_R + 1)

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "impent/kernels.hpp"

namespace impent {

enum class ModelKind { TwoImpurityKondo, TwoChannelKondo };

std::string_view to_string(ModelKind kind);
/// Accepts "2ikm" / "2ckm" (case-insensitive).
ModelKind parse_model_kind(std::string_view text);

/// J2/J1 at the dimerization critical point of the J1-J2 chain.
inline constexpr double kCriticalJ2Ratio = 0.2412;

struct ModelParams {
  ModelKind kind = ModelKind::TwoImpurityKondo;
  double j1 = 1.0;
  double j2_ratio = kCriticalJ2Ratio;
  double j_prime = 0.4;
  /// K for the 2IKM, Gamma for the 2CKM.
  double control = 1.0;
  int n_left = 4;
  int n_right = 4;

  int n_total() const;

  /// Parameters for a chain of total length n_total with N_L = N_R.
  static ModelParams with_total_size(ModelKind kind, int n_total, double j_prime, double control,
                                     double j2_ratio = kCriticalJ2Ratio);
};

/// Throws ModelParamError / ModelSizeError; returns non-fatal warnings
/// (e.g. a J2/J1 ratio away from the critical value).
std::vector<std::string> validate(const ModelParams& params);

/// Bulk sites per side: N_i - 1 for the 2IKM, N_i for the 2CKM.
int bulk_length(const ModelParams& params);

struct SiteLayout {
  std::vector<std::string> labels;

  std::size_t size() const { return labels.size(); }
  /// Bit position of a label such as "0_L", "3_R" or "0".
  std::optional<int> position(std::string_view label) const;
};

SiteLayout site_layout(const ModelParams& params);

/// All configurations of n_sites spins with 2*S^z_total = sz_twice, in
/// increasing integer order.
class SectorBasis {
 public:
  SectorBasis(int n_sites, int sz_twice);

  int n_sites() const { return n_sites_; }
  int sz_twice() const { return sz_twice_; }
  int n_up() const { return (n_sites_ + sz_twice_) / 2; }
  std::size_t size() const { return states_.size(); }
  std::span<const std::uint64_t> states() const { return states_; }
  std::uint64_t state(std::size_t i) const { return states_[i]; }
  /// Ordinal of a configuration, or nullopt if it is not in the sector.
  std::optional<std::size_t> index_of(std::uint64_t config) const;

 private:
  int n_sites_;
  int sz_twice_;
  std::vector<std::uint64_t> states_;
};

/// The smallest-|S^z| sector: 0 for even n, +1 (i.e. S^z = +1/2) for odd n.
int ground_sector(int n_sites);

std::shared_ptr<const SectorBasis> sector_basis(int n_sites, int sz_twice);

/// Weighted sigma.sigma coupling between two sites.
struct Bond {
  int site_a;
  int site_b;
  double weight;
};

std::vector<Bond> bonds_2ikm(const ModelParams& params);
std::vector<Bond> bonds_2ckm(const ModelParams& params);

/// Immutable CSR matrix of a Heisenberg-type Hamiltonian in one S^z sector.
class SparseOperator {
 public:
  SparseOperator(std::shared_ptr<const SectorBasis> basis, SiteLayout layout,
                 std::vector<std::uint64_t> row_ptr, std::vector<std::uint32_t> col,
                 std::vector<double> val);

  std::size_t dim() const { return basis_->size(); }
  const SectorBasis& basis() const { return *basis_; }
  std::shared_ptr<const SectorBasis> basis_ptr() const { return basis_; }
  const SiteLayout& layout() const { return layout_; }

  std::size_t nnz() const { return val_.size(); }
  std::span<const std::uint64_t> row_ptr() const { return row_ptr_; }
  std::span<const std::uint32_t> col() const { return col_; }
  std::span<const double> val() const { return val_; }
  kernels::CsrView csr() const;

  /// Stored entry (0 if absent).
  double entry(std::size_t row, std::size_t column) const;
  bool is_symmetric() const;
  /// y = H x using the active kernel table.
  void apply(std::span<const double> x, std::span<double> y) const;

  /// Copy with one stored off-diagonal entry (and only that one) scaled.
  /// Test hook for fault injection; the result is no longer symmetric.
  SparseOperator with_corrupted_entry(double factor) const;

 private:
  std::shared_ptr<const SectorBasis> basis_;
  SiteLayout layout_;
  std::vector<std::uint64_t> row_ptr_;
  std::vector<std::uint32_t> col_;
  std::vector<double> val_;
};

/// Generic builder: sum of weighted sigma.sigma bonds.
SparseOperator build_heisenberg(std::shared_ptr<const SectorBasis> basis, SiteLayout layout,
                                std::span<const Bond> bonds);

SparseOperator build_2ikm(const ModelParams& params, std::shared_ptr<const SectorBasis> basis);
SparseOperator build_2ckm(const ModelParams& params, std::shared_ptr<const SectorBasis> basis);
/// Dispatches on params.kind.
SparseOperator build_model(const ModelParams& params, std::shared_ptr<const SectorBasis> basis);

}  // namespace impent
