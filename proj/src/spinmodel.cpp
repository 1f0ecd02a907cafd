#include "impent/spinmodel.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <sstream>
#include <utility>

#include "impent/errors.hpp"

namespace impent {

namespace {

// 2^30 configurations already exceeds any sector we can store; stay well clear
// of the 32-bit column index limit.
constexpr int kMaxSites = 30;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

// Next integer with the same popcount (Gosper's hack).
std::uint64_t next_combination(std::uint64_t v) {
  const std::uint64_t t = v | (v - 1);
  return (t + 1) | (((~t & -~t) - 1) >> (std::countr_zero(v) + 1));
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::TwoImpurityKondo ? "2ikm" : "2ckm";
}

ModelKind parse_model_kind(std::string_view text) {
  const std::string t = lower(text);
  if (t == "2ikm") return ModelKind::TwoImpurityKondo;
  if (t == "2ckm") return ModelKind::TwoChannelKondo;
  throw ModelParamError("unknown model kind '" + std::string(text) + "' (expected 2ikm or 2ckm)");
}

int ModelParams::n_total() const {
  return kind == ModelKind::TwoImpurityKondo ? n_left + n_right : n_left + n_right + 1;
}

ModelParams ModelParams::with_total_size(ModelKind kind, int n_total, double j_prime,
                                         double control, double j2_ratio) {
  ModelParams p;
  p.kind = kind;
  p.j_prime = j_prime;
  p.control = control;
  p.j2_ratio = j2_ratio;
  if (kind == ModelKind::TwoImpurityKondo) {
    if (n_total % 2 != 0) {
      throw ModelSizeError("2ikm needs an even total size (N_L = N_R), got " + std::to_string(n_total));
    }
    p.n_left = p.n_right = n_total / 2;
  } else {
    if (n_total % 2 != 1) {
      throw ModelSizeError("2ckm needs an odd total size (N_L = N_R), got " + std::to_string(n_total));
    }
    p.n_left = p.n_right = (n_total - 1) / 2;
  }
  return p;
}

int bulk_length(const ModelParams& params) {
  return params.kind == ModelKind::TwoImpurityKondo ? params.n_left - 1 : params.n_left;
}

std::vector<std::string> validate(const ModelParams& params) {
  std::vector<std::string> warnings;
  if (params.n_left != params.n_right) {
    throw ModelSizeError("n_left and n_right must be equal (got " + std::to_string(params.n_left) +
                         ", " + std::to_string(params.n_right) + ")");
  }
  if (!(params.j1 > 0.0) || !std::isfinite(params.j1)) throw ModelParamError("j1 must be positive");
  if (!(params.j_prime >= 0.0) || !std::isfinite(params.j_prime)) {
    throw ModelParamError("j_prime must be non-negative and finite");
  }
  if (!(params.control >= 0.0) || !std::isfinite(params.control)) {
    throw ModelParamError("control parameter must be non-negative and finite");
  }
  if (!(params.j2_ratio >= 0.0) || !std::isfinite(params.j2_ratio)) {
    throw ModelParamError("j2_ratio must be non-negative and finite");
  }
  // The impurity couples to bulk sites 1 and 2; both must exist unless J2 = 0.
  const int need = params.j2_ratio == 0.0 ? 1 : 2;
  if (bulk_length(params) < need) {
    std::ostringstream os;
    os << to_string(params.kind) << " with n_left=" << params.n_left << " has " << bulk_length(params)
       << " bulk site(s) per side; the next-nearest impurity bond needs at least " << need;
    throw ModelSizeError(os.str());
  }
  if (params.n_total() > kMaxSites) {
    throw ModelSizeError("total size " + std::to_string(params.n_total()) + " exceeds " +
                         std::to_string(kMaxSites));
  }
  if (params.j2_ratio != kCriticalJ2Ratio) {
    std::ostringstream os;
    os << "j2_ratio=" << params.j2_ratio << " differs from the critical value " << kCriticalJ2Ratio;
    warnings.push_back(os.str());
  }
  return warnings;
}

std::optional<int> SiteLayout::position(std::string_view label) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return static_cast<int>(i);
  }
  return std::nullopt;
}

SiteLayout site_layout(const ModelParams& params) {
  SiteLayout layout;
  if (params.kind == ModelKind::TwoImpurityKondo) {
    for (int k = 0; k < params.n_left; ++k) layout.labels.push_back(std::to_string(k) + "_L");
    for (int k = 0; k < params.n_right; ++k) layout.labels.push_back(std::to_string(k) + "_R");
  } else {
    layout.labels.emplace_back("0");
    for (int k = 1; k <= params.n_left; ++k) layout.labels.push_back(std::to_string(k) + "_L");
    for (int k = 1; k <= params.n_right; ++k) layout.labels.push_back(std::to_string(k) + "_R");
  }
  return layout;
}

SectorBasis::SectorBasis(int n_sites, int sz_twice) : n_sites_(n_sites), sz_twice_(sz_twice) {
  if (n_sites < 1 || n_sites > kMaxSites) {
    throw InvalidSectorError("n_sites must lie in [1, " + std::to_string(kMaxSites) + "]");
  }
  if (std::abs(sz_twice) > n_sites) {
    throw InvalidSectorError("|sz_twice| = " + std::to_string(std::abs(sz_twice)) +
                             " exceeds n_sites = " + std::to_string(n_sites));
  }
  if ((n_sites + sz_twice) % 2 != 0) {
    throw InvalidSectorError("n_sites + sz_twice must be even (got " + std::to_string(n_sites) +
                             " + " + std::to_string(sz_twice) + ")");
  }
  const int up = n_up();
  const std::uint64_t limit = std::uint64_t{1} << n_sites;
  if (up == 0) {
    states_.push_back(0);
    return;
  }
  for (std::uint64_t v = (std::uint64_t{1} << up) - 1; v < limit; v = next_combination(v)) {
    states_.push_back(v);
  }
}

std::optional<std::size_t> SectorBasis::index_of(std::uint64_t config) const {
  auto it = std::lower_bound(states_.begin(), states_.end(), config);
  if (it == states_.end() || *it != config) return std::nullopt;
  return static_cast<std::size_t>(it - states_.begin());
}

int ground_sector(int n_sites) { return n_sites % 2 == 0 ? 0 : 1; }

std::shared_ptr<const SectorBasis> sector_basis(int n_sites, int sz_twice) {
  return std::make_shared<const SectorBasis>(n_sites, sz_twice);
}

std::vector<Bond> bonds_2ikm(const ModelParams& params) {
  const double j1 = params.j1;
  const double j2 = params.j2_ratio * params.j1;
  std::vector<Bond> bonds;
  auto add = [&](int a, int b, double w) {
    if (w != 0.0) bonds.push_back({a, b, w});
  };
  for (int side = 0; side < 2; ++side) {
    const int n = side == 0 ? params.n_left : params.n_right;
    const int off = side == 0 ? 0 : params.n_left;
    add(off, off + 1, params.j_prime * j1);
    if (n >= 3) add(off, off + 2, params.j_prime * j2);
    for (int k = 1; k + 1 <= n - 1; ++k) add(off + k, off + k + 1, j1);
    for (int k = 1; k + 2 <= n - 1; ++k) add(off + k, off + k + 2, j2);
  }
  add(0, params.n_left, j1 * params.control);
  return bonds;
}

std::vector<Bond> bonds_2ckm(const ModelParams& params) {
  const double j1 = params.j1;
  const double j2 = params.j2_ratio * params.j1;
  std::vector<Bond> bonds;
  auto add = [&](int a, int b, double w) {
    if (w != 0.0) bonds.push_back({a, b, w});
  };
  for (int side = 0; side < 2; ++side) {
    const int n = side == 0 ? params.n_left : params.n_right;
    // bulk site k (1-based) sits at bit off + k
    const int off = side == 0 ? 0 : params.n_left;
    const double weight = side == 0 ? params.j_prime : params.j_prime * params.control;
    add(0, off + 1, weight * j1);
    if (n >= 2) add(0, off + 2, weight * j2);
    for (int k = 1; k + 1 <= n; ++k) add(off + k, off + k + 1, j1);
    for (int k = 1; k + 2 <= n; ++k) add(off + k, off + k + 2, j2);
  }
  return bonds;
}

SparseOperator::SparseOperator(std::shared_ptr<const SectorBasis> basis, SiteLayout layout,
                               std::vector<std::uint64_t> row_ptr, std::vector<std::uint32_t> col,
                               std::vector<double> val)
    : basis_(std::move(basis)),
      layout_(std::move(layout)),
      row_ptr_(std::move(row_ptr)),
      col_(std::move(col)),
      val_(std::move(val)) {}

kernels::CsrView SparseOperator::csr() const {
  return {dim(), row_ptr_.data(), col_.data(), val_.data()};
}

double SparseOperator::entry(std::size_t row, std::size_t column) const {
  const auto first = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row]);
  const auto last = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[row + 1]);
  auto it = std::lower_bound(first, last, static_cast<std::uint32_t>(column));
  if (it == last || *it != column) return 0.0;
  return val_[static_cast<std::size_t>(it - col_.begin())];
}

bool SparseOperator::is_symmetric() const {
  for (std::size_t r = 0; r < dim(); ++r) {
    for (std::uint64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      if (entry(col_[k], r) != val_[k]) return false;
    }
  }
  return true;
}

void SparseOperator::apply(std::span<const double> x, std::span<double> y) const {
  kernels::spmv(csr(), x, y);
}

SparseOperator SparseOperator::with_corrupted_entry(double factor) const {
  SparseOperator copy = *this;
  for (std::size_t r = 0; r < dim(); ++r) {
    for (std::uint64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      if (col_[k] != r && val_[k] != 0.0) {
        copy.val_[k] *= factor;
        return copy;
      }
    }
  }
  // diagonal-only matrix: corrupt the first diagonal entry instead
  if (!copy.val_.empty()) copy.val_[0] = copy.val_[0] * factor + 1.0;
  return copy;
}

SparseOperator build_heisenberg(std::shared_ptr<const SectorBasis> basis, SiteLayout layout,
                                std::span<const Bond> bonds) {
  const int n = basis->n_sites();
  for (const Bond& b : bonds) {
    if (b.site_a < 0 || b.site_b < 0 || b.site_a >= n || b.site_b >= n || b.site_a == b.site_b) {
      throw ModelSizeError("bond (" + std::to_string(b.site_a) + "," + std::to_string(b.site_b) +
                           ") does not fit a chain of " + std::to_string(n) + " sites");
    }
  }
  const int n_up = basis->n_up();
  std::vector<std::uint64_t> row_ptr{0};
  std::vector<std::uint32_t> col;
  std::vector<double> val;
  std::vector<std::pair<std::uint32_t, double>> row;
  row_ptr.reserve(basis->size() + 1);

  for (std::size_t i = 0; i < basis->size(); ++i) {
    const std::uint64_t s = basis->state(i);
    double diag = 0.0;
    row.clear();
    for (const Bond& b : bonds) {
      const std::uint64_t mask = (std::uint64_t{1} << b.site_a) | (std::uint64_t{1} << b.site_b);
      const bool aligned = ((s >> b.site_a) & 1U) == ((s >> b.site_b) & 1U);
      if (aligned) {
        diag += b.weight;
        continue;
      }
      diag -= b.weight;
      const std::uint64_t t = s ^ mask;
      auto j = basis->index_of(t);
      if (!j || std::popcount(t) != n_up) {
        throw InvalidSectorError("spin exchange left the S^z sector");
      }
      row.emplace_back(static_cast<std::uint32_t>(*j), 2.0 * b.weight);
    }
    row.emplace_back(static_cast<std::uint32_t>(i), diag);
    std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (!col.empty() && col.size() > row_ptr.back() && col.back() == row[k].first) {
        val.back() += row[k].second;
      } else {
        col.push_back(row[k].first);
        val.push_back(row[k].second);
      }
    }
    row_ptr.push_back(col.size());
  }
  return SparseOperator(std::move(basis), std::move(layout), std::move(row_ptr), std::move(col),
                        std::move(val));
}

namespace {

void check_basis(const ModelParams& params, const SectorBasis& basis) {
  if (basis.n_sites() != params.n_total()) {
    throw ModelSizeError("basis has " + std::to_string(basis.n_sites()) + " sites but the model needs " +
                         std::to_string(params.n_total()));
  }
}

}  // namespace

SparseOperator build_2ikm(const ModelParams& params, std::shared_ptr<const SectorBasis> basis) {
  if (params.kind != ModelKind::TwoImpurityKondo) throw ModelParamError("build_2ikm needs a 2ikm model");
  validate(params);
  check_basis(params, *basis);
  const auto bonds = bonds_2ikm(params);
  return build_heisenberg(std::move(basis), site_layout(params), bonds);
}

SparseOperator build_2ckm(const ModelParams& params, std::shared_ptr<const SectorBasis> basis) {
  if (params.kind != ModelKind::TwoChannelKondo) throw ModelParamError("build_2ckm needs a 2ckm model");
  validate(params);
  check_basis(params, *basis);
  const auto bonds = bonds_2ckm(params);
  return build_heisenberg(std::move(basis), site_layout(params), bonds);
}

SparseOperator build_model(const ModelParams& params, std::shared_ptr<const SectorBasis> basis) {
  return params.kind == ModelKind::TwoImpurityKondo ? build_2ikm(params, std::move(basis))
                                                    : build_2ckm(params, std::move(basis));
}

}  // namespace impent
