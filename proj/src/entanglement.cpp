#include "impent/entanglement.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "impent/errors.hpp"

namespace impent {

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0U); }
  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::uint32_t> parent_;
};

std::uint64_t gather_bits(std::uint64_t config, std::span<const int> sites) {
  std::uint64_t out = 0;
  for (std::size_t i = 0; i < sites.size(); ++i) out |= ((config >> sites[i]) & 1U) << i;
  return out;
}

void check_site_set(const SiteSet& sites, int n_sites, const char* what) {
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (sites[i] < 0 || sites[i] >= n_sites) {
      throw PartitionError(std::string(what) + ": site " + std::to_string(sites[i]) + " out of range");
    }
    if (i > 0 && sites[i] <= sites[i - 1]) {
      throw PartitionError(std::string(what) + ": sites must be strictly increasing");
    }
  }
}

SiteSet complement(const SiteSet& sites, int n_sites) {
  SiteSet out;
  for (int s = 0; s < n_sites; ++s) {
    if (!std::binary_search(sites.begin(), sites.end(), s)) out.push_back(s);
  }
  return out;
}

SiteSet sorted_unique(SiteSet s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

// Amplitude matrix psi(kept, traced) split into its connected blocks: two kept
// configurations share a block when some traced configuration couples them.
struct AmplitudeBlock {
  std::vector<std::uint32_t> configs;  // kept-local configs, ascending
  Eigen::MatrixXd m;                   // rows: configs, cols: traced configs
};

std::vector<AmplitudeBlock> amplitude_blocks(const StateVector& state, const SiteSet& keep,
                                             std::size_t cap) {
  const std::size_t kept_dim = std::size_t{1} << keep.size();
  if (keep.size() > 30 || kept_dim > cap) {
    std::ostringstream os;
    os << "kept space of " << keep.size() << " sites (dim " << kept_dim << ") exceeds cap " << cap;
    throw ScopeError(os.str());
  }
  const SiteSet traced = complement(keep, state.n_sites);

  struct Entry {
    std::uint32_t kept;
    std::uint64_t traced;
    double amp;
  };
  std::vector<Entry> entries;
  entries.reserve(state.amps.size());
  for (std::size_t i = 0; i < state.amps.size(); ++i) {
    if (state.amps[i] == 0.0) continue;
    entries.push_back({static_cast<std::uint32_t>(gather_bits(state.configs[i], keep)),
                       gather_bits(state.configs[i], traced), state.amps[i]});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.traced != b.traced ? a.traced < b.traced : a.kept < b.kept;
  });

  UnionFind uf(kept_dim);
  std::vector<char> present(kept_dim, 0);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    present[entries[i].kept] = 1;
    if (i > 0 && entries[i].traced == entries[i - 1].traced) uf.unite(entries[i].kept, entries[i - 1].kept);
  }

  // Components, in order of their smallest config.
  std::vector<int> block_of(kept_dim, -1);
  std::vector<int> row_of(kept_dim, -1);
  std::vector<AmplitudeBlock> blocks;
  for (std::uint32_t c = 0; c < kept_dim; ++c) {
    if (!present[c]) continue;
    const std::uint32_t root = uf.find(c);
    if (block_of[root] < 0) {
      block_of[root] = static_cast<int>(blocks.size());
      blocks.emplace_back();
    }
    auto& b = blocks[static_cast<std::size_t>(block_of[root])];
    row_of[c] = static_cast<int>(b.configs.size());
    b.configs.push_back(c);
  }

  // Column per (block, traced config).
  std::vector<Eigen::Index> n_cols(blocks.size(), 0);
  std::vector<Eigen::Index> col_of(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto b = static_cast<std::size_t>(block_of[uf.find(entries[i].kept)]);
    if (i == 0 || entries[i].traced != entries[i - 1].traced) {
      col_of[i] = n_cols[b]++;
    } else {
      col_of[i] = col_of[i - 1];
    }
  }
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    blocks[b].m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(blocks[b].configs.size()), n_cols[b]);
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto b = static_cast<std::size_t>(block_of[uf.find(entries[i].kept)]);
    blocks[b].m(row_of[entries[i].kept], col_of[i]) = entries[i].amp;
  }
  return blocks;
}

DensityMatrix density_from_blocks(SiteSet keep, std::vector<AmplitudeBlock> amp) {
  std::vector<DensityMatrix::Block> blocks;
  blocks.reserve(amp.size());
  for (auto& a : amp) {
    DensityMatrix::Block b;
    b.configs = std::move(a.configs);
    b.rho = a.m * a.m.transpose();
    blocks.push_back(std::move(b));
  }
  return DensityMatrix(std::move(keep), std::move(blocks));
}

}  // namespace

StateVector StateVector::from_sector(const SectorBasis& basis, std::span<const double> amps, SiteLayout layout) {
  if (amps.size() != basis.size()) throw PartitionError("amplitude count does not match the sector basis");
  StateVector s;
  s.n_sites = basis.n_sites();
  s.configs.assign(basis.states().begin(), basis.states().end());
  s.amps.assign(amps.begin(), amps.end());
  s.layout = std::move(layout);
  return s;
}

StateVector StateVector::from_dense(int n_sites, std::span<const double> full) {
  if (full.size() != (std::size_t{1} << n_sites)) throw PartitionError("dense state has the wrong length");
  StateVector s;
  s.n_sites = n_sites;
  for (std::size_t c = 0; c < full.size(); ++c) {
    if (full[c] != 0.0) {
      s.configs.push_back(c);
      s.amps.push_back(full[c]);
    }
  }
  return s;
}

double StateVector::norm() const {
  double s = 0.0;
  for (double a : amps) s += a * a;
  return std::sqrt(s);
}

std::vector<double> StateVector::to_dense() const {
  std::vector<double> full(std::size_t{1} << n_sites, 0.0);
  for (std::size_t i = 0; i < configs.size(); ++i) full[configs[i]] += amps[i];
  return full;
}

DensityMatrix::DensityMatrix(SiteSet sites, std::vector<Block> blocks)
    : sites_(std::move(sites)), blocks_(std::move(blocks)) {}

DensityMatrix DensityMatrix::from_dense(SiteSet sites, const Eigen::MatrixXd& rho) {
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << sites.size());
  if (rho.rows() != dim || rho.cols() != dim) throw PartitionError("density matrix has the wrong dimension");
  Block b;
  b.configs.resize(static_cast<std::size_t>(dim));
  std::iota(b.configs.begin(), b.configs.end(), 0U);
  b.rho = rho;
  std::vector<Block> blocks;
  blocks.push_back(std::move(b));
  return DensityMatrix(std::move(sites), std::move(blocks));
}

double DensityMatrix::trace() const {
  double t = 0.0;
  for (const auto& b : blocks_) t += b.rho.trace();
  return t;
}

std::vector<double> DensityMatrix::eigenvalues() const {
  std::vector<double> out;
  for (const auto& b : blocks_) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b.rho, Eigen::EigenvaluesOnly);
    out.insert(out.end(), es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  }
  std::sort(out.begin(), out.end());
  return out;
}

Eigen::MatrixXd DensityMatrix::to_dense() const {
  const auto dim = static_cast<Eigen::Index>(full_dim());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& b : blocks_) {
    for (std::size_t i = 0; i < b.configs.size(); ++i) {
      for (std::size_t j = 0; j < b.configs.size(); ++j) {
        out(b.configs[i], b.configs[j]) = b.rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
    }
  }
  return out;
}

double clamp_negativity(double n) {
  if (std::isnan(n)) return n;
  if (n < -kNegativityClamp) {
    std::ostringstream os;
    os << "negativity " << n << " is below the round-off tolerance";
    throw DomainError(os.str());
  }
  return n < 0.0 ? 0.0 : n;
}

std::vector<double> schmidt_coefficients(const StateVector& state, const SiteSet& block, std::size_t cap) {
  const SiteSet b = sorted_unique(block);
  check_site_set(b, state.n_sites, "schmidt block");
  if (b.empty() || static_cast<int>(b.size()) == state.n_sites) {
    throw PartitionError("Schmidt decomposition needs a nonempty proper block");
  }
  const SiteSet rest = complement(b, state.n_sites);
  const SiteSet& smaller = b.size() <= rest.size() ? b : rest;
  std::vector<double> out;
  for (const auto& blk : amplitude_blocks(state, smaller, cap)) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(blk.m);
    const auto& s = svd.singularValues();
    out.insert(out.end(), s.data(), s.data() + s.size());
  }
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

double schmidt_negativity(const StateVector& state, const SiteSet& block, std::size_t cap) {
  const auto s = schmidt_coefficients(state, block, cap);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double x : s) {
    sum += x;
    sum_sq += x * x;
  }
  // (sum s)^2 - 1, written so a slightly unnormalized state still gives 0 for products.
  return clamp_negativity(sum * sum - sum_sq);
}

DensityMatrix reduced_density_matrix(const StateVector& state, const SiteSet& keep, std::size_t cap) {
  SiteSet k = sorted_unique(keep);
  check_site_set(k, state.n_sites, "reduced density matrix");
  if (k.empty() || static_cast<int>(k.size()) == state.n_sites) {
    throw PartitionError("reduced density matrix needs a nonempty proper subset of sites");
  }
  auto blocks = amplitude_blocks(state, k, cap);
  return density_from_blocks(std::move(k), std::move(blocks));
}

DensityMatrix pure_density_matrix(const StateVector& state, std::size_t cap) {
  SiteSet all(static_cast<std::size_t>(state.n_sites));
  std::iota(all.begin(), all.end(), 0);
  auto blocks = amplitude_blocks(state, all, cap);
  return density_from_blocks(std::move(all), std::move(blocks));
}

std::vector<double> partial_transpose_spectrum(const DensityMatrix& rho, const SiteSet& transpose_block) {
  const SiteSet& sites = rho.sites();
  std::uint32_t t_mask = 0;
  for (int s : transpose_block) {
    auto it = std::find(sites.begin(), sites.end(), s);
    if (it == sites.end()) {
      throw PartitionError("transpose site " + std::to_string(s) + " is not part of the density matrix");
    }
    t_mask |= 1U << static_cast<unsigned>(it - sites.begin());
  }
  const std::size_t dim = rho.full_dim();
  const std::uint32_t r_mask = static_cast<std::uint32_t>(dim - 1) & ~t_mask;

  // rho^{T}(z, w) = rho(x, y) with z = (y_T, x_R), w = (x_T, y_R).
  auto row_of = [&](std::uint32_t x, std::uint32_t y) { return (y & t_mask) | (x & r_mask); };
  auto col_of = [&](std::uint32_t x, std::uint32_t y) { return (x & t_mask) | (y & r_mask); };

  UnionFind uf(dim);
  std::vector<char> present(dim, 0);
  for (const auto& b : rho.blocks()) {
    const auto n = static_cast<Eigen::Index>(b.configs.size());
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        if (b.rho(i, j) == 0.0) continue;
        const std::uint32_t x = b.configs[static_cast<std::size_t>(i)];
        const std::uint32_t y = b.configs[static_cast<std::size_t>(j)];
        const std::uint32_t z = row_of(x, y);
        const std::uint32_t w = col_of(x, y);
        present[z] = present[w] = 1;
        uf.unite(z, w);
      }
    }
  }

  std::vector<int> comp_of(dim, -1);
  std::vector<int> local(dim, -1);
  std::vector<Eigen::Index> comp_size;
  for (std::uint32_t c = 0; c < dim; ++c) {
    if (!present[c]) continue;
    const std::uint32_t root = uf.find(c);
    if (comp_of[root] < 0) {
      comp_of[root] = static_cast<int>(comp_size.size());
      comp_size.push_back(0);
    }
    const auto k = static_cast<std::size_t>(comp_of[root]);
    local[c] = static_cast<int>(comp_size[k]++);
  }
  std::vector<Eigen::MatrixXd> mats(comp_size.size());
  for (std::size_t k = 0; k < mats.size(); ++k) mats[k] = Eigen::MatrixXd::Zero(comp_size[k], comp_size[k]);

  for (const auto& b : rho.blocks()) {
    const auto n = static_cast<Eigen::Index>(b.configs.size());
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double v = b.rho(i, j);
        if (v == 0.0) continue;
        const std::uint32_t x = b.configs[static_cast<std::size_t>(i)];
        const std::uint32_t y = b.configs[static_cast<std::size_t>(j)];
        const std::uint32_t z = row_of(x, y);
        const std::uint32_t w = col_of(x, y);
        mats[static_cast<std::size_t>(comp_of[uf.find(z)])](local[z], local[w]) = v;
      }
    }
  }

  std::vector<double> spectrum;
  for (const auto& m : mats) {
    if (m.rows() == 1) {
      spectrum.push_back(m(0, 0));
      continue;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    spectrum.insert(spectrum.end(), es.eigenvalues().data(), es.eigenvalues().data() + m.rows());
  }
  std::sort(spectrum.begin(), spectrum.end());
  return spectrum;
}

double ppt_negativity(const DensityMatrix& rho, const SiteSet& transpose_block) {
  const auto spectrum = partial_transpose_spectrum(rho, transpose_block);
  // sum|l| - sum l equals sum|l| - 1 for unit trace and avoids cancellation.
  double negative = 0.0;
  for (double l : spectrum) {
    if (l < 0.0) negative -= l;
  }
  return clamp_negativity(2.0 * negative);
}

double log_negativity(double n) {
  if (std::isnan(n)) return n;
  return std::log(2.0 * clamp_negativity(n) + 1.0);
}

void TripartitePartition::validate(int n_sites) const {
  std::vector<int> seen(static_cast<std::size_t>(std::max(n_sites, 0)), 0);
  const SiteSet* blocks[] = {&block_a, &block_b, &block_c};
  const char* names[] = {"A", "B", "C"};
  for (int k = 0; k < 3; ++k) {
    if (blocks[k]->empty()) throw PartitionError(std::string("block ") + names[k] + " is empty");
    for (int s : *blocks[k]) {
      if (s < 0 || s >= n_sites) {
        throw PartitionError(std::string("block ") + names[k] + " contains out-of-range site " + std::to_string(s));
      }
      if (seen[static_cast<std::size_t>(s)]++) {
        throw PartitionError("site " + std::to_string(s) + " appears in more than one block");
      }
    }
  }
  for (int s = 0; s < n_sites; ++s) {
    if (!seen[static_cast<std::size_t>(s)]) {
      throw PartitionError("site " + std::to_string(s) + " belongs to no block");
    }
  }
}

TripartitePartition default_partition(const ModelParams& params) {
  TripartitePartition p;
  const int n = params.n_total();
  if (params.kind == ModelKind::TwoImpurityKondo) {
    p.block_a = {0, params.n_left};
    for (int s = 1; s < params.n_left; ++s) p.block_b.push_back(s);
    for (int s = params.n_left + 1; s < n; ++s) p.block_c.push_back(s);
  } else {
    p.block_a = {0};
    for (int s = 1; s <= params.n_left; ++s) p.block_b.push_back(s);
    for (int s = params.n_left + 1; s < n; ++s) p.block_c.push_back(s);
  }
  return p;
}

namespace {

SiteSet merge(const SiteSet& a, const SiteSet& b) {
  SiteSet out(a);
  out.insert(out.end(), b.begin(), b.end());
  return sorted_unique(std::move(out));
}

double pairwise(const StateVector& state, const SiteSet& x, const SiteSet& y, const char* name,
                std::size_t cap) {
  try {
    const DensityMatrix rho = reduced_density_matrix(state, merge(x, y), cap);
    return ppt_negativity(rho, sorted_unique(x));
  } catch (const ScopeError& e) {
    throw ScopeError(std::string("pairwise block ") + name + ": " + e.what());
  }
}

}  // namespace

TripartiteMeasures tripartite_measures(const StateVector& state, const TripartitePartition& partition,
                                       const MeasureOptions& options) {
  partition.validate(state.n_sites);
  const SiteSet a = sorted_unique(partition.block_a);
  const SiteSet b = sorted_unique(partition.block_b);
  const SiteSet c = sorted_unique(partition.block_c);

  TripartiteMeasures m;
  NegativitySet& n = m.negativities;
  n.n_a_bc = schmidt_negativity(state, a, options.cap);
  n.n_b_ac = schmidt_negativity(state, b, options.cap);
  n.n_c_ab = schmidt_negativity(state, c, options.cap);
  auto floor = [&](double& x) {
    if (x < options.zero_floor) x = 0.0;
  };
  floor(n.n_a_bc);
  floor(n.n_b_ac);
  floor(n.n_c_ab);
  m.e1 = std::cbrt(n.n_a_bc * n.n_b_ac * n.n_c_ab);

  if (options.pairwise) {
    n.n_ab = pairwise(state, a, b, "AB", options.cap);
    n.n_ac = pairwise(state, a, c, "AC", options.cap);
    n.n_bc = pairwise(state, b, c, "BC", options.cap);
    floor(n.n_ab);
    floor(n.n_ac);
    floor(n.n_bc);
    m.pi_a = n.n_a_bc * n.n_a_bc - n.n_ab * n.n_ab - n.n_ac * n.n_ac;
    m.pi_b = n.n_b_ac * n.n_b_ac - n.n_ab * n.n_ab - n.n_bc * n.n_bc;
    m.pi_c = n.n_c_ab * n.n_c_ab - n.n_ac * n.n_ac - n.n_bc * n.n_bc;
    m.e2 = (m.pi_a + m.pi_b + m.pi_c) / 3.0;
  } else {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    n.n_ab = n.n_ac = n.n_bc = nan;
    m.pi_a = m.pi_b = m.pi_c = m.e2 = nan;
  }

  NegativitySet& l = m.log_negativities;
  l.n_a_bc = log_negativity(n.n_a_bc);
  l.n_b_ac = log_negativity(n.n_b_ac);
  l.n_c_ab = log_negativity(n.n_c_ab);
  l.n_ab = log_negativity(n.n_ab);
  l.n_ac = log_negativity(n.n_ac);
  l.n_bc = log_negativity(n.n_bc);
  return m;
}

bool satisfies_monogamy(const TripartiteMeasures& m, double eps) {
  if (std::isnan(m.pi_a)) return true;
  return m.pi_a >= -eps && m.pi_b >= -eps && m.pi_c >= -eps;
}

}  // namespace impent
