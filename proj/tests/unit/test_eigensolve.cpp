#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <numeric>

#include "impent/eigensolve.hpp"
#include "impent/entanglement.hpp"
#include "impent/errors.hpp"
#include "impent/spinmodel.hpp"

using namespace impent;

namespace {

SparseOperator pair_operator(int sz_twice) {
  SiteLayout layout;
  layout.labels = {"a", "b"};
  const std::vector<Bond> bonds{{0, 1, 1.0}};
  return build_heisenberg(sector_basis(2, sz_twice), layout, bonds);
}

double overlap(const std::vector<double>& a, const std::vector<double>& b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace

TEST_SUITE("eigensolve") {
  TEST_CASE("two-site singlet") {
    const auto op = pair_operator(0);
    const auto gs = ground_state(op, 1e-12, 100, 1);
    CHECK(std::abs(gs.energy + 3.0) <= 1e-12);
    REQUIRE(gs.vector.size() == 2);
    CHECK(std::abs(std::abs(gs.vector[0]) - std::sqrt(0.5)) <= 1e-12);
    CHECK(std::abs(gs.vector[0] + gs.vector[1]) <= 1e-12);
  }

  TEST_CASE("dim-1 sector returns its diagonal element") {
    const auto op = pair_operator(2);
    const auto gs = ground_state(op, 1e-12, 10, 1);
    CHECK(gs.energy == 1.0);
    CHECK(gs.residual == 0.0);
    CHECK(gs.vector == std::vector<double>{1.0});
  }

  TEST_CASE("dense oracle on the two-site full space") {
    std::vector<double> all;
    for (int sz : {-2, 0, 2}) {
      const auto s = dense_spectrum_oracle(pair_operator(sz));
      all.insert(all.end(), s.eigenvalues.begin(), s.eigenvalues.end());
    }
    std::sort(all.begin(), all.end());
    CHECK(all.size() == 4);
    CHECK(std::abs(all[0] + 3.0) <= 1e-12);
    for (int i = 1; i < 4; ++i) CHECK(std::abs(all[i] - 1.0) <= 1e-12);
  }

  TEST_CASE("dense oracle of a diagonal operator is the sorted diagonal") {
    SiteLayout layout;
    layout.labels = {"a", "b", "c", "d"};
    const std::vector<double> diag{3.0, -1.0, 2.0, 0.5, -7.0, 4.0};
    std::vector<std::uint64_t> rp{0, 1, 2, 3, 4, 5, 6};
    std::vector<std::uint32_t> col{0, 1, 2, 3, 4, 5};
    const SparseOperator op(sector_basis(4, 0), layout, rp, col, diag);
    auto sorted = diag;
    std::sort(sorted.begin(), sorted.end());
    const auto s = dense_spectrum_oracle(op);
    REQUIRE(s.eigenvalues.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(s.eigenvalues[i] - sorted[i]) <= 1e-14);
    CHECK(std::abs(ground_state(op, 1e-12, 100, 1).energy + 7.0) <= 1e-12);
  }

  TEST_CASE("open J1 chain of four sites: Lanczos equals dense") {
    SiteLayout layout;
    layout.labels = {"1", "2", "3", "4"};
    const std::vector<Bond> bonds{{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}};
    const auto op = build_heisenberg(sector_basis(4, 0), layout, bonds);
    const double dense = dense_spectrum_oracle(op).eigenvalues.front();
    CHECK(std::abs(ground_state(op, 1e-12, 200, 9).energy - dense) <= 1e-10);
    // 4-site open Heisenberg chain in sigma units: -3 - 2 sqrt(3)
    CHECK(std::abs(dense - (-3.0 - 2.0 * std::sqrt(3.0))) <= 1e-10);
  }

  TEST_CASE("2ikm N=12 agrees with the dense oracle in energy and vector") {
    const auto p = ModelParams::with_total_size(ModelKind::TwoImpurityKondo, 12, 0.4, 0.4);
    const auto op = build_model(p, sector_basis(12, 0));
    const auto dense = dense_spectrum_oracle(op);
    const auto gs = ground_state(op, 1e-10, 5000, 17);
    CHECK(std::abs(gs.energy - dense.eigenvalues.front()) <= 1e-9);
    CHECK(std::abs(overlap(gs.vector, dense.ground_vector)) >= 1.0 - 1e-9);
    CHECK(gs.residual <= 1e-10);
    CHECK(std::abs(overlap(gs.vector, gs.vector) - 1.0) <= 1e-12);
    CHECK(gs.sector == 0);
  }

  TEST_CASE("Ritz values never go below the final energy") {
    const auto p = ModelParams::with_total_size(ModelKind::TwoChannelKondo, 11, 0.5, 1.3);
    const auto op = build_model(p, sector_basis(11, 1));
    const auto gs = ground_state(op, 1e-10, 5000, 5);
    REQUIRE_FALSE(gs.ritz_history.empty());
    for (double r : gs.ritz_history) CHECK(r >= gs.energy - 1e-10);
    for (std::size_t i = 1; i < gs.ritz_history.size(); ++i) CHECK(gs.ritz_history[i] <= gs.ritz_history[i - 1] + 1e-10);
  }

  TEST_CASE("identical inputs give bitwise identical results") {
    const auto p = ModelParams::with_total_size(ModelKind::TwoImpurityKondo, 10, 0.4, 0.2);
    const auto op = build_model(p, sector_basis(10, 0));
    const auto a = ground_state(op, 1e-10, 5000, 42);
    const auto b = ground_state(op, 1e-10, 5000, 42);
    CHECK(a.energy == b.energy);
    CHECK(a.vector == b.vector);
    CHECK(seeded_unit_vector(50, 3) == seeded_unit_vector(50, 3));
    CHECK(seeded_unit_vector(50, 3) != seeded_unit_vector(50, 4));
  }

  TEST_CASE("non-convergence raises with the best residual") {
    const auto p = ModelParams::with_total_size(ModelKind::TwoImpurityKondo, 12, 0.4, 0.4);
    const auto op = build_model(p, sector_basis(12, 0));
    try {
      ground_state(op, 1e-14, 5, 1);
      FAIL("expected a convergence error");
    } catch (const ConvergenceError& e) {
      CHECK(e.best_residual() > 1e-14);
      CHECK(std::isfinite(e.best_residual()));
    }
  }

  TEST_CASE("dense oracle refuses operators above its cap") {
    const auto op = build_model(ModelParams::with_total_size(ModelKind::TwoImpurityKondo, 8, 0.4, 1.0), sector_basis(8, 0));
    CHECK_THROWS_AS(dense_spectrum_oracle(op, 10), ScopeError);
  }

  TEST_CASE("2ckm measures agree between the Sz=+1/2 and Sz=-1/2 ground states") {
    for (double g : {0.6, 1.0, 1.8}) {
      const auto p = ModelParams::with_total_size(ModelKind::TwoChannelKondo, 9, 0.4, g);
      const auto part = default_partition(p);
      TripartiteMeasures m[2];
      int i = 0;
      for (int sz : {1, -1}) {
        const auto op = build_model(p, sector_basis(9, sz));
        const auto gs = ground_state(op, 1e-11, 5000, 8);
        m[i++] = tripartite_measures(StateVector::from_sector(op.basis(), gs.vector, op.layout()), part);
      }
      CHECK(std::abs(m[0].e1 - m[1].e1) <= 1e-9);
      CHECK(std::abs(m[0].e2 - m[1].e2) <= 1e-9);
      CHECK(std::abs(m[0].negativities.n_bc - m[1].negativities.n_bc) <= 1e-9);
    }
  }
}
