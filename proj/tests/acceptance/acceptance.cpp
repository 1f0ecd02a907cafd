// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "impent/commands.hpp"
#include "impent/eigensolve.hpp"
#include "impent/entanglement.hpp"
#include "impent/scaling.hpp"
#include "impent/spinmodel.hpp"
#include "impent/sweep.hpp"
#include "oracles/brute_negativity.hpp"

using namespace impent;
namespace fs = std::filesystem;

namespace {

constexpr double kCanonicalTol = 1e-10;
constexpr double kOracleTol = 1e-9;
constexpr int kOracleConfigs = 24;
constexpr std::size_t kOracleDimCap = 4096;
constexpr double kMonogamyEps = 1e-8;
constexpr int kMonogamyPoints = 20;
constexpr double kMirrorTol = 1e-8;
constexpr double kDimerRatio = 0.01;
constexpr double kNuTol = 0.1;
constexpr double kBetaTol = 0.04;
constexpr double kExactCollapseCost = 1e-12;
constexpr int kCollapseSeeds = 10;
constexpr double kNoise = 0.01;
constexpr double kAnsatzRelTol = 0.01;
constexpr double kIdentityTol = 0.02;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

StateVector ground(const ModelParams& p, std::uint64_t seed = 1) {
  const auto op = build_model(p, sector_basis(p.n_total(), ground_sector(p.n_total())));
  const auto gs = ground_state(op, 1e-11, 20000, seed);
  return StateVector::from_sector(op.basis(), gs.vector, op.layout());
}

std::vector<double> dense_state(int n, std::initializer_list<std::uint64_t> configs) {
  std::vector<double> v(std::size_t{1} << n, 0.0);
  for (auto c : configs) v[c] = 1.0 / std::sqrt(static_cast<double>(configs.size()));
  return v;
}

Outcome canonical_states() {
  double worst = 0.0;
  const auto bell = StateVector::from_dense(2, dense_state(2, {0b00, 0b11}));
  worst = std::max(worst, std::abs(schmidt_negativity(bell, {0}) - 1.0));
  worst = std::max(worst, std::abs(ppt_negativity(pure_density_matrix(bell), {0}) - 1.0));
  const auto product = StateVector::from_dense(2, dense_state(2, {0b00, 0b10}));
  worst = std::max(worst, std::abs(schmidt_negativity(product, {0})));
  const auto ghz = tripartite_measures(StateVector::from_dense(3, dense_state(3, {0b000, 0b111})), {{0}, {1}, {2}});
  worst = std::max({worst, std::abs(ghz.e1 - 1.0), std::abs(ghz.e2 - 1.0)});

  const auto w = dense_state(3, {0b001, 0b010, 0b100});
  const auto wm = tripartite_measures(StateVector::from_dense(3, w), {{0}, {1}, {2}});
  const double one = oracle::negativity(w, 3, {0, 1, 2}, {0});
  const double pair = oracle::negativity(w, 3, {0, 1}, {0});
  double wdev = 0.0;
  for (double v : {wm.negativities.n_a_bc, wm.negativities.n_b_ac, wm.negativities.n_c_ab}) wdev = std::max(wdev, std::abs(v - one));
  for (double v : {wm.negativities.n_ab, wm.negativities.n_ac, wm.negativities.n_bc}) wdev = std::max(wdev, std::abs(v - pair));
  wdev = std::max(wdev, std::abs(wm.e1 - one));
  wdev = std::max(wdev, std::abs(wm.e2 - (one * one - 2 * pair * pair)));
  const bool pass = worst <= kCanonicalTol && wdev <= kCanonicalTol;
  return {pass, "max deviation Bell/product/GHZ " + fmt(worst) + ", W vs brute-force oracle " + fmt(wdev) +
                    " (W pairwise N = " + fmt(pair) + ")"};
}

Outcome oracle_equivalence() {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double e_dev = 0.0, n_dev = 0.0;
  int done = 0;
  while (done < kOracleConfigs) {
    const bool ikm = rng() % 2 == 0;
    const int n = ikm ? 6 + 2 * static_cast<int>(rng() % 4) : 5 + 2 * static_cast<int>(rng() % 5);
    const double jp = 0.2 + 0.8 * u(rng);
    const double g = ikm ? 0.01 * std::pow(300.0, u(rng)) : 0.2 + 2.3 * u(rng);
    const auto p = ModelParams::with_total_size(ikm ? ModelKind::TwoImpurityKondo : ModelKind::TwoChannelKondo, n, jp, g);
    const auto op = build_model(p, sector_basis(n, ground_sector(n)));
    if (op.dim() > kOracleDimCap) continue;
    const auto dense = dense_spectrum_oracle(op, kOracleDimCap);
    const auto gs = ground_state(op, 1e-10, 5000, point_seed(p, ground_sector(n), 1));
    e_dev = std::max(e_dev, std::abs(gs.energy - dense.eigenvalues.front()));
    const auto state = StateVector::from_sector(op.basis(), gs.vector, op.layout());
    const auto rho = pure_density_matrix(state);
    const auto part = default_partition(p);
    for (const auto* b : {&part.block_a, &part.block_b, &part.block_c}) {
      n_dev = std::max(n_dev, std::abs(schmidt_negativity(state, *b) - ppt_negativity(rho, *b)));
    }
    ++done;
  }
  return {e_dev <= kOracleTol && n_dev <= kOracleTol, std::to_string(done) + " configurations, max |dE| " + fmt(e_dev) +
                                                           ", max |N_schmidt - N_ppt| " + fmt(n_dev)};
}

SweepSpec spec_for(ModelKind kind, double jp, std::vector<int> sizes, std::vector<double> grid) {
  SweepSpec s;
  s.model = ModelParams::with_total_size(kind, kind == ModelKind::TwoImpurityKondo ? 8 : 9, jp, 1.0);
  s.sizes = std::move(sizes);
  s.grid = std::move(grid);
  return s;
}

std::vector<double> ikm_grid() { return make_grid(0.01, 2.0, kMonogamyPoints, GridSpacing::Log); }
std::vector<double> ckm_grid() { return make_grid(0.1, 1.9, 19, GridSpacing::Linear); }
std::vector<double> ckm_battery_grid() { return make_grid(0.1, 2.0, kMonogamyPoints, GridSpacing::Linear); }

Outcome monogamy() {
  int states = 0, violations = 0, failed = 0;
  double min_pi = 1e300;
  for (double jp : {0.4, 0.5}) {
    for (auto [kind, sizes, grid] :
         {std::tuple{ModelKind::TwoImpurityKondo, std::vector<int>{8, 10, 12, 14}, ikm_grid()},
          std::tuple{ModelKind::TwoChannelKondo, std::vector<int>{9, 11, 13}, ckm_battery_grid()}}) {
      for (const auto& r : run_sweep(spec_for(kind, jp, sizes, grid))) {
        if (!r.converged) {
          ++failed;
          continue;
        }
        ++states;
        const double m = std::min({r.measures.pi_a, r.measures.pi_b, r.measures.pi_c});
        min_pi = std::min(min_pi, m);
        if (m < -kMonogamyEps) ++violations;
      }
    }
  }
  return {violations == 0 && failed == 0, std::to_string(states) + " ground states, " + std::to_string(violations) +
                                              " violations, " + std::to_string(failed) + " unsolved, min pi " +
                                              fmt(min_pi)};
}

Outcome divergence() {
  std::ostringstream os;
  bool pass = true;
  auto max_of = [](const std::vector<std::pair<double, double>>& c) {
    return *std::max_element(c.begin(), c.end(), [](auto& a, auto& b) { return a.second < b.second; });
  };
  {
    auto spec = spec_for(ModelKind::TwoImpurityKondo, 0.4, {8, 12}, ikm_grid());
    spec.pairwise = false;
    const auto rec = run_sweep(spec);
    const auto a = max_of(curve_for(rec, 8, 0.4, "e1"));
    const auto b = max_of(curve_for(rec, 12, 0.4, "e1"));
    const bool grow = b.second > a.second;
    pass = pass && grow;
    os << "2ikm max E1 N=8 " << fmt(a.second) << " -> N=12 " << fmt(b.second) << (grow ? " (grows)" : " (does not grow)");
  }
  {
    const auto grid = ckm_grid();
    auto spec = spec_for(ModelKind::TwoChannelKondo, 0.4, {9, 13}, grid);
    spec.pairwise = false;
    const auto rec = run_sweep(spec);
    const auto a = max_of(curve_for(rec, 9, 0.4, "e1"));
    const auto b = max_of(curve_for(rec, 13, 0.4, "e1"));
    const bool grow = b.second > a.second;
    const double step = grid[1] - grid[0];
    const bool located = std::abs(b.first - 1.0) <= step + 1e-12 && std::abs(a.first - 1.0) <= step + 1e-12;
    pass = pass && grow && located;
    os << "; 2ckm max E1 N=9 " << fmt(a.second) << " at Gamma=" << fmt(a.first) << " -> N=13 " << fmt(b.second)
       << " at Gamma=" << fmt(b.first) << (grow ? " (grows)" : " (does not grow)") << ", peak within " << fmt(step)
       << " of Gamma=1: " << (located ? "yes" : "no");
  }
  return {pass, os.str()};
}

Outcome mirror() {
  const std::vector<std::tuple<int, double, double>> battery{
      {7, 0.4, 0.5}, {7, 0.5, 1.7}, {9, 0.4, 0.3},  {9, 0.4, 1.5}, {9, 0.6, 2.5},
      {9, 0.3, 0.8}, {11, 0.4, 0.7}, {11, 0.5, 1.3}, {13, 0.4, 2.0}, {13, 0.45, 0.6}};
  SweepSpec s = spec_for(ModelKind::TwoChannelKondo, 0.4, {9}, {1.0});
  double dev = 0.0;
  for (const auto& [n, jp, g] : battery) {
    const auto a = solve_point(ModelParams::with_total_size(ModelKind::TwoChannelKondo, n, jp, g), s);
    const auto b = solve_point(ModelParams::with_total_size(ModelKind::TwoChannelKondo, n, jp * g, 1.0 / g), s);
    dev = std::max({dev, std::abs(a.measures.e1 - b.measures.e1), std::abs(a.measures.e2 - b.measures.e2)});
    if (!a.converged || !b.converged) dev = std::nan("");
  }
  return {dev <= kMirrorTol, std::to_string(battery.size()) + " pairs, max |dE1|, |dE2| " + fmt(dev)};
}

Outcome dimer() {
  const double jp = 0.4;
  const auto p = ModelParams::with_total_size(ModelKind::TwoImpurityKondo, 12, jp, 50.0 * jp);
  MeasureOptions o;
  o.zero_floor = 1e-8;
  const auto m = tripartite_measures(ground(p), default_partition(p), o);
  const double bound = kDimerRatio * m.negativities.n_bc;
  return {m.e1 < bound, "N=12, K=" + fmt(50.0 * jp) + ": E1 " + fmt(m.e1) + ", N_BC " + fmt(m.negativities.n_bc) +
                            ", ratio " + fmt(m.e1 / m.negativities.n_bc) + " (needs < " + fmt(kDimerRatio) + ")"};
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(a + (b - a) * i / (n - 1));
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Outcome collapse_recovery() {
  const std::vector<int> sizes{16, 32, 64, 128};
  const auto grid = linspace(-3.0, 3.0, 25);
  std::ostringstream os;
  bool pass = true;
  for (double beta : {0.38, 1.0}) {
    SynthParams p;
    p.nu = 2.0;
    p.beta = beta;
    p.scaled_grid = true;
    const double exact_cost = collapse_cost(synth_generate(SynthKind::Collapse7, p, sizes, grid, 0.0, 1), 2.0, beta, p.g_c);
    std::vector<double> nus, betas;
    for (int seed = 1; seed <= kCollapseSeeds; ++seed) {
      const auto fit = optimize_collapse(synth_generate(SynthKind::Collapse7, p, sizes, grid, kNoise, seed), false, 16);
      nus.push_back(fit.nu);
      betas.push_back(fit.beta);
    }
    const double mn = median(nus), mb = median(betas);
    const bool ok = std::abs(mn - 2.0) <= kNuTol && std::abs(mb - beta) <= kBetaTol && exact_cost <= kExactCollapseCost;
    pass = pass && ok;
    os << (beta == 0.38 ? "" : "; ") << "beta=" << beta << ": median nu " << fmt(mn) << ", median beta " << fmt(mb)
       << ", noise-free cost " << fmt(exact_cost);
  }
  return {pass, os.str()};
}

Outcome ansatz_recovery() {
  const std::vector<int> sizes{16, 32, 64, 128};
  SynthParams p;  // (A, B, beta, lambda, g_c) = (0.5, 2, 0.38, 0.19, 0.3)
  const auto ds = synth_generate(SynthKind::Ansatz6, p, sizes, linspace(0.0, 0.6, 25), 0.0, 1);
  AnsatzOptions o;
  o.fit_gc = true;
  const auto f = fit_ansatz(ds, o);
  const double worst = std::max({std::abs(f.a_coeff / p.a - 1), std::abs(f.b_coeff / p.b - 1),
                                 std::abs(f.beta / p.beta - 1), std::abs(f.lambda / p.lambda - 1),
                                 std::abs(f.g_c / p.g_c - 1)});

  SynthParams q;
  q.scaled_grid = true;
  const auto sc = synth_generate(SynthKind::Ansatz6, q, sizes, linspace(-3.0, 3.0, 25), 0.0, 1);
  const auto collapse = optimize_collapse(sc, false, 16);
  const auto power = fit_power_law(critical_values(sc, q.g_c));
  const double identity = exponent_identity_residual(collapse.beta, collapse.nu, power.lambda);
  return {worst <= kAnsatzRelTol && std::abs(identity) <= kIdentityTol,
          "max relative parameter error " + fmt(worst) + ", identity residual " + fmt(identity) + " (nu " +
              fmt(collapse.nu) + ", beta " + fmt(collapse.beta) + ", lambda " + fmt(power.lambda) + ")"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "impent_acceptance_determinism";
  fs::remove_all(root);
  std::ostringstream sink;
  auto run = [&](const std::string& dir, const std::string& workers) {
    const std::string out = (root / dir).string();
    const char* argv[] = {"impent", "sweep", "--model", "2ikm", "--jprime", "0.4,0.5", "--sizes", "8,10",
                          "--grid", "0.02:1.5:8:log", "--seed", "7", "--workers", workers.c_str(), "--out", out.c_str()};
    return run_cli(16, argv, sink, sink);
  };
  const int a = run("a", "1"), b = run("b", "1"), c = run("c", "3");
  const std::string sa = slurp(root / "a/sweep.csv");
  const bool same = !sa.empty() && sa == slurp(root / "b/sweep.csv") && sa == slurp(root / "c/sweep.csv");
  fs::remove_all(root);
  return {a == 0 && b == 0 && c == 0 && same,
          std::string("three runs (1, 1 and 3 workers): CSV ") + (same ? "byte-identical" : "differs")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"canonical-states", canonical_states},   {"oracle-equivalence", oracle_equivalence},
      {"monogamy", monogamy},                   {"qualitative-divergence", divergence},
      {"2ckm-mirror-identity", mirror},         {"dimer-limit-contrast", dimer},
      {"collapse-exponent-recovery", collapse_recovery}, {"ansatz-recovery", ansatz_recovery},
      {"determinism", determinism}};
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << " [" << fmt(secs) << " s]" << std::endl;
    failures += !o.pass;
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
