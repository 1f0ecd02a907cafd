#include "impent/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "impent/errors.hpp"
#include "impent/nelder_mead.hpp"

namespace impent {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double measure_of(const SweepRecord& r, const std::string& measure) {
  if (measure == "e1") return r.measures.e1;
  if (measure == "e2") return r.measures.e2;
  throw DomainError("unknown measure '" + measure + "' (expected e1 or e2)");
}

// Piecewise-linear interpolation on (x sorted ascending); nullopt outside the range.
std::optional<double> interpolate(const std::vector<std::pair<double, double>>& pts, double x) {
  if (pts.empty()) return std::nullopt;
  // Round-off at the ends of the range must not decide whether a point overlaps.
  const double tol = 1e-12 * std::max(1.0, std::abs(x));
  if (x < pts.front().first - tol || x > pts.back().first + tol) return std::nullopt;
  x = std::clamp(x, pts.front().first, pts.back().first);
  auto it = std::lower_bound(pts.begin(), pts.end(), x,
                             [](const std::pair<double, double>& p, double v) { return p.first < v; });
  if (it->first == x) return it->second;
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double t = (x - lo.first) / (hi.first - lo.first);
  return lo.second + t * (hi.second - lo.second);
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Box-Muller on our own uniform stream, so datasets do not depend on the
// standard library's distribution implementation.
class Gaussian {
 public:
  explicit Gaussian(std::uint64_t seed) : state_(seed) {}
  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = static_cast<double>(splitmix64(state_) >> 11) * 0x1.0p-53;
    } while (u1 <= 0.0);
    const double u2 = static_cast<double>(splitmix64(state_) >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

void require_sizes(const ScalingDataset& ds, std::size_t min_sizes, std::size_t min_points, const char* what) {
  const auto sizes = ds.sizes();
  if (sizes.size() < min_sizes) {
    std::ostringstream os;
    os << what << " needs at least " << min_sizes << " distinct sizes, dataset has " << sizes.size();
    throw DatasetError(os.str());
  }
  for (int n : sizes) {
    if (ds.curve(n).size() < min_points) {
      std::ostringstream os;
      os << what << " needs at least " << min_points << " points per size; N=" << n << " has "
         << ds.curve(n).size();
      throw DatasetError(os.str());
    }
  }
}

double default_gc(const ScalingDataset& ds) {
  if (ds.g_c) return *ds.g_c;
  const auto sizes = ds.sizes();
  const auto curve = ds.curve(sizes.back());
  const auto it = std::max_element(curve.begin(), curve.end(),
                                   [](const auto& a, const auto& b) { return a.second < b.second; });
  return it->first;
}

}  // namespace

std::vector<int> ScalingDataset::sizes() const {
  std::set<int> s;
  for (const auto& r : rows) s.insert(r.n);
  return {s.begin(), s.end()};
}

std::vector<std::pair<double, double>> ScalingDataset::curve(int n) const {
  std::vector<std::pair<double, double>> out;
  for (const auto& r : rows) {
    if (r.n == n) out.emplace_back(r.g, r.e);
  }
  std::sort(out.begin(), out.end());
  return out;
}

ScalingDataset scaling_dataset(std::span<const SweepRecord> records, const std::string& measure, double j_prime) {
  ScalingDataset ds;
  ds.measure = measure;
  ds.j_prime = j_prime;
  bool first = true;
  for (const auto& r : records) {
    if (r.j_prime != j_prime) continue;
    const double e = measure_of(r, measure);
    if (first) {
      ds.model = r.model;
      first = false;
    }
    if (!r.converged || std::isnan(e)) continue;
    ds.rows.push_back({r.control, r.n_total, e});
  }
  return ds;
}

std::vector<double> j_prime_values(std::span<const SweepRecord> records) {
  std::set<double> s;
  for (const auto& r : records) s.insert(r.j_prime);
  return {s.begin(), s.end()};
}

std::vector<SweepRecord> to_records(const ScalingDataset& dataset) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<SweepRecord> out;
  for (const auto& row : dataset.rows) {
    SweepRecord r;
    r.model = dataset.model;
    r.j_prime = dataset.j_prime;
    r.control = row.g;
    r.n_total = row.n;
    r.energy = nan;
    auto& m = r.measures;
    m.e1 = m.e2 = m.pi_a = m.pi_b = m.pi_c = nan;
    m.negativities = {nan, nan, nan, nan, nan, nan};
    m.log_negativities = m.negativities;
    (dataset.measure == "e2" ? m.e2 : m.e1) = row.e;
    r.converged = true;
    out.push_back(r);
  }
  std::stable_sort(out.begin(), out.end(), [](const SweepRecord& a, const SweepRecord& b) {
    return a.n_total != b.n_total ? a.n_total < b.n_total : a.control < b.control;
  });
  return out;
}

PowerLawFit fit_power_law(std::span<const std::pair<double, double>> values) {
  if (values.size() < 3) throw DatasetError("power-law fit needs at least 3 sizes");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [n, e] : values) {
    if (!(e > 0.0)) throw DomainError("power-law fit: E must be positive");
    if (!(n > 0.0)) throw DomainError("power-law fit: N must be positive");
    const double x = std::log(n);
    const double y = std::log(e);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double k = static_cast<double>(values.size());
  const double mx = sx / k;
  const double my = sy / k;
  const double vxx = sxx / k - mx * mx;
  if (!(vxx > 0.0)) throw DatasetError("power-law fit needs distinct sizes");
  PowerLawFit fit;
  fit.lambda = (sxy / k - mx * my) / vxx;
  const double intercept = my - fit.lambda * mx;
  fit.amplitude = std::exp(intercept);
  double ss = 0.0;
  for (const auto& [n, e] : values) {
    const double r = std::log(e) - (intercept + fit.lambda * std::log(n));
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / k);
  return fit;
}

std::vector<std::pair<double, double>> critical_values(const ScalingDataset& dataset, std::optional<double> g_c) {
  std::vector<std::pair<double, double>> out;
  for (int n : dataset.sizes()) {
    const auto curve = dataset.curve(n);
    if (curve.size() == 1) {
      out.emplace_back(n, curve.front().second);
      continue;
    }
    if (g_c) {
      const auto v = interpolate(curve, *g_c);
      if (!v) {
        std::ostringstream os;
        os << "g_c=" << *g_c << " lies outside the control range of N=" << n;
        throw DatasetError(os.str());
      }
      out.emplace_back(n, *v);
    } else {
      if (curve.size() < 3) throw DatasetError("peak location needs at least 3 points for N=" + std::to_string(n));
      out.emplace_back(n, locate_peak(curve, true).e_peak);
    }
  }
  return out;
}

std::vector<CollapsePoint> rescale(const ScalingDataset& dataset, double nu, double beta, double g_c) {
  std::vector<CollapsePoint> out;
  out.reserve(dataset.rows.size());
  for (const auto& r : dataset.rows) {
    const double n = static_cast<double>(r.n);
    out.push_back({r.n, std::pow(n, 1.0 / nu) * std::abs(r.g - g_c), std::pow(n, -beta / nu) * r.e});
  }
  return out;
}

double collapse_cost(const ScalingDataset& dataset, double nu, double beta, double g_c) {
  const auto sizes = dataset.sizes();
  if (sizes.size() < 2) throw DatasetError("collapse needs at least 2 distinct sizes");
  if (!(nu > 0.0)) throw DomainError("collapse_cost: nu must be positive");

  std::vector<std::vector<std::pair<double, double>>> curves(sizes.size());
  double mean = 0.0;
  std::size_t count = 0;
  for (const auto& p : rescale(dataset, nu, beta, g_c)) {
    const auto k = static_cast<std::size_t>(std::lower_bound(sizes.begin(), sizes.end(), p.n) - sizes.begin());
    curves[k].emplace_back(p.x, p.y);
    mean += p.y;
    ++count;
  }
  mean /= static_cast<double>(count);
  double var = 0.0;
  for (const auto& c : curves) {
    for (const auto& [x, y] : c) var += (y - mean) * (y - mean);
  }
  var /= static_cast<double>(count);
  // Interpolants merge coincident x (e.g. mirror points of a symmetric grid) into their mean y,
  // so the result does not depend on which branch a duplicate came from.
  std::vector<std::vector<std::pair<double, double>>> interp(curves.size());
  for (std::size_t k = 0; k < curves.size(); ++k) {
    auto& c = curves[k];
    std::sort(c.begin(), c.end());
    std::size_t i = 0;
    while (i < c.size()) {
      std::size_t j = i;
      double sum = 0.0;
      while (j < c.size() && c[j].first - c[i].first <= 1e-12 * std::max(1.0, std::abs(c[i].first))) sum += c[j++].second;
      interp[k].emplace_back(c[i].first, sum / static_cast<double>(j - i));
      i = j;
    }
  }

  double ss = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    for (std::size_t j = 0; j < curves.size(); ++j) {
      if (i == j) continue;
      for (const auto& [x, y] : curves[i]) {
        if (const auto yi = interpolate(interp[j], x)) {
          ss += (y - *yi) * (y - *yi);
          ++pairs;
        }
      }
    }
  }
  if (pairs == 0) return kInf;
  const double msd = ss / static_cast<double>(pairs);
  if (!(var > 0.0)) return msd == 0.0 ? 0.0 : kInf;
  return msd / var;
}

CollapseFit optimize_collapse(const ScalingDataset& dataset, bool fit_gc, int restarts) {
  CollapseOptions o;
  o.fit_gc = fit_gc;
  o.restarts = restarts;
  return optimize_collapse(dataset, o);
}

CollapseFit optimize_collapse(const ScalingDataset& dataset, const CollapseOptions& options) {
  require_sizes(dataset, 2, 4, "collapse fit");
  if (!options.fit_gc && !dataset.g_c) {
    throw DatasetError("collapse fit with pinned g_c needs dataset.g_c");
  }
  const double gc0 = default_gc(dataset);
  double g_lo = kInf, g_hi = -kInf;
  for (const auto& r : dataset.rows) {
    g_lo = std::min(g_lo, r.g);
    g_hi = std::max(g_hi, r.g);
  }
  const double g_step = std::max((g_hi - g_lo) / 20.0, 1e-6);

  auto objective = [&](std::span<const double> x) {
    const double nu = x[0];
    const double beta = x[1];
    const double gc = options.fit_gc ? x[2] : gc0;
    if (!(nu > 0.05) || !(nu < 50.0) || !std::isfinite(beta)) return kInf;
    return collapse_cost(dataset, nu, beta, gc);
  };

  const int starts = std::max(options.restarts, 1);
  const int k_nu = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(starts))));
  const int k_beta = (starts + k_nu - 1) / k_nu;
  const double d_nu = (options.nu_max - options.nu_min) / k_nu;
  const double d_beta = (options.beta_max - options.beta_min) / k_beta;

  SimplexOptions so;
  so.max_evals = options.max_evals;
  CollapseFit best;
  best.quality = kInf;
  for (int s = 0; s < starts; ++s) {
    const int i = s % k_nu;
    const int j = s / k_nu;
    std::vector<double> x0{options.nu_min + (i + 0.5) * d_nu, options.beta_min + (j + 0.5) * d_beta};
    std::vector<double> step{0.25 * d_nu, 0.25 * d_beta};
    if (options.fit_gc) {
      x0.push_back(gc0);
      step.push_back(g_step);
    }
    OptimizerRun run;
    run.start = x0;
    if (!std::isfinite(objective(x0))) {
      run.end = x0;
      run.cost = kInf;
      best.trace.push_back(run);
      continue;
    }
    const SimplexResult r = nelder_mead(objective, x0, step, so);
    run.end = r.x;
    run.cost = r.value;
    run.evals = r.evals;
    best.trace.push_back(run);
    if (r.value < best.quality) {
      best.quality = r.value;
      best.nu = r.x[0];
      best.beta = r.x[1];
      best.g_c = options.fit_gc ? r.x[2] : gc0;
    }
  }
  if (!std::isfinite(best.quality)) {
    throw OptimizationError("collapse optimization: every restart diverged", best.quality);
  }
  return best;
}

namespace {

struct InnerSolve {
  double c1 = 0.0;  // 1/A
  double c2 = 0.0;  // B/A
  double rms = kInf;
};

// min sum (E_i (c1 u_i + c2 v_i) - 1)^2 with u = |g-g_c|^beta, v = N^-lambda.
InnerSolve solve_linear(const ScalingDataset& ds, double beta, double lambda, double gc) {
  double s11 = 0, s12 = 0, s22 = 0, t1 = 0, t2 = 0;
  const auto n = ds.rows.size();
  std::vector<double> p(n), q(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = ds.rows[i];
    p[i] = r.e * std::pow(std::abs(r.g - gc), beta);
    q[i] = r.e * std::pow(static_cast<double>(r.n), -lambda);
    s11 += p[i] * p[i];
    s12 += p[i] * q[i];
    s22 += q[i] * q[i];
    t1 += p[i];
    t2 += q[i];
  }
  InnerSolve out;
  const double det = s11 * s22 - s12 * s12;
  if (!(std::abs(det) > 1e-300)) return out;
  out.c1 = (t1 * s22 - t2 * s12) / det;
  out.c2 = (s11 * t2 - s12 * t1) / det;
  if (!(out.c1 > 0.0) || !(out.c2 > 0.0)) return out;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = out.c1 * p[i] + out.c2 * q[i] - 1.0;
    ss += r * r;
  }
  out.rms = std::sqrt(ss / static_cast<double>(n));
  return out;
}

}  // namespace

AnsatzFit fit_ansatz(const ScalingDataset& dataset, const AnsatzOptions& options) {
  require_sizes(dataset, 2, 2, "ansatz fit");
  for (const auto& r : dataset.rows) {
    if (!(r.e > 0.0)) throw DomainError("ansatz fit: E must be positive");
  }
  const bool fit_gc = options.fit_gc.value_or(!dataset.g_c.has_value());
  const double gc0 = default_gc(dataset);
  double g_lo = kInf, g_hi = -kInf;
  for (const auto& r : dataset.rows) {
    g_lo = std::min(g_lo, r.g);
    g_hi = std::max(g_hi, r.g);
  }
  const double g_step = std::max((g_hi - g_lo) / 20.0, 1e-6);

  auto objective = [&](std::span<const double> x) {
    const double beta = x[0];
    const double lambda = x[1];
    const double gc = fit_gc ? x[2] : gc0;
    if (!(beta > 1e-3) || !(beta < 10.0) || !(lambda > -5.0) || !(lambda < 10.0)) return kInf;
    return solve_linear(dataset, beta, lambda, gc).rms;
  };

  std::vector<double> beta_starts{0.3, 0.7, 1.2};
  std::vector<double> lambda_starts{0.1, 0.3, 0.6};
  if (options.beta_start) beta_starts.insert(beta_starts.begin(), *options.beta_start);
  if (options.lambda_start) lambda_starts.insert(lambda_starts.begin(), *options.lambda_start);

  SimplexOptions so;
  so.max_evals = options.max_evals;
  so.ftol = 1e-15;
  so.xtol = 1e-12;
  double best_value = kInf;
  std::vector<double> best_x;
  for (double b0 : beta_starts) {
    for (double l0 : lambda_starts) {
      std::vector<double> x0{b0, l0};
      std::vector<double> step{0.1, 0.05};
      if (fit_gc) {
        x0.push_back(gc0);
        step.push_back(g_step);
      }
      if (!std::isfinite(objective(x0))) continue;
      // Restart once from the result: simplex searches can stall on narrow valleys.
      SimplexResult r = nelder_mead(objective, x0, step, so);
      r = nelder_mead(objective, r.x, step, so);
      if (r.value < best_value) {
        best_value = r.value;
        best_x = r.x;
      }
    }
  }
  if (!std::isfinite(best_value)) {
    throw OptimizationError("ansatz fit found no parameters with A > 0 and B > 0", best_value);
  }
  AnsatzFit fit;
  fit.beta = best_x[0];
  fit.lambda = best_x[1];
  fit.g_c = fit_gc ? best_x[2] : gc0;
  const InnerSolve s = solve_linear(dataset, fit.beta, fit.lambda, fit.g_c);
  fit.a_coeff = 1.0 / s.c1;
  fit.b_coeff = s.c2 / s.c1;
  fit.residual = s.rms;
  const bool below = std::any_of(dataset.rows.begin(), dataset.rows.end(), [&](const auto& r) { return r.g < fit.g_c; });
  const bool above = std::any_of(dataset.rows.begin(), dataset.rows.end(), [&](const auto& r) { return r.g > fit.g_c; });
  fit.ill_conditioned = !(below && above) || (fit_gc && (fit.g_c <= g_lo || fit.g_c >= g_hi));
  return fit;
}

double ansatz_value(const AnsatzFit& fit, double g, double n) {
  return fit.a_coeff / (std::pow(std::abs(g - fit.g_c), fit.beta) + fit.b_coeff * std::pow(n, -fit.lambda));
}

double exponent_identity_residual(double beta, double nu, double lambda) { return beta - nu * lambda; }

ScalingDataset synth_generate(SynthKind kind, const SynthParams& params, std::span<const int> sizes,
                              std::span<const double> grid, double noise, std::uint64_t seed,
                              const std::string& measure) {
  if (!(noise >= 0.0)) throw DomainError("synth: noise must be non-negative");
  if (!(params.nu > 0.0)) throw DomainError("synth: nu must be positive");
  ScalingDataset ds;
  ds.measure = measure;
  ds.g_c = params.g_c;
  Gaussian gauss(seed);
  auto f = [&](double x) {
    return params.f == ScalingFunction::Lorentzian ? 1.0 / (1.0 + x * x) : std::exp(-x);
  };
  const double nu_eff = kind == SynthKind::Ansatz6 ? params.beta / params.lambda : params.nu;
  for (int n_int : sizes) {
    const double n = static_cast<double>(n_int);
    for (double v : grid) {
      const double g = params.scaled_grid ? params.g_c + v * std::pow(n, -1.0 / nu_eff) : v;
      double e = 0.0;
      if (kind == SynthKind::Ansatz6) {
        e = params.a / (std::pow(std::abs(g - params.g_c), params.beta) + params.b * std::pow(n, -params.lambda));
      } else {
        e = std::pow(n, params.beta / params.nu) * f(std::pow(n, 1.0 / params.nu) * std::abs(g - params.g_c));
      }
      if (noise > 0.0) e *= 1.0 + noise * gauss();
      ds.rows.push_back({g, n_int, e});
    }
  }
  return ds;
}

}  // namespace impent
