#include "impent/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>
#include <thread>

#include "impent/errors.hpp"

namespace impent {

namespace {

class Fnv1a {
 public:
  template <typename T>
  void add(const T& value) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    for (unsigned char b : bytes) {
      hash_ ^= b;
      hash_ *= 0x100000001B3ULL;
    }
  }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 0xCBF29CE484222325ULL;
};

SweepRecord failed_record(const ModelParams& params, std::string message) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  SweepRecord r;
  r.model = params.kind;
  r.j_prime = params.j_prime;
  r.control = params.control;
  r.n_total = params.n_total();
  r.energy = nan;
  TripartiteMeasures& m = r.measures;
  m.e1 = m.e2 = m.pi_a = m.pi_b = m.pi_c = nan;
  m.negativities = {nan, nan, nan, nan, nan, nan};
  m.log_negativities = m.negativities;
  r.converged = false;
  r.diagnostics.error = std::move(message);
  return r;
}

}  // namespace

std::vector<double> make_grid(double min, double max, int count, GridSpacing spacing) {
  if (count < 1) throw ConfigError("grid count must be at least 1");
  if (!(max > min) && count > 1) throw ConfigError("grid max must exceed min");
  if (spacing == GridSpacing::Log && !(min > 0.0)) throw ConfigError("log grid needs min > 0");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  if (count == 1) {
    out.push_back(min);
    return out;
  }
  for (int i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / (count - 1);
    if (spacing == GridSpacing::Linear) {
      out.push_back(i == count - 1 ? max : min + (max - min) * t);
    } else {
      out.push_back(i == count - 1 ? max : min * std::pow(max / min, t));
    }
  }
  check_grid(out);
  return out;
}

void check_grid(std::span<const double> grid) {
  if (grid.empty()) throw ConfigError("grid: no control values");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i])) throw ConfigError("grid: non-finite control value");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw ConfigError("grid: values must be strictly increasing");
  }
}

void validate(const SweepSpec& spec) {
  check_grid(spec.grid);
  if (spec.sizes.empty()) throw ConfigError("model.sizes: size list is empty");
  for (int n : spec.sizes) {
    const bool even = n % 2 == 0;
    if (spec.model.kind == ModelKind::TwoImpurityKondo && !even) {
      throw ConfigError("model.sizes: 2ikm sizes must be even, got " + std::to_string(n));
    }
    if (spec.model.kind == ModelKind::TwoChannelKondo && even) {
      throw ConfigError("model.sizes: 2ckm sizes must be odd, got " + std::to_string(n));
    }
    for (double g : spec.grid) {
      ModelParams p = ModelParams::with_total_size(spec.model.kind, n, spec.model.j_prime, g,
                                                   spec.model.j2_ratio);
      try {
        validate(p);
      } catch (const Error& e) {
        throw ConfigError(std::string("model: ") + e.what());
      }
    }
  }
  if (spec.workers < 1) throw ConfigError("solver.workers must be at least 1");
  if (!(spec.solver.tol > 0.0)) throw ConfigError("solver.tol must be positive");
  if (spec.solver.max_iter < 1) throw ConfigError("solver.max_iter must be positive");
}

std::uint64_t point_seed(const ModelParams& params, int sz_twice, std::uint64_t user_seed) {
  Fnv1a h;
  h.add(static_cast<int>(params.kind));
  h.add(params.j1);
  h.add(params.j2_ratio);
  h.add(params.j_prime);
  h.add(params.control);
  h.add(params.n_left);
  h.add(params.n_right);
  h.add(sz_twice);
  h.add(user_seed);
  return h.value();
}

SweepRecord solve_point(const ModelParams& params, const SweepSpec& settings) {
  try {
    validate(params);
    const int sector = ground_sector(params.n_total());
    auto basis = sector_basis(params.n_total(), sector);
    const SparseOperator op = build_model(params, basis);
    LanczosOptions solver = settings.solver;
    solver.seed = point_seed(params, sector, settings.seed);
    const GroundStateResult gs = ground_state(op, solver);

    SweepRecord r;
    r.model = params.kind;
    r.j_prime = params.j_prime;
    r.control = params.control;
    r.n_total = params.n_total();
    r.energy = gs.energy;
    r.diagnostics = {gs.iterations, gs.restarts, gs.residual, gs.sector, {}};

    MeasureOptions mo;
    mo.pairwise = settings.pairwise;
    mo.cap = settings.rdm_cap;
    mo.zero_floor = settings.zero_floor;
    const StateVector state = StateVector::from_sector(*basis, gs.vector, op.layout());
    r.measures = tripartite_measures(state, default_partition(params), mo);
    r.converged = true;
    return r;
  } catch (const ConvergenceError& e) {
    std::ostringstream os;
    os << "convergence: " << e.what();
    SweepRecord r = failed_record(params, os.str());
    r.diagnostics.residual = e.best_residual();
    return r;
  } catch (const Error& e) {
    return failed_record(params, e.what());
  }
}

std::vector<SweepRecord> run_sweep(const SweepSpec& spec) {
  validate(spec);
  std::vector<int> sizes = spec.sizes;
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());

  std::vector<ModelParams> points;
  for (int n : sizes) {
    for (double g : spec.grid) {
      points.push_back(ModelParams::with_total_size(spec.model.kind, n, spec.model.j_prime, g,
                                                    spec.model.j2_ratio));
      points.back().j1 = spec.model.j1;
    }
  }

  std::vector<SweepRecord> records(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < points.size(); i = next.fetch_add(1)) {
      records[i] = solve_point(points[i], spec);
    }
  };
  const int width = std::max(1, std::min<int>(spec.workers, static_cast<int>(points.size())));
  if (width == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < width; ++t) pool.emplace_back(worker);
  }

  const bool any_ok = std::any_of(records.begin(), records.end(), [](const SweepRecord& r) { return r.converged; });
  if (!any_ok) {
    throw SweepError("every sweep point failed; first error: " +
                     (records.empty() ? std::string("no points") : records.front().diagnostics.error));
  }
  return records;
}

PeakEstimate locate_peak(std::span<const std::pair<double, double>> curve, bool refine) {
  if (curve.size() < 3) throw DomainError("locate_peak needs at least 3 points");
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (!(curve[i].first > curve[i - 1].first)) throw DomainError("locate_peak: g must be strictly increasing");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (curve[i].second > curve[best].second) best = i;  // strict: ties keep the smaller g
  }
  PeakEstimate p;
  p.g_peak = curve[best].first;
  p.e_peak = curve[best].second;
  if (!refine) return p;
  if (best == 0 || best + 1 == curve.size()) {
    p.boundary_warning = true;
    return p;
  }
  const auto [x0, y0] = curve[best - 1];
  const auto [x1, y1] = curve[best];
  const auto [x2, y2] = curve[best + 1];
  // Vertex of the interpolating parabola (Newton divided differences).
  const double d01 = (y1 - y0) / (x1 - x0);
  const double d12 = (y2 - y1) / (x2 - x1);
  const double a = (d12 - d01) / (x2 - x0);
  if (!(a < 0.0)) return p;  // flat or convex triple: keep the grid argmax
  const double b = d01 - a * (x0 + x1);
  const double c = y0 - x0 * (d01 - a * x1);
  const double xv = -b / (2.0 * a);
  p.g_peak = xv;
  p.e_peak = c + xv * (b + a * xv);
  p.method = PeakMethod::ParabolicRefined;
  return p;
}

KondoScaleFit fit_kondo_scale(std::span<const std::pair<double, double>> peaks) {
  if (peaks.size() < 2) throw DomainError("fit_kondo_scale needs at least 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [jp, kc] : peaks) {
    if (!(kc > 0.0)) throw DomainError("fit_kondo_scale: K_c must be positive");
    if (!(jp > 0.0)) throw DomainError("fit_kondo_scale: J' must be positive");
    const double x = 1.0 / jp;
    const double y = std::log(kc);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(peaks.size());
  const double mx = sx / n;
  const double my = sy / n;
  const double vxx = sxx / n - mx * mx;
  if (!(vxx > 1e-300)) throw DomainError("fit_kondo_scale needs at least 2 distinct J' values");
  const double slope = (sxy / n - mx * my) / vxx;
  const double intercept = my - slope * mx;
  KondoScaleFit fit;
  fit.alpha = -slope;
  fit.prefactor = std::exp(intercept);
  double ss = 0.0;
  for (const auto& [jp, kc] : peaks) {
    const double r = std::log(kc) - (intercept + slope / jp);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

std::vector<std::pair<double, double>> curve_for(std::span<const SweepRecord> records, int n_total,
                                                 double j_prime, const std::string& measure) {
  if (measure != "e1" && measure != "e2") throw DomainError("unknown measure '" + measure + "'");
  std::vector<std::pair<double, double>> out;
  for (const auto& r : records) {
    if (!r.converged || r.n_total != n_total || r.j_prime != j_prime) continue;
    const double e = measure == "e1" ? r.measures.e1 : r.measures.e2;
    if (std::isnan(e)) continue;
    out.emplace_back(r.control, e);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace impent
