#include "impent/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "impent/dataset.hpp"
#include "impent/eigensolve.hpp"
#include "impent/entanglement.hpp"
#include "impent/errors.hpp"

namespace impent {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kOracleTolerance = 1e-9;

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DatasetError("cannot open " + path.string() + " for writing");
  out << doc.dump(2) << '\n';
}

fs::path prepare_out(const RunConfig& config) {
  const fs::path dir(config.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("io.out: cannot create " + dir.string() + " (" + ec.message() + ")");
  return dir;
}

json conventions(const RunConfig& c) {
  const bool ikm = c.kind == ModelKind::TwoImpurityKondo;
  return {
      {"spin_operators", "Pauli sigma; a sigma.sigma bond has eigenvalue 1 on triplets and -3 on the singlet"},
      {"energy_unit", "J1 = 1"},
      {"control", ikm ? "K (inter-impurity coupling J1*K)" : "Gamma (right-channel coupling J'*Gamma)"},
      {"sector", "Sz = 0 for even N, Sz = +1/2 for odd N"},
      {"partition", ikm ? "A = {0_L, 0_R}, B = left bulk, C = right bulk" : "A = {0}, B = left bulk, C = right bulk"},
      {"negativity", "sum of |eigenvalues| of the partial transpose minus 1 (a Bell pair gives 1)"},
      {"log_negativity", "ln(2N + 1)"},
      {"e1", "cube root of N_A|BC * N_B|AC * N_C|AB"},
      {"e2", "mean of pi_A, pi_B, pi_C; pi_A = N_A|BC^2 - N_AB^2 - N_AC^2"},
      {"pi_averaging", "raw values, no clamping at 0 before averaging"},
      {"zero_floor", c.zero_floor},
      {"zero_floor_rule", "negativities below zero_floor are reported as exactly 0"},
      {"gc_policy", c.gc_policy.str()},
  };
}

json metadata(const RunConfig& c, const std::string& command) {
  return {{"tool", "impent"},   {"version", IMPENT_VERSION},     {"command", command},
          {"seed", c.seed},     {"config", to_json(c)},          {"conventions", conventions(c)}};
}

json nullable(std::optional<double> v) { return v && std::isfinite(*v) ? json(*v) : json(nullptr); }

std::optional<double> field(const json& j, const char* key) {
  if (j.is_object() && j.contains(key) && j[key].is_number()) return j[key].get<double>();
  return std::nullopt;
}

}  // namespace

double resolve_gc(const ScalingDataset& dataset, const GcPolicy& policy) {
  if (policy.kind == GcPolicyKind::Fixed) return policy.value;
  const auto sizes = dataset.sizes();
  if (sizes.empty()) throw DatasetError("g_c: dataset has no rows");
  const auto curve = dataset.curve(sizes.back());
  if (curve.size() >= 3) return locate_peak(curve, true).g_peak;
  return std::max_element(curve.begin(), curve.end(), [](const auto& a, const auto& b) { return a.second < b.second; })
      ->first;
}

int cmd_sweep(const RunConfig& config, std::ostream& log) {
  validate(config);
  std::vector<SweepSpec> specs;
  std::set<std::string> warnings;
  for (double jp : config.j_primes) {
    specs.push_back(sweep_spec(config, jp));
    validate(specs.back());
    for (const auto& w : validate(ModelParams::with_total_size(config.kind, specs.back().sizes.front(), jp,
                                                                specs.back().grid.front(), config.j2_ratio))) {
      warnings.insert(w);
    }
  }
  for (const auto& w : warnings) log << "warning: " << w << '\n';
  const fs::path dir = prepare_out(config);

  std::vector<SweepRecord> records;
  for (const auto& spec : specs) {
    log << to_string(config.kind) << " J'=" << spec.model.j_prime << ": " << spec.sizes.size() * spec.grid.size()
        << " points\n";
    auto part = run_sweep(spec);
    records.insert(records.end(), part.begin(), part.end());
  }

  int failed = 0;
  int violations = 0;
  json failures = json::array();
  for (const auto& r : records) {
    if (!r.converged) {
      ++failed;
      failures.push_back({{"j_prime", r.j_prime}, {"control", r.control}, {"n_total", r.n_total},
                          {"error", r.diagnostics.error}});
      continue;
    }
    if (config.pairwise && !satisfies_monogamy(r.measures)) ++violations;
  }
  write_dataset(records, dir / "sweep.csv");
  json meta = metadata(config, "sweep");
  meta["outputs"] = {{"dataset", "sweep.csv"}};
  meta["summary"] = {{"points", records.size()},
                     {"converged", static_cast<int>(records.size()) - failed},
                     {"failed", failed},
                     {"monogamy_violations", config.pairwise ? json(violations) : json(nullptr)},
                     {"monogamy_tolerance", kMonogamyTolerance},
                     {"failures", failures},
                     {"warnings", std::vector<std::string>(warnings.begin(), warnings.end())}};
  write_json(dir / "sweep.meta.json", meta);
  log << "wrote " << (dir / "sweep.csv").string() << " (" << records.size() << " rows, " << failed << " failed";
  if (config.pairwise) log << ", " << violations << " monogamy violations";
  log << ")\n";
  return failed > 0 ? kExitPartial : kExitOk;
}

json fit_report(const RunConfig& config, const std::string& mode, const ScalingDataset& dataset,
                const json& previous) {
  json report = {{"measure", dataset.measure},
                 {"model", std::string(to_string(dataset.model))},
                 {"mode", mode},
                 {"j_prime", dataset.j_prime},
                 {"nu", nullptr},
                 {"beta", nullptr},
                 {"lambda", nullptr},
                 {"g_c", nullptr},
                 {"quality", nullptr},
                 {"residuals", json::object()},
                 {"identity_residual", nullptr}};
  json settings = {{"gc_policy", config.gc_policy.str()}, {"sizes", dataset.sizes()}, {"rows", dataset.rows.size()}};
  const bool fit_gc = config.gc_policy.kind == GcPolicyKind::Fit;

  auto power = [&]() {
    const std::optional<double> gc = fit_gc ? std::nullopt : std::optional<double>(resolve_gc(dataset, config.gc_policy));
    const auto values = critical_values(dataset, gc);
    const PowerLawFit fit = fit_power_law(values);
    json r = {{"lambda", fit.lambda}, {"amplitude", fit.amplitude}, {"residual", fit.residual}, {"g_c", nullable(gc)}};
    json pts = json::array();
    for (const auto& [n, e] : values) pts.push_back({n, e});
    r["critical_values"] = pts;
    return r;
  };
  auto collapse = [&]() {
    ScalingDataset ds = dataset;
    ds.g_c = resolve_gc(dataset, config.gc_policy);
    CollapseOptions o;
    o.fit_gc = fit_gc;
    o.restarts = config.restarts;
    const CollapseFit fit = optimize_collapse(ds, o);
    json trace = json::array();
    for (const auto& t : fit.trace) {
      trace.push_back({{"start", t.start}, {"end", t.end}, {"cost", nullable(t.cost)}, {"evals", t.evals}});
    }
    return json{{"nu", fit.nu}, {"beta", fit.beta}, {"g_c", fit.g_c}, {"quality", fit.quality}, {"trace", trace}};
  };

  if (mode == "power") {
    const json r = power();
    report["lambda"] = r["lambda"];
    report["g_c"] = r["g_c"];
    report["quality"] = r["residual"];
    report["residuals"] = {{"rms_log", r["residual"]}};
    report["coefficients"] = {{"amplitude", r["amplitude"]}};
    report["critical_values"] = r["critical_values"];
  } else if (mode == "collapse") {
    const json r = collapse();
    report["nu"] = r["nu"];
    report["beta"] = r["beta"];
    report["g_c"] = r["g_c"];
    report["quality"] = r["quality"];
    report["residuals"] = {{"collapse_cost", r["quality"]}};
    settings["restarts"] = config.restarts;
    settings["collapse_threshold"] = config.collapse_threshold;
    settings["fit_gc"] = fit_gc;
    report["quality_ok"] = r["quality"].get<double>() <= config.collapse_threshold;
    report["trace"] = r["trace"];
  } else if (mode == "ansatz") {
    ScalingDataset ds = dataset;
    ds.g_c = resolve_gc(dataset, config.gc_policy);
    AnsatzOptions o;
    o.fit_gc = fit_gc;
    if (previous.contains("collapse")) o.beta_start = field(previous["collapse"], "beta");
    if (previous.contains("power")) o.lambda_start = field(previous["power"], "lambda");
    const AnsatzFit fit = fit_ansatz(ds, o);
    report["beta"] = fit.beta;
    report["lambda"] = fit.lambda;
    report["g_c"] = fit.g_c;
    report["quality"] = fit.residual;
    report["residuals"] = {{"rms_relative", fit.residual}};
    report["coefficients"] = {{"a", fit.a_coeff}, {"b", fit.b_coeff}};
    report["ill_conditioned"] = fit.ill_conditioned;
    settings["fit_gc"] = fit_gc;
  } else if (mode == "identity") {
    const json c = previous.contains("collapse") ? previous["collapse"] : collapse();
    const json p = previous.contains("power") ? previous["power"] : power();
    const double nu = c["nu"].get<double>();
    const double beta = c["beta"].get<double>();
    const double lambda = p["lambda"].get<double>();
    const double res = exponent_identity_residual(beta, nu, lambda);
    report["nu"] = nu;
    report["beta"] = beta;
    report["lambda"] = lambda;
    report["g_c"] = c["g_c"];
    report["identity_residual"] = res;
    report["quality"] = std::abs(res);
    report["residuals"] = {{"identity", res}};
  } else {
    throw ConfigError("fit: unknown mode '" + mode + "'");
  }
  report["settings"] = settings;
  return report;
}

namespace {

void write_collapse_table(const fs::path& path, const ScalingDataset& ds, const json& report) {
  const auto pts = rescale(ds, report["nu"].get<double>(), report["beta"].get<double>(), report["g_c"].get<double>());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DatasetError("cannot open " + path.string() + " for writing");
  out << "n,x,y\n";
  for (const auto& p : pts) out << p.n << ',' << format_real(p.x) << ',' << format_real(p.y) << '\n';
}

int identity_from_reports(const RunConfig& config, const std::vector<std::string>& reports, std::ostream& log) {
  std::optional<double> nu, beta, lambda;
  std::string measure = config.measures.front();
  std::string model = std::string(to_string(config.kind));
  for (const auto& path : reports) {
    std::ifstream in(path);
    if (!in) throw DatasetError("cannot open " + path);
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ParseError(path + ": not valid JSON (" + e.what() + ")");
    }
    if (auto v = field(doc, "nu")) nu = v;
    if (auto v = field(doc, "beta")) beta = v;
    if (auto v = field(doc, "lambda")) lambda = v;
    if (doc.contains("measure") && doc["measure"].is_string()) measure = doc["measure"].get<std::string>();
    if (doc.contains("model") && doc["model"].is_string()) model = doc["model"].get<std::string>();
  }
  std::string missing;
  if (!beta) missing += " beta";
  if (!nu) missing += " nu";
  if (!lambda) missing += " lambda";
  if (!missing.empty()) throw DatasetError("identity mode: input reports lack" + missing);
  const double res = exponent_identity_residual(*beta, *nu, *lambda);
  json report = {{"measure", measure},
                 {"model", model},
                 {"mode", "identity"},
                 {"nu", *nu},
                 {"beta", *beta},
                 {"lambda", *lambda},
                 {"g_c", nullptr},
                 {"quality", std::abs(res)},
                 {"residuals", {{"identity", res}}},
                 {"identity_residual", res},
                 {"settings", {{"inputs", reports}}}};
  const fs::path dir = prepare_out(config);
  const fs::path file = dir / ("fit_identity_" + measure + ".json");
  write_json(file, report);
  log << "identity " << measure << ": beta - nu*lambda = " << format_real(res) << " -> " << file.string() << '\n';
  return kExitOk;
}

}  // namespace

int cmd_fit(const RunConfig& config, const FitRequest& request, std::ostream& log) {
  validate(config);
  const std::vector<std::string> modes = request.modes.empty() ? config.fit_modes : request.modes;
  if (modes.empty()) throw ConfigError("analysis.fit_modes: no fit mode selected");
  for (const auto& m : modes) {
    if (m != "power" && m != "collapse" && m != "ansatz" && m != "identity") {
      throw ConfigError("--mode: expected power, collapse, ansatz or identity, got '" + m + "'");
    }
  }
  const std::vector<std::string> inputs = request.inputs.empty() ? config.datasets : request.inputs;
  if (inputs.empty()) throw ConfigError("io.datasets: no input given (use --input)");

  std::vector<std::string> csvs, reports;
  for (const auto& p : inputs) (fs::path(p).extension() == ".json" ? reports : csvs).push_back(p);
  if (!reports.empty()) {
    if (modes.size() != 1 || modes.front() != "identity" || !csvs.empty()) {
      throw ConfigError("--input: JSON fit reports are only accepted by identity mode alone");
    }
    return identity_from_reports(config, reports, log);
  }

  std::vector<SweepRecord> records;
  for (const auto& p : csvs) {
    auto part = read_dataset(fs::path(p));
    records.insert(records.end(), part.begin(), part.end());
  }
  const auto jps = j_prime_values(records);
  if (jps.empty()) throw DatasetError("fit: input datasets contain no rows");
  double jp = jps.front();
  if (request.j_prime) {
    if (std::find(jps.begin(), jps.end(), *request.j_prime) == jps.end()) {
      std::ostringstream os;
      os << "--jprime: no rows with J'=" << *request.j_prime << " in the input";
      throw DatasetError(os.str());
    }
    jp = *request.j_prime;
  } else if (jps.size() > 1) {
    throw ConfigError("--jprime: input holds several J' values; choose one");
  }

  const fs::path dir = prepare_out(config);
  int fitted = 0;
  for (const auto& measure : config.measures) {
    ScalingDataset ds = scaling_dataset(records, measure, jp);
    if (ds.rows.empty()) {
      log << "skipping " << measure << ": no finite values\n";
      continue;
    }
    json previous = json::object();
    for (const auto& mode : modes) {
      json report = fit_report(config, mode, ds, previous);
      report["settings"]["inputs"] = csvs;
      previous[mode] = report;
      const fs::path file = dir / ("fit_" + mode + "_" + measure + ".json");
      write_json(file, report);
      log << mode << ' ' << measure << ":";
      for (const char* k : {"nu", "beta", "lambda", "g_c", "quality"}) {
        if (report[k].is_number()) log << ' ' << k << '=' << format_real(report[k].get<double>());
      }
      log << " -> " << file.string() << '\n';
      if (mode == "collapse") write_collapse_table(dir / ("collapse_" + measure + ".csv"), ds, report);
    }
    ++fitted;
  }
  if (fitted == 0) throw DatasetError("fit: no requested measure has finite values in the input");
  return kExitOk;
}

int cmd_oracle_check(const RunConfig& config, bool inject_fault, std::ostream& log) {
  validate(config);
  const auto grid = config.grid.points();
  std::vector<double> controls{grid.front(), grid[grid.size() / 2], grid.back()};
  controls.erase(std::unique(controls.begin(), controls.end()), controls.end());

  for (int n : config.sizes) {
    const SectorBasis basis(n, ground_sector(n));
    if (basis.size() > config.dense_cap) {
      std::ostringstream os;
      os << "oracle-check: N=" << n << " sector dimension " << basis.size() << " exceeds solver.dense_cap "
         << config.dense_cap;
      throw ScopeError(os.str());
    }
    if ((std::size_t{1} << n) > config.rdm_cap) {
      std::ostringstream os;
      os << "oracle-check: N=" << n << " full density matrix (dim 2^" << n << ") exceeds solver.rdm_cap "
         << config.rdm_cap;
      throw ScopeError(os.str());
    }
  }

  struct Check {
    std::string name;
    double tolerance;
    int points = 0;
    double max_dev = 0.0;
    bool ok = true;
    std::string first_failure;

    void record(double dev, const std::string& where) {
      ++points;
      if (!(dev <= tolerance)) {
        if (ok) first_failure = where;
        ok = false;
      }
      max_dev = std::isnan(dev) || std::isnan(max_dev) ? std::nan("") : std::max(max_dev, dev);
    }
  };
  Check herm{"hermiticity", 0.0};
  Check energy{"dense-vs-lanczos", kOracleTolerance};
  Check route{"schmidt-vs-ppt", kOracleTolerance};

  for (double jp : config.j_primes) {
    for (int n : config.sizes) {
      for (double g : controls) {
        const ModelParams params = ModelParams::with_total_size(config.kind, n, jp, g, config.j2_ratio);
        validate(params);
        std::ostringstream where;
        where << to_string(config.kind) << " N=" << n << " J'=" << jp << " g=" << g;
        auto basis = sector_basis(n, ground_sector(n));
        SparseOperator op = build_model(params, basis);
        if (inject_fault) op = op.with_corrupted_entry(1.5);
        herm.record(op.is_symmetric() ? 0.0 : 1.0, where.str());

        const DenseSpectrum dense = dense_spectrum_oracle(op, config.dense_cap);
        LanczosOptions lo;
        lo.tol = config.tol;
        lo.max_iter = config.max_iter;
        lo.krylov_max = config.krylov_max;
        lo.seed = point_seed(params, basis->sz_twice(), config.seed);
        GroundStateResult gs;
        try {
          gs = ground_state(op, lo);
        } catch (const ConvergenceError& e) {
          energy.record(std::nan(""), where.str() + " (" + e.what() + ")");
          continue;
        }
        energy.record(std::abs(gs.energy - dense.eigenvalues.front()), where.str());

        const StateVector state = StateVector::from_sector(*basis, gs.vector, op.layout());
        const DensityMatrix rho = pure_density_matrix(state, config.rdm_cap);
        const TripartitePartition part = default_partition(params);
        double dev = 0.0;
        for (const SiteSet* block : {&part.block_a, &part.block_b, &part.block_c}) {
          const double a = schmidt_negativity(state, *block, config.rdm_cap);
          const double b = ppt_negativity(rho, *block);
          dev = std::max(dev, std::abs(a - b));
        }
        route.record(dev, where.str());
      }
    }
  }

  json checks = json::array();
  bool all_ok = true;
  for (const Check* c : {&herm, &energy, &route}) {
    all_ok = all_ok && c->ok;
    log << (c->ok ? "PASS " : "FAIL ") << c->name << ": " << c->points << " points, max deviation "
        << format_real(c->max_dev) << " (tolerance " << format_real(c->tolerance) << ")";
    if (!c->ok) log << ", first failure at " << c->first_failure;
    log << '\n';
    checks.push_back({{"name", c->name},
                      {"points", c->points},
                      {"max_deviation", nullable(c->max_dev)},
                      {"tolerance", c->tolerance},
                      {"passed", c->ok},
                      {"first_failure", c->ok ? json(nullptr) : json(c->first_failure)}});
  }
  const fs::path dir = prepare_out(config);
  json report = metadata(config, "oracle-check");
  report["fault_injected"] = inject_fault;
  report["checks"] = checks;
  report["passed"] = all_ok;
  write_json(dir / "oracle_check.json", report);
  return all_ok ? kExitOk : kExitNumerical;
}

int cmd_synth(const RunConfig& config, const SynthRequest& request, std::ostream& log) {
  validate(config);
  const auto grid = config.grid.points();
  ScalingDataset ds = synth_generate(request.kind, request.params, config.sizes, grid, request.noise, config.seed,
                                     config.measures.front());
  ds.model = config.kind;
  ds.j_prime = config.j_primes.front();
  const fs::path dir = prepare_out(config);
  write_dataset(to_records(ds), dir / "synth.csv");
  const auto& p = request.params;
  json meta = metadata(config, "synth");
  meta["synth"] = {{"kind", request.kind == SynthKind::Ansatz6 ? "ansatz6" : "collapse7"},
                   {"a", p.a},
                   {"b", p.b},
                   {"beta", p.beta},
                   {"lambda", p.lambda},
                   {"nu", p.nu},
                   {"g_c", p.g_c},
                   {"scaling_function", p.f == ScalingFunction::Lorentzian ? "lorentzian" : "exponential"},
                   {"scaled_grid", p.scaled_grid},
                   {"noise", request.noise}};
  meta["outputs"] = {{"dataset", "synth.csv"}};
  write_json(dir / "synth.meta.json", meta);
  log << "wrote " << (dir / "synth.csv").string() << " (" << ds.rows.size() << " rows)\n";
  return kExitOk;
}

namespace {

struct CommonFlags {
  std::string config, model, jprime, sizes, grid, measure, out, gc_policy;
  std::uint64_t seed = 0;
  int workers = 0;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config, "JSON config file (or a run's .meta.json)");
  app->add_option("--model", f.model, "2ikm or 2ckm");
  app->add_option("--jprime", f.jprime, "J' value or comma-separated list");
  app->add_option("--sizes", f.sizes, "comma-separated total sizes N");
  app->add_option("--grid", f.grid, "control grid min:max:count[:log|:linear]");
  app->add_option("--measure", f.measure, "e1 or e2");
  app->add_option("--out", f.out, "output directory");
  app->add_option("--seed", f.seed, "seed");
  app->add_option("--workers", f.workers, "worker threads");
  app->add_option("--gc-policy", f.gc_policy, "peak, fixed=VALUE or fit");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

double flag_real(const std::string& text, const std::string& flag) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v)) {
    throw ConfigError(flag + ": not a number: '" + text + "'");
  }
  return v;
}

int flag_int(const std::string& text, const std::string& flag) {
  char* end = nullptr;
  const long v = std::strtol(text.c_str(), &end, 10);
  if (text.empty() || end != text.c_str() + text.size()) throw ConfigError(flag + ": not an integer: '" + text + "'");
  return static_cast<int>(v);
}

RunConfig resolve(const CLI::App* app, const CommonFlags& f, const std::vector<std::string>& inputs) {
  json doc = json::object();
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw ConfigError("--config: cannot open " + f.config);
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("--config: " + f.config + " is not valid JSON (" + e.what() + ")");
    }
    if (doc.is_object() && doc.contains("config") && doc.contains("tool")) doc = json(doc["config"]);
    if (!doc.is_object()) throw ConfigError("--config: top level must be an object");
  }
  auto section = [&](const char* name) -> json& {
    if (!doc.contains(name)) doc[name] = json::object();
    return doc[name];
  };
  if (app->count("--model")) section("model")["kind"] = f.model;
  if (app->count("--jprime")) {
    json list = json::array();
    for (const auto& s : split(f.jprime, ',')) list.push_back(flag_real(s, "--jprime"));
    section("model")["j_prime"] = list;
  }
  if (app->count("--sizes")) {
    json list = json::array();
    for (const auto& s : split(f.sizes, ',')) list.push_back(flag_int(s, "--sizes"));
    section("model")["sizes"] = list;
  }
  if (app->count("--grid")) {
    const auto parts = split(f.grid, ':');
    if (parts.size() < 3 || parts.size() > 4) throw ConfigError("--grid: expected min:max:count[:log]");
    json g = {{"min", flag_real(parts[0], "--grid")},
              {"max", flag_real(parts[1], "--grid")},
              {"count", flag_int(parts[2], "--grid")},
              {"spacing", parts.size() == 4 ? parts[3] : "linear"}};
    doc["grid"] = g;
  }
  if (app->count("--measure")) section("analysis")["measures"] = json::array({f.measure});
  if (app->count("--gc-policy")) section("analysis")["gc_policy"] = f.gc_policy;
  if (app->count("--out")) section("io")["out"] = f.out;
  if (app->count("--seed")) section("solver")["seed"] = f.seed;
  if (app->count("--workers")) section("solver")["workers"] = f.workers;
  if (!inputs.empty()) section("io")["datasets"] = inputs;
  RunConfig config = parse_config(doc);
  validate(config);
  return config;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"impent: tripartite entanglement of two-impurity and two-channel Kondo chains"};
  app.set_version_flag("--version", std::string(IMPENT_VERSION));
  app.require_subcommand(1);

  CommonFlags sweep_flags, fit_flags, oracle_flags, synth_flags;
  CLI::App* sweep = app.add_subcommand("sweep", "ground states and entanglement over a control grid");
  add_common(sweep, sweep_flags);

  CLI::App* fit = app.add_subcommand("fit", "critical-exponent fits on sweep tables");
  add_common(fit, fit_flags);
  std::string fit_mode;
  std::vector<std::string> fit_inputs;
  fit->add_option("--mode", fit_mode, "power, collapse, ansatz, identity or all (default: analysis.fit_modes)");
  fit->add_option("--input,inputs", fit_inputs, "sweep CSV (or fit-report JSON for identity mode)");

  CLI::App* oracle = app.add_subcommand("oracle-check", "cross-check Lanczos and negativity routes on small chains");
  add_common(oracle, oracle_flags);
  bool inject_fault = false;
  oracle->add_flag("--inject-fault", inject_fault, "corrupt one matrix element (test hook)");

  CLI::App* synth = app.add_subcommand("synth", "synthetic scaling tables with known exponents");
  add_common(synth, synth_flags);
  SynthRequest sreq;
  std::string synth_kind = "collapse7", synth_f = "lorentzian";
  synth->add_option("--kind", synth_kind, "ansatz6 or collapse7");
  synth->add_option("--noise", sreq.noise, "multiplicative Gaussian noise fraction");
  synth->add_option("--nu", sreq.params.nu, "nu");
  synth->add_option("--beta", sreq.params.beta, "beta");
  synth->add_option("--lambda", sreq.params.lambda, "lambda");
  synth->add_option("--amplitude", sreq.params.a, "A");
  synth->add_option("--b-coeff", sreq.params.b, "B");
  synth->add_option("--scaling-function", synth_f, "lorentzian or exponential");
  synth->add_flag("--scaled-grid", sreq.params.scaled_grid, "grid values are the scaling variable x");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*sweep) return cmd_sweep(resolve(sweep, sweep_flags, {}), out);
    if (*fit) {
      FitRequest req;
      if (!fit_mode.empty() && fit_mode != "all") req.modes = {fit_mode};
      if (fit_mode == "all") req.modes = {"power", "collapse", "ansatz", "identity"};
      req.inputs = fit_inputs;
      const RunConfig config = resolve(fit, fit_flags, fit_inputs);
      if (fit->count("--jprime")) req.j_prime = config.j_primes.front();
      return cmd_fit(config, req, out);
    }
    if (*oracle) return cmd_oracle_check(resolve(oracle, oracle_flags, {}), inject_fault, out);
    if (*synth) {
      const RunConfig config = resolve(synth, synth_flags, {});
      if (synth_kind == "ansatz6") {
        sreq.kind = SynthKind::Ansatz6;
      } else if (synth_kind != "collapse7") {
        throw ConfigError("--kind: expected ansatz6 or collapse7, got '" + synth_kind + "'");
      }
      if (synth_f == "exponential") {
        sreq.params.f = ScalingFunction::Exponential;
      } else if (synth_f != "lorentzian") {
        throw ConfigError("--scaling-function: expected lorentzian or exponential, got '" + synth_f + "'");
      }
      if (config.gc_policy.kind == GcPolicyKind::Fixed) sreq.params.g_c = config.gc_policy.value;
      return cmd_synth(config, sreq, out);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DatasetError& e) {
    err << "dataset error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ScopeError& e) {
    err << "scope error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ModelSizeError& e) {
    err << "model error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ModelParamError& e) {
    err << "model error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const OptimizationError& e) {
    err << "optimization failed: " << e.what() << " (best cost " << e.best_cost() << ")\n";
    return kExitNumerical;
  } catch (const ConvergenceError& e) {
    err << "solver failed: " << e.what() << " (best residual " << e.best_residual() << ")\n";
    return kExitNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitUsage;
}

}  // namespace impent
