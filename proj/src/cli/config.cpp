#include "impent/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "impent/errors.hpp"

namespace impent {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& why) { throw ConfigError(path + ": " + why); }

void check_keys(const json& j, const std::string& section, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) bad(section, "expected an object");
  for (const auto& [key, value] : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
    if (!known) bad(section.empty() ? key : section + "." + key, "unknown key");
  }
}

double as_real(const json& v, const std::string& path) {
  if (!v.is_number()) bad(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) bad(path, "expected a finite number");
  return x;
}

std::int64_t as_int(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) {
    const auto u = v.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(INT64_MAX)) bad(path, "integer out of range");
    return static_cast<std::int64_t>(u);
  }
  if (!v.is_number_integer()) bad(path, "expected an integer");
  return v.get<std::int64_t>();
}

int as_small_int(const json& v, const std::string& path) {
  const auto x = as_int(v, path);
  if (x < INT32_MIN || x > INT32_MAX) bad(path, "integer out of range");
  return static_cast<int>(x);
}

std::uint64_t as_uint(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  bad(path, "expected a non-negative integer");
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) bad(path, "expected true or false");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) bad(path, "expected a string");
  return v.get<std::string>();
}

template <typename F>
auto as_list(const json& v, const std::string& path, F element) {
  using T = decltype(element(v, path));
  if (!v.is_array()) bad(path, "expected a list");
  std::vector<T> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(element(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::string spacing_name(GridSpacing s) { return s == GridSpacing::Log ? "log" : "linear"; }

}  // namespace

std::vector<double> GridConfig::points() const {
  if (!values.empty()) {
    check_grid(values);
    return values;
  }
  return make_grid(min, max, count, spacing);
}

GcPolicy GcPolicy::parse(const std::string& text) {
  GcPolicy p;
  if (text == "peak") return p;
  if (text == "fit") {
    p.kind = GcPolicyKind::Fit;
    return p;
  }
  if (text.rfind("fixed=", 0) == 0) {
    const std::string num = text.substr(6);
    char* end = nullptr;
    const double v = std::strtod(num.c_str(), &end);
    if (num.empty() || end != num.c_str() + num.size() || !std::isfinite(v)) {
      throw ConfigError("analysis.gc_policy: bad value in '" + text + "'");
    }
    p.kind = GcPolicyKind::Fixed;
    p.value = v;
    return p;
  }
  throw ConfigError("analysis.gc_policy: expected peak, fixed=VALUE or fit, got '" + text + "'");
}

std::string GcPolicy::str() const {
  switch (kind) {
    case GcPolicyKind::Peak: return "peak";
    case GcPolicyKind::Fit: return "fit";
    case GcPolicyKind::Fixed: {
      std::ostringstream os;
      os.precision(17);
      os << "fixed=" << value;
      return os.str();
    }
  }
  return "peak";
}

RunConfig default_config(ModelKind kind) {
  RunConfig c;
  c.kind = kind;
  if (kind == ModelKind::TwoChannelKondo) {
    c.sizes = {7, 9, 11};
    c.grid.min = 0.1;
    c.grid.max = 1.9;
    c.grid.count = 19;
    c.grid.spacing = GridSpacing::Linear;
  }
  return c;
}

RunConfig parse_config(const json& doc) {
  check_keys(doc, "", {"model", "grid", "solver", "analysis", "io"});

  ModelKind kind = ModelKind::TwoImpurityKondo;
  if (doc.contains("model") && doc["model"].is_object() && doc["model"].contains("kind")) {
    const std::string k = as_string(doc["model"]["kind"], "model.kind");
    try {
      kind = parse_model_kind(k);
    } catch (const Error&) {
      bad("model.kind", "expected 2ikm or 2ckm, got '" + k + "'");
    }
  }
  RunConfig c = default_config(kind);

  if (doc.contains("model")) {
    const json& m = doc["model"];
    check_keys(m, "model", {"kind", "j_prime", "sizes", "j2_ratio"});
    if (m.contains("j_prime")) {
      c.j_primes = m["j_prime"].is_number() ? std::vector<double>{as_real(m["j_prime"], "model.j_prime")}
                                            : as_list(m["j_prime"], "model.j_prime", as_real);
    }
    if (m.contains("sizes")) c.sizes = as_list(m["sizes"], "model.sizes", as_small_int);
    if (m.contains("j2_ratio")) c.j2_ratio = as_real(m["j2_ratio"], "model.j2_ratio");
  }
  if (doc.contains("grid")) {
    const json& g = doc["grid"];
    check_keys(g, "grid", {"min", "max", "count", "spacing", "values"});
    if (g.contains("values")) {
      for (const char* k : {"min", "max", "count", "spacing"}) {
        if (g.contains(k)) bad(std::string("grid.") + k, "cannot be combined with grid.values");
      }
      c.grid.values = as_list(g["values"], "grid.values", as_real);
      if (c.grid.values.empty()) bad("grid.values", "list is empty");
    }
    if (g.contains("min")) c.grid.min = as_real(g["min"], "grid.min");
    if (g.contains("max")) c.grid.max = as_real(g["max"], "grid.max");
    if (g.contains("count")) c.grid.count = as_small_int(g["count"], "grid.count");
    if (g.contains("spacing")) {
      const std::string s = as_string(g["spacing"], "grid.spacing");
      if (s == "log") {
        c.grid.spacing = GridSpacing::Log;
      } else if (s == "linear") {
        c.grid.spacing = GridSpacing::Linear;
      } else {
        bad("grid.spacing", "expected linear or log, got '" + s + "'");
      }
    }
  }
  if (doc.contains("solver")) {
    const json& s = doc["solver"];
    check_keys(s, "solver", {"tol", "max_iter", "krylov_max", "seed", "workers", "dense_cap", "rdm_cap"});
    if (s.contains("tol")) c.tol = as_real(s["tol"], "solver.tol");
    if (s.contains("max_iter")) c.max_iter = as_small_int(s["max_iter"], "solver.max_iter");
    if (s.contains("krylov_max")) c.krylov_max = as_small_int(s["krylov_max"], "solver.krylov_max");
    if (s.contains("seed")) c.seed = as_uint(s["seed"], "solver.seed");
    if (s.contains("workers")) c.workers = as_small_int(s["workers"], "solver.workers");
    if (s.contains("dense_cap")) c.dense_cap = as_uint(s["dense_cap"], "solver.dense_cap");
    if (s.contains("rdm_cap")) c.rdm_cap = as_uint(s["rdm_cap"], "solver.rdm_cap");
  }
  if (doc.contains("analysis")) {
    const json& a = doc["analysis"];
    check_keys(a, "analysis",
               {"measures", "pairwise", "zero_floor", "fit_modes", "gc_policy", "restarts", "collapse_threshold"});
    if (a.contains("measures")) c.measures = as_list(a["measures"], "analysis.measures", as_string);
    if (a.contains("pairwise")) c.pairwise = as_bool(a["pairwise"], "analysis.pairwise");
    if (a.contains("zero_floor")) c.zero_floor = as_real(a["zero_floor"], "analysis.zero_floor");
    if (a.contains("fit_modes")) c.fit_modes = as_list(a["fit_modes"], "analysis.fit_modes", as_string);
    if (a.contains("gc_policy")) c.gc_policy = GcPolicy::parse(as_string(a["gc_policy"], "analysis.gc_policy"));
    if (a.contains("restarts")) c.restarts = as_small_int(a["restarts"], "analysis.restarts");
    if (a.contains("collapse_threshold")) {
      c.collapse_threshold = as_real(a["collapse_threshold"], "analysis.collapse_threshold");
    }
  }
  if (doc.contains("io")) {
    const json& io = doc["io"];
    check_keys(io, "io", {"out", "datasets"});
    if (io.contains("out")) c.out_dir = as_string(io["out"], "io.out");
    if (io.contains("datasets")) c.datasets = as_list(io["datasets"], "io.datasets", as_string);
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, false);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path.string() + " is not valid JSON (" + e.what() + ")");
  }
  if (doc.is_object() && doc.contains("config") && doc.contains("tool")) return parse_config(doc["config"]);
  return parse_config(doc);
}

json to_json(const RunConfig& c) {
  json grid;
  if (!c.grid.values.empty()) {
    grid["values"] = c.grid.values;
  } else {
    grid = {{"min", c.grid.min}, {"max", c.grid.max}, {"count", c.grid.count}, {"spacing", spacing_name(c.grid.spacing)}};
  }
  return json{
      {"model",
       {{"kind", std::string(to_string(c.kind))}, {"j_prime", c.j_primes}, {"sizes", c.sizes}, {"j2_ratio", c.j2_ratio}}},
      {"grid", grid},
      {"solver",
       {{"tol", c.tol},
        {"max_iter", c.max_iter},
        {"krylov_max", c.krylov_max},
        {"seed", c.seed},
        {"workers", c.workers},
        {"dense_cap", c.dense_cap},
        {"rdm_cap", c.rdm_cap}}},
      {"analysis",
       {{"measures", c.measures},
        {"pairwise", c.pairwise},
        {"zero_floor", c.zero_floor},
        {"fit_modes", c.fit_modes},
        {"gc_policy", c.gc_policy.str()},
        {"restarts", c.restarts},
        {"collapse_threshold", c.collapse_threshold}}},
      {"io", {{"out", c.out_dir}, {"datasets", c.datasets}}},
  };
}

void validate(const RunConfig& c) {
  if (c.j_primes.empty()) bad("model.j_prime", "list is empty");
  for (double jp : c.j_primes) {
    if (!(jp >= 0.0)) bad("model.j_prime", "values must be non-negative");
  }
  if (c.sizes.empty()) bad("model.sizes", "size list is empty");
  std::set<int> seen;
  for (int n : c.sizes) {
    if (n <= 0) bad("model.sizes", "sizes must be positive, got " + std::to_string(n));
    if (c.kind == ModelKind::TwoImpurityKondo && n % 2 != 0) {
      bad("model.sizes", "2ikm sizes must be even, got " + std::to_string(n));
    }
    if (c.kind == ModelKind::TwoChannelKondo && n % 2 == 0) {
      bad("model.sizes", "2ckm sizes must be odd, got " + std::to_string(n));
    }
    if (!seen.insert(n).second) bad("model.sizes", "duplicate size " + std::to_string(n));
  }
  if (!(c.j2_ratio >= 0.0)) bad("model.j2_ratio", "must be non-negative");
  if (c.grid.values.empty()) {
    if (c.grid.count < 1) bad("grid.count", "must be at least 1");
    if (c.grid.count > 1 && !(c.grid.max > c.grid.min)) bad("grid.max", "must exceed grid.min");
    if (c.grid.spacing == GridSpacing::Log && !(c.grid.min > 0.0)) bad("grid.min", "log spacing needs min > 0");
  } else {
    try {
      check_grid(c.grid.values);
    } catch (const ConfigError& e) {
      bad("grid.values", e.what());
    }
  }
  if (!(c.tol > 0.0)) bad("solver.tol", "must be positive");
  if (c.max_iter < 1) bad("solver.max_iter", "must be positive");
  if (c.krylov_max < 2) bad("solver.krylov_max", "must be at least 2");
  if (c.workers < 1) bad("solver.workers", "must be at least 1");
  if (c.dense_cap < 1) bad("solver.dense_cap", "must be positive");
  if (c.rdm_cap < 2) bad("solver.rdm_cap", "must be at least 2");
  if (c.measures.empty()) bad("analysis.measures", "list is empty");
  for (const auto& m : c.measures) {
    if (m != "e1" && m != "e2") bad("analysis.measures", "expected e1 or e2, got '" + m + "'");
    if (m == "e2" && !c.pairwise) bad("analysis.measures", "e2 needs analysis.pairwise = true");
  }
  if (!(c.zero_floor >= 0.0)) bad("analysis.zero_floor", "must be non-negative");
  for (const auto& m : c.fit_modes) {
    if (m != "power" && m != "collapse" && m != "ansatz" && m != "identity") {
      bad("analysis.fit_modes", "expected power, collapse, ansatz or identity, got '" + m + "'");
    }
  }
  if (c.restarts < 1) bad("analysis.restarts", "must be at least 1");
  if (!(c.collapse_threshold > 0.0)) bad("analysis.collapse_threshold", "must be positive");
  if (c.out_dir.empty()) bad("io.out", "must not be empty");
}

SweepSpec sweep_spec(const RunConfig& c, double j_prime) {
  SweepSpec s;
  s.model = ModelParams::with_total_size(c.kind, c.kind == ModelKind::TwoImpurityKondo ? 8 : 9, j_prime, 1.0,
                                         c.j2_ratio);
  s.grid = c.grid.points();
  s.sizes = c.sizes;
  std::sort(s.sizes.begin(), s.sizes.end());
  s.pairwise = c.pairwise;
  s.seed = c.seed;
  s.workers = c.workers;
  s.solver.tol = c.tol;
  s.solver.max_iter = c.max_iter;
  s.solver.krylov_max = c.krylov_max;
  s.solver.seed = c.seed;
  s.rdm_cap = c.rdm_cap;
  s.zero_floor = c.zero_floor;
  return s;
}

}  // namespace impent
