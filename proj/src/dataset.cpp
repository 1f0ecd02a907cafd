#include "impent/dataset.hpp"

#include <array>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "impent/errors.hpp"

namespace impent {

namespace {

constexpr std::size_t kColumns = 17;

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  out.push_back(field);
  return out;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

const std::array<std::string, kColumns>& column_names() {
  static const std::array<std::string, kColumns> names = [] {
    std::array<std::string, kColumns> out;
    const auto fields = split_csv(std::string(kDatasetHeader));
    for (std::size_t i = 0; i < kColumns; ++i) out[i] = fields[i];
    return out;
  }();
  return names;
}

[[noreturn]] void fail(std::size_t line, const std::string& field, const std::string& why) {
  std::ostringstream os;
  os << "dataset line " << line << ", field '" << field << "': " << why;
  throw ParseError(os.str());
}

double parse_real(const std::string& text, std::size_t line, const std::string& field) {
  const std::string t = trim(text);
  if (t.empty()) fail(line, field, "empty value");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size()) fail(line, field, "not a number: '" + t + "'");
  if (errno == ERANGE && std::isfinite(v) && v != 0.0) fail(line, field, "out of range: '" + t + "'");
  return v;
}

}  // namespace

std::string format_real(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_dataset(std::span<const SweepRecord> records, std::ostream& out) {
  out << kDatasetHeader << '\n';
  for (const auto& r : records) {
    const auto& m = r.measures;
    const auto& n = m.negativities;
    out << to_string(r.model) << ',' << format_real(r.j_prime) << ',' << format_real(r.control) << ','
        << r.n_total << ',' << format_real(r.energy) << ',' << format_real(m.e1) << ',' << format_real(m.e2)
        << ',' << format_real(m.pi_a) << ',' << format_real(m.pi_b) << ',' << format_real(m.pi_c) << ','
        << format_real(n.n_a_bc) << ',' << format_real(n.n_b_ac) << ',' << format_real(n.n_c_ab) << ','
        << format_real(n.n_ab) << ',' << format_real(n.n_ac) << ',' << format_real(n.n_bc) << ','
        << (r.converged ? "true" : "false") << '\n';
  }
}

void write_dataset(std::span<const SweepRecord> records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DatasetError("cannot open " + path.string() + " for writing");
  write_dataset(records, out);
  if (!out) throw DatasetError("write to " + path.string() + " failed");
}

std::vector<SweepRecord> read_dataset(std::istream& in) {
  const auto& names = column_names();
  std::string line;
  if (!std::getline(in, line)) throw ParseError("dataset line 1: missing header");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // BOM
  const auto header = split_csv(line);
  for (std::size_t i = 0; i < kColumns; ++i) {
    if (i >= header.size()) fail(1, names[i], "missing required column");
    if (trim(header[i]) != names[i]) {
      fail(1, trim(header[i]), "expected column '" + names[i] + "' at position " + std::to_string(i + 1));
    }
  }
  if (header.size() > kColumns) fail(1, trim(header[kColumns]), "unexpected extra column");

  std::vector<SweepRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || trim(line) == "\r") continue;
    const auto f = split_csv(line);
    if (f.size() != kColumns) {
      fail(line_no, f.size() < kColumns ? names[f.size()] : "<extra>",
           "expected " + std::to_string(kColumns) + " fields, found " + std::to_string(f.size()));
    }
    SweepRecord r;
    try {
      r.model = parse_model_kind(trim(f[0]));
    } catch (const Error&) {
      fail(line_no, names[0], "unknown model '" + trim(f[0]) + "'");
    }
    r.j_prime = parse_real(f[1], line_no, names[1]);
    r.control = parse_real(f[2], line_no, names[2]);
    {
      const std::string t = trim(f[3]);
      char* end = nullptr;
      const long n = std::strtol(t.c_str(), &end, 10);
      if (t.empty() || end != t.c_str() + t.size() || n <= 0) fail(line_no, names[3], "not a positive integer");
      r.n_total = static_cast<int>(n);
    }
    r.energy = parse_real(f[4], line_no, names[4]);
    auto& m = r.measures;
    m.e1 = parse_real(f[5], line_no, names[5]);
    m.e2 = parse_real(f[6], line_no, names[6]);
    m.pi_a = parse_real(f[7], line_no, names[7]);
    m.pi_b = parse_real(f[8], line_no, names[8]);
    m.pi_c = parse_real(f[9], line_no, names[9]);
    auto& n = m.negativities;
    n.n_a_bc = parse_real(f[10], line_no, names[10]);
    n.n_b_ac = parse_real(f[11], line_no, names[11]);
    n.n_c_ab = parse_real(f[12], line_no, names[12]);
    n.n_ab = parse_real(f[13], line_no, names[13]);
    n.n_ac = parse_real(f[14], line_no, names[14]);
    n.n_bc = parse_real(f[15], line_no, names[15]);
    const std::string conv = trim(f[16]);
    if (conv == "true" || conv == "1") {
      r.converged = true;
    } else if (conv == "false" || conv == "0") {
      r.converged = false;
    } else {
      fail(line_no, names[16], "expected true or false");
    }
    auto safe_log = [](double x) { return std::isnan(x) || x < 0.0 ? std::nan("") : std::log(2.0 * x + 1.0); };
    m.log_negativities = {safe_log(n.n_a_bc), safe_log(n.n_b_ac), safe_log(n.n_c_ab),
                          safe_log(n.n_ab),   safe_log(n.n_ac),   safe_log(n.n_bc)};
    records.push_back(r);
  }
  return records;
}

std::vector<SweepRecord> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open " + path.string());
  return read_dataset(in);
}

}  // namespace impent
