#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "impent/dataset.hpp"
#include "impent/errors.hpp"

using namespace impent;

namespace {

SweepRecord sample(int i) {
  SweepRecord r;
  r.model = i % 2 ? ModelKind::TwoChannelKondo : ModelKind::TwoImpurityKondo;
  r.j_prime = 0.4 + 0.1 * i;
  r.control = 1.0 / 3.0 + i;
  r.n_total = 8 + i;
  r.energy = -12.345678901234567 * (i + 1);
  r.measures.e1 = std::sqrt(2.0) / (i + 1);
  r.measures.e2 = i == 1 ? std::numeric_limits<double>::quiet_NaN() : 1e-300;
  r.measures.pi_a = -1e-17;
  r.measures.pi_b = 0.1;
  r.measures.pi_c = 0.7;
  r.measures.negativities = {0.1, 0.2, 0.30000000000000004, 0.0, 5e-9, 1.0};
  r.converged = i != 2;
  return r;
}

bool same(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

std::string header() { return std::string(kDatasetHeader) + "\n"; }

}  // namespace

TEST_SUITE("dataset") {
  TEST_CASE("write then read is lossless") {
    std::vector<SweepRecord> in{sample(0), sample(1), sample(2)};
    std::stringstream ss;
    write_dataset(in, ss);
    const auto out = read_dataset(ss);
    REQUIRE(out.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(out[i].model == in[i].model);
      CHECK(out[i].j_prime == in[i].j_prime);
      CHECK(out[i].control == in[i].control);
      CHECK(out[i].n_total == in[i].n_total);
      CHECK(out[i].energy == in[i].energy);
      CHECK(same(out[i].measures.e1, in[i].measures.e1));
      CHECK(same(out[i].measures.e2, in[i].measures.e2));
      CHECK(out[i].measures.pi_a == in[i].measures.pi_a);
      CHECK(out[i].measures.negativities.n_ac == in[i].measures.negativities.n_ac);
      CHECK(out[i].converged == in[i].converged);
    }
    std::stringstream again;
    write_dataset(out, again);
    std::stringstream first;
    write_dataset(in, first);
    CHECK(first.str() == again.str());
  }

  TEST_CASE("17 significant digits") {
    CHECK(format_real(0.1) == "0.10000000000000001");
    CHECK(format_real(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(format_real(-std::numeric_limits<double>::infinity()) == "-inf");
  }

  TEST_CASE("hand-written file") {
    std::stringstream ss(header() +
                         "2ikm,0.4,0.1,8,-10.5,1.2,2.0,0.5,0.4,0.3,1,1,1,0.1,0.1,0.2,true\n"
                         "2ikm,0.4,0.2,8,-10.6,1.3,2.1,0.5,0.4,0.3,1,1,1,0.1,0.1,0.2,1\n"
                         "2ckm,0.5,1.0,9,-11,nan,nan,nan,nan,nan,nan,nan,nan,nan,nan,nan,false\n");
    const auto r = read_dataset(ss);
    REQUIRE(r.size() == 3);
    CHECK(r[2].model == ModelKind::TwoChannelKondo);
    CHECK_FALSE(r[2].converged);
    CHECK(std::isnan(r[2].measures.e1));
    CHECK(std::abs(r[0].measures.log_negativities.n_bc - std::log(1.4)) <= 1e-15);
  }

  TEST_CASE("schema errors name the line and field") {
    auto message = [](const std::string& text) {
      std::stringstream ss(text);
      try {
        read_dataset(ss);
      } catch (const ParseError& e) {
        return std::string(e.what());
      }
      return std::string("no error");
    };
    const std::string missing = "model,j_prime,control,n_total,energy,e1,e2,pi_a,pi_b,pi_c,n_a_bc,n_b_ac,n_c_ab,n_ab,n_ac,converged\n";
    CHECK(message(missing).find("line 1") != std::string::npos);
    CHECK(message(missing).find("n_bc") != std::string::npos);
    const std::string bad_value = header() + "2ikm,0.4,abc,8,-10.5,1.2,2.0,0.5,0.4,0.3,1,1,1,0.1,0.1,0.2,true\n";
    CHECK(message(bad_value).find("line 2, field 'control'") != std::string::npos);
    const std::string bad_model = header() + "3ikm,0.4,0.1,8,-10.5,1.2,2.0,0.5,0.4,0.3,1,1,1,0.1,0.1,0.2,true\n";
    CHECK(message(bad_model).find("field 'model'") != std::string::npos);
    const std::string short_row = header() + "2ikm,0.4,0.1,8\n";
    CHECK(message(short_row).find("line 2") != std::string::npos);
    const std::string bad_flag = header() + "2ikm,0.4,0.1,8,-10.5,1.2,2.0,0.5,0.4,0.3,1,1,1,0.1,0.1,0.2,yes\n";
    CHECK(message(bad_flag).find("converged") != std::string::npos);
    CHECK(message("").find("header") != std::string::npos);
  }
}
