#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "medshift/data.hpp"
#include "medshift/error.hpp"

using namespace medshift;

namespace {

ErrorCode code_of(const std::string& csv, double sigma_u = 0.1) {
  std::istringstream in(csv);
  try {
    read_csv(in, sigma_u);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::evaluation_error;
}

std::string message_of(const std::string& csv) {
  std::istringstream in(csv);
  try {
    read_csv(in, 0.1);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("reads censored and detected records in any column order") {
  std::istringstream in(
      "\xEF\xBB\xBF"
      "c,assay_limit,y,m_star\n"
      "1,1.5,0,2.25\n"
      "0,1.5,1,NA\n"
      "\n"
      "1,0.5,1,\n"
      "0,1.5,0,1.75\n");
  const Dataset d = read_csv(in, 0.29, "demo");
  REQUIRE(d.size() == 4);
  CHECK(d[0].y == 0);
  CHECK(d[0].c == 1);
  CHECK(*d[0].m_star == 2.25);
  CHECK_FALSE(d[1].detected());
  CHECK_FALSE(d[2].detected());
  CHECK(d[2].assay_limit == 0.5);
  CHECK(d.n_censored() == 2);
  CHECK(d.sigma_u2() == doctest::Approx(0.0841));
  CHECK(d.label() == "demo");
  CHECK(empirical_common_cause_dist(d).p_c1() == 0.5);
}

TEST_CASE("measured values at or below the limit become censored") {
  std::istringstream in("y,m_star,assay_limit,c\n1,1.0,1.0,0\n0,0.9,1.0,1\n0,1.1,1.0,1\n");
  const Dataset d = read_csv(in, 0.0);
  CHECK(d.n_reclassified() == 2);
  CHECK(d.n_censored() == 2);
  CHECK(d[2].detected());
}

TEST_CASE("malformed input names the row and column") {
  CHECK(code_of("") == ErrorCode::parse_error);
  CHECK(code_of("y,m_star,c\n1,2,0\n") == ErrorCode::parse_error);
  CHECK(message_of("y,m_star,assay_limit,c\n1,2,0,0\n0,abc,0,1\n") ==
        "row 3, column 'm_star': not a finite number: 'abc'");
  CHECK(message_of("y,m_star,assay_limit,c\n2,1,0,0\n").find("column 'y'") != std::string::npos);
  CHECK(code_of("y,m_star,assay_limit,c\n1,1,0\n") == ErrorCode::parse_error);
  CHECK(code_of("y,m_star,assay_limit,c\n1,inf,0,1\n0,1,0,0\n") == ErrorCode::parse_error);
}

TEST_CASE("dataset validation") {
  CHECK(code_of("y,m_star,assay_limit,c\n1,1,0,0\n1,2,0,1\n") == ErrorCode::validation);
  CHECK(code_of("y,m_star,assay_limit,c\n1,1,0,0\n0,2,0,1\n", -0.1) == ErrorCode::validation);
  CHECK(code_of("y,m_star,assay_limit,c\n") == ErrorCode::validation);
  std::vector<Record> bad{{1, 1.0, 0.0, 2}, {0, 1.0, 0.0, 0}};
  CHECK_THROWS_AS(Dataset(bad, 0.0), Error);
}

TEST_CASE("csv round trip is exact") {
  std::vector<Record> recs{{1, 0.1 + 0.2, 0.0, 1}, {0, std::nullopt, 1.0 / 3.0, 0},
                           {1, 2.718281828459045, -1e-7, 0}};
  const Dataset d(recs, 0.3);
  std::ostringstream out;
  write_csv(out, d);
  std::istringstream in(out.str());
  const Dataset back = read_csv(in, 0.3);
  REQUIRE(back.size() == d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(back[i].y == d[i].y);
    CHECK(back[i].c == d[i].c);
    CHECK(back[i].assay_limit == d[i].assay_limit);
    CHECK(back[i].m_star == d[i].m_star);
  }
}

TEST_CASE("assay limit override coarsens but never refines") {
  std::vector<Record> recs{{1, 1.2, 0.5, 1}, {0, std::nullopt, 0.5, 0}, {0, 2.0, 0.5, 0}};
  const Dataset d(recs, 0.0);
  const Dataset coarse = apply_assay_limit_override(d, 1.5);
  CHECK(coarse.n_censored() == 2);
  CHECK(coarse[0].assay_limit == 1.5);
  CHECK(coarse[2].detected());
  try {
    apply_assay_limit_override(d, 0.2);
    FAIL("expected validation error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::validation);
  }
  CHECK_THROWS_AS(apply_assay_limit_override(d, INFINITY), Error);
}
