#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "zr/errors.hpp"
#include "zr/exponents.hpp"
#include "zr/rng.hpp"

using namespace zr;

namespace {

bool has(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

// Second bookkeeping of every constraint, written in cleared-denominator
// form so it shares no expressions with the library.
std::map<std::string, bool> oracle(double b1, double b2, int d) {
  std::map<std::string, bool> m;
  m["base_b1"] = 2 * b1 > 1;
  m["base_b2"] = !(b2 < 0) && !(2 * b2 > 1);
  m["auxi_1"] = b1 * (d + 4 * b2) < 2 + 2 * b2;
  m["auxi_2"] = d * b1 < 2;
  m["auxi_3"] = b1 + b2 < 1;
  m["auxi_4"] = 4 * b1 + (2 + d) * b2 > 1 + d;
  m["I521_auxi_1"] = 12 * b2 < 8 * b1 - d;
  m["I521_auxi_2"] = 4 * b2 <= 4 - d;
  m["I521_auxi_3"] = d == 2 ? 6 * b2 < 1 : 12 * b2 < 1;
  return m;
}

}  // namespace

TEST_CASE("derive examples") {
  auto p = derive(0.8, 0.1, 2);
  CHECK(p.k2 == doctest::Approx(0.8));
  CHECK(p.c1 == doctest::Approx(0.2));
  CHECK(p.c2 == doctest::Approx(0.9));
  CHECK(p.b0 == 0.8);
  p = derive(0.75, 0.0, 2);
  CHECK(p.k2 == 1.0);
  CHECK(p.c1 == 0.25);
  CHECK(p.c2 == 1.0);
  p = derive(0.6, 1.0 / 12.0, 3);
  CHECK(p.k2 == doctest::Approx(5.0 / 6.0));
  CHECK(p.c1 == doctest::Approx(0.4));
  CHECK(p.c2 == doctest::Approx(11.0 / 12.0));
}

TEST_CASE("derive round trips k2") {
  SplitMix64 g(7);
  for (int i = 0; i < 1000; ++i) {
    const double k2 = g.uniform();
    CHECK(std::abs(derive(0.7, (1 - k2) / 2, 2).k2 - k2) < 1e-15);
  }
}

TEST_CASE("plus part") {
  CHECK(plus_part(0.3, 1e-6) == 0.3);
  CHECK(plus_part(0.0, 1e-6) == 1e-6);
  CHECK(plus_part(-0.3, 1e-6) == 0.0);
}

TEST_CASE("constraint examples") {
  CHECK(check_constraints(derive(0.8, 0.1, 2)).admissible);
  auto r = check_constraints(derive(0.7, 0.0, 2));
  CHECK(r.violated() == std::vector<std::string>{"auxi_4"});
  r = check_constraints(derive(0.6, 0.05, 3));
  CHECK(has(r.violated(), "auxi_4"));
  // auxi 4 lhs/rhs from the example: 1.325 vs 2
  for (const auto& c : r.checks)
    if (c.id == "auxi_4") {
      CHECK(c.lhs == doctest::Approx(2.0));
      CHECK(c.rhs == doctest::Approx(1.325));
    }
  CHECK(check_constraints(derive(0.9, 0.0, 2)).admissible);
}

TEST_CASE("boundary points fail exactly the strict constraints") {
  CHECK(check_constraints(derive(0.75, 0.0, 2)).violated() == std::vector<std::string>{"auxi_4"});
  for (double b1 : {0.85, 0.9, 0.95}) {
    const auto v = check_constraints(derive(b1, 1.0 - b1, 2)).violated();
    CHECK(has(v, "auxi_3"));
  }
  // inside the b2 < 1/6 range the b1 + b2 = 1 line is reachable only for b1 > 5/6
  CHECK(check_constraints(derive(0.85, 1.0 - 0.85, 2)).violated() == std::vector<std::string>{"auxi_3"});
  // non-strict I521 auxi 2 at equality, d = 3: b2 = 1/4 (other constraints fail there, but not this one)
  for (const auto& c : check_constraints(derive(0.6, 0.25, 3)).checks)
    if (c.id == "I521_auxi_2") CHECK(c.pass);
}

TEST_CASE("constraint evaluators match an independent re-implementation") {
  SplitMix64 g(2024);
  int mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    const int d = (i % 2) ? 3 : 2;
    const double b1 = g.uniform(0.4, 1.1), b2 = g.uniform(-0.1, 0.6);
    const auto want = oracle(b1, b2, d);
    const auto rep = check_constraints(derive(b1, b2, d));
    REQUIRE(rep.checks.size() == want.size());
    bool all = true;
    for (const auto& c : rep.checks) {
      REQUIRE(want.count(c.id) == 1);
      if (c.pass != want.at(c.id)) ++mismatches;
      all = all && want.at(c.id);
    }
    if (rep.admissible != all) ++mismatches;
  }
  CHECK(mismatches == 0);
}

TEST_CASE("theta examples") {
  auto t = theta_values(derive(0.8, 0.1, 2));
  CHECK(t.theta1 == doctest::Approx((1 - 1.6 / 2.6) * 1.7));
  CHECK(t.theta1 == doctest::Approx(0.65385).epsilon(1e-5));
  CHECK(t.theta221 == doctest::Approx(0.14));
  CHECK(t.theta42 == doctest::Approx((1 - 3.2 / 4.2) * (1.5 - 1e-6)));
  CHECK(t.theta42 == doctest::Approx(0.35714).epsilon(1e-5));
  CHECK(t.theta22 == std::min({t.theta221, t.theta222, t.theta223}));
  CHECK_THROWS_AS(theta_values(derive(0.3, 0.3, 2)), SingularityError);
}

TEST_CASE("theta values are positive at admissible d=2 points") {
  SplitMix64 g(99);
  int found = 0;
  while (found < 100) {
    const double b1 = g.uniform(0.5, 1.0), b2 = g.uniform(0.0, 0.5);
    const auto p = derive(b1, b2, 2);
    if (!check_constraints(p).admissible) continue;
    ++found;
    const auto t = theta_values(p);
    for (const auto& [name, v] : t.entries()) {
      CHECK(std::isfinite(v));
      CHECK(v > 0.0);
    }
    CHECK(t.min_theta > 0.0);
  }
}

TEST_CASE("region scan d=2") {
  const auto r = region_scan(2, 1e-3);
  CHECK(r.n_b1 == 499);
  CHECK(r.n_b2 == 501);
  CHECK(r.cells.size() == 499u * 501u);
  CHECK(r.box_samples > 0);
  CHECK(r.box_failures == 0);
  CHECK(r.box_contained);
  REQUIRE(r.uniform_b1_interval);
  // b1 = 5/6 cuts the uniform rectangle through auxi 3 at b2 -> 1/6
  CHECK(r.uniform_b1_interval->first == doctest::Approx(0.751));
  // 0.834 + 0.166 == 1 sits on the auxi 3 line; rounding of 1 - b1 decides that row
  CHECK(r.uniform_b1_interval->second >= 0.833 - 1e-12);
  CHECK(r.uniform_b1_interval->second <= 0.834 + 1e-12);
  REQUIRE(r.bounding_box);
  CHECK(r.bounding_box->b1_hi > 0.9);  // pointwise set reaches beyond 5/6
}

TEST_CASE("region scan d=3 reports the auxi 4 exclusion") {
  const auto r = region_scan(3, 1e-3);
  CHECK(r.box_samples > 0);
  CHECK(r.box_failures == r.box_samples);
  CHECK_FALSE(r.box_contained);
  REQUIRE_FALSE(r.witnesses.empty());
  for (const auto& w : r.witnesses) CHECK(has(w.violated, "auxi_4"));
  bool auxi4_all = false;
  for (const auto& [k, v] : r.failure_counts)
    if (k == "auxi_4") auxi4_all = v == r.box_samples;
  CHECK(auxi4_all);
}

TEST_CASE("region scan is thread count independent and validates") {
  const auto a = region_scan(2, 1e-2, 2e-3, 1);
  const auto b = region_scan(2, 1e-2, 2e-3, 3);
  REQUIRE(a.cells.size() == b.cells.size());
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    CHECK(a.cells[i].admissible == b.cells[i].admissible);
    CHECK(a.cells[i].min_theta == b.cells[i].min_theta);
  }
  CHECK_THROWS_AS(region_scan(2, 2e-2), ConfigError);
  CHECK_THROWS_AS(region_scan(4, 1e-3), ConfigError);
}

TEST_CASE("strichartz exponents") {
  auto s = strichartz_exponents(0.0, 0.0, 0.3, 0.5, 0.6, 2);
  REQUIRE(s.feasible);
  CHECK(s.q == 2.0);
  CHECK(s.r == 2.0);
  CHECK(s.theta == 0.0);
  s = strichartz_exponents(0.6, 0.6, 1.0, 1.0, 0.6, 2);
  REQUIRE(s.feasible);
  CHECK(s.q == doctest::Approx(2.0));
  CHECK(s.r == doctest::Approx(2.0));
  CHECK(s.theta == doctest::Approx(0.5));
  // wave case: 2/q = 1 - (1-gamma) a / b0, r = 2
  s = strichartz_exponents(0.6, 0.6, 0.5, 0.3, 0.6, 2, true);
  REQUIRE(s.feasible);
  CHECK(s.q == doctest::Approx(4.0));
  CHECK(s.r == 2.0);
  // eta < 1 gives r > 2: delta = (1-eta)(1-gamma)a/b0 = 0.25, 1/r = 1/2 - 0.125
  s = strichartz_exponents(0.6, 0.6, 0.5, 0.5, 0.6, 2);
  REQUIRE(s.feasible);
  CHECK(s.delta == doctest::Approx(0.25));
  CHECK(s.r == doctest::Approx(1.0 / 0.375));
  CHECK(s.q == doctest::Approx(1.0 / 0.375));
  s = strichartz_exponents(0.7, 0.6, 0.0, 1.0, 0.6, 2);
  CHECK_FALSE(s.feasible);
  CHECK(has(s.violated, "(1-gamma) a <= b0"));
  s = strichartz_exponents(0.5, 0.0, 0.5, 1.0, 0.6, 2);
  CHECK_FALSE(s.feasible);
  CHECK(has(s.violated, "gamma a <= a'"));
}
