#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "approx.hpp"

#include "qplab/rationals.hpp"
#include "qplab/util.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

using namespace qplab;

namespace {

// Frozen convergent table for the golden mean [0;1,1,1,...]: (n, p_n, q_n).
// Fibonacci pairs; independent of the recurrence under test.
const std::vector<std::array<long long, 3>> kGoldenTable = {
    {1, 1, 1},   {2, 1, 2},   {3, 2, 3},   {4, 3, 5},    {5, 5, 8},    {6, 8, 13},
    {7, 13, 21}, {8, 21, 34}, {9, 34, 55}, {10, 55, 89}, {11, 89, 144}, {12, 144, 233},
};

// Frozen convergents of the silver mean [0;2,2,2,...]: Pell numbers.
const std::vector<std::array<long long, 3>> kSilverTable = {
    {1, 1, 2}, {2, 2, 5}, {3, 5, 12}, {4, 12, 29}, {5, 29, 70},
};

double circular_distance(double a, double b) {
  double d = std::fabs(a - b);
  return std::min(d, 1.0 - d);
}

// Brute-force largest circular spacing between consecutive orbit points.
double orbit_gap_oracle(double theta, double alpha, int q) {
  std::vector<double> pts;
  for (int j = 0; j < q; ++j) pts.push_back(mod1(theta + j * alpha));
  std::sort(pts.begin(), pts.end());
  double worst = 1.0 - (pts.back() - pts.front());  // wrap-around spacing
  for (std::size_t i = 1; i < pts.size(); ++i) worst = std::max(worst, pts[i] - pts[i - 1]);
  return worst;
}

}  // namespace

TEST_CASE("golden mean expansion is all ones") {
  auto g = ContinuedFraction::golden();
  REQUIRE(g.available_terms() >= 90);
  for (int i = 0; i < g.available_terms(); ++i) CHECK(g.coefficients()[i] == 1);
  CHECK(!g.terminated());
  CHECK(g.value() == doctest::Approx(0.5 * (std::sqrt(5.0) - 1.0)).epsilon(1e-14));
  REQUIRE(g.certified_bound().has_value());
  CHECK(*g.certified_bound() == 1);
}

TEST_CASE("silver mean expansion is all twos") {
  auto s = ContinuedFraction::silver();
  REQUIRE(s.available_terms() >= 40);
  for (int i = 0; i < s.available_terms(); ++i) CHECK(s.coefficients()[i] == 2);
  CHECK(s.value() == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-14));
  REQUIRE(s.certified_bound().has_value());
  CHECK(*s.certified_bound() == 2);
}

TEST_CASE("rational inputs terminate") {
  SUBCASE("one half") {
    auto cf = ContinuedFraction::from_value(0.5);
    CHECK(cf.terminated());
    REQUIRE(cf.available_terms() == 1);
    CHECK(cf.coefficients()[0] == 2);
    CHECK(cf.value() == 0.5);
  }
  SUBCASE("three sevenths") {
    auto cf = ContinuedFraction::from_value(3.0 / 7.0);
    CHECK(cf.terminated());
    REQUIRE(cf.available_terms() == 2);
    CHECK(cf.coefficients()[0] == 2);
    CHECK(cf.coefficients()[1] == 3);
    auto last = convergent_at(cf, 2);
    CHECK(last.p == 3);
    CHECK(last.q == 7);
  }
}

TEST_CASE("value must lie strictly between zero and one") {
  CHECK_THROWS_AS(ContinuedFraction::from_value(0.0), std::invalid_argument);
  CHECK_THROWS_AS(ContinuedFraction::from_value(1.0), std::invalid_argument);
  CHECK_THROWS_AS(ContinuedFraction::from_value(-0.25), std::invalid_argument);
  CHECK_THROWS_AS(ContinuedFraction::from_value(1.5), std::invalid_argument);
}

TEST_CASE("golden convergents match the Fibonacci table") {
  auto g = ContinuedFraction::golden();
  auto rows = convergents(g, 12);
  REQUIRE(rows.size() == kGoldenTable.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].n == kGoldenTable[i][0]);
    CHECK(rows[i].p == kGoldenTable[i][1]);
    CHECK(rows[i].q == kGoldenTable[i][2]);
  }
}

TEST_CASE("silver convergents match the Pell table") {
  auto s = ContinuedFraction::silver();
  auto rows = convergents(s, 5);
  REQUIRE(rows.size() == kSilverTable.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].n == kSilverTable[i][0]);
    CHECK(rows[i].p == kSilverTable[i][1]);
    CHECK(rows[i].q == kSilverTable[i][2]);
  }
}

TEST_CASE("adjacent convergents satisfy the unimodular identity") {
  // p_n q_{n-1} - p_{n-1} q_n = (-1)^{n-1}, seeded with p_0=0, q_0=1.
  for (auto cf : {ContinuedFraction::golden(), ContinuedFraction::silver(),
                  ContinuedFraction::from_value(M_PI - 3.0)}) {
    auto rows = convergents(cf, std::min(12, cf.available_terms()));
    long long pm = 0, qm = 1;  // row n-1
    for (const auto& r : rows) {
      long long det = r.p * qm - pm * r.q;
      CHECK(det == ((r.n % 2 == 1) ? 1 : -1));
      pm = r.p;
      qm = r.q;
    }
  }
}

TEST_CASE("denominators increase and stay coprime with numerators") {
  for (auto cf : {ContinuedFraction::golden(), ContinuedFraction::silver(),
                  ContinuedFraction::from_value(M_PI - 3.0), ContinuedFraction::from_value(0.9)}) {
    auto rows = convergents(cf, std::min(15, cf.available_terms()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CHECK(std::gcd(rows[i].p, rows[i].q) == 1);
      if (i > 0) CHECK(rows[i].q > rows[i - 1].q);
    }
  }
}

TEST_CASE("convergents are best approximations at their scale") {
  // |alpha - p_n/q_n| < 1/(q_n q_{n+1})
  auto g = ContinuedFraction::golden();
  auto rows = convergents(g, 20);
  long double alpha = 0.5L * (std::sqrt(5.0L) - 1.0L);
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    long double err = std::fabs(alpha - (long double)rows[i].p / rows[i].q);
    CHECK(err < 1.0L / ((long double)rows[i].q * rows[i + 1].q));
  }
}

TEST_CASE("signed approximation gap matches the direct difference") {
  auto g = ContinuedFraction::golden();
  double alpha = g.value();
  for (int n = 1; n <= 12; ++n) {
    auto c = convergent_at(g, n);
    double direct = alpha - (double)c.p / (double)c.q;
    CHECK(approximation_gap(g, n) == testutil::margin(direct, 1e-12));
  }
  // n = 1: alpha - 1/1 = (sqrt(5)-3)/2, frozen.
  CHECK(approximation_gap(g, 1) == testutil::margin(-0.3819660112501051, 1e-12));
  // Sign alternates: even n below, odd n above the target.
  for (int n = 1; n <= 12; ++n) {
    double gap = approximation_gap(g, n);
    CHECK((n % 2 == 1 ? gap < 0 : gap > 0));
  }
}

TEST_CASE("deep convergents overflow int64 loudly") {
  auto g = ContinuedFraction::golden(120);
  CHECK_NOTHROW(convergent_at(g, 90));
  CHECK_THROWS_AS(convergent_at(g, 95), std::overflow_error);
}

TEST_CASE("depth past the expansion is an error") {
  auto cf = ContinuedFraction::from_value(0.5);
  CHECK_THROWS_AS(convergent_at(cf, 2), std::out_of_range);
}

TEST_CASE("orbit gap of the period two lattice") {
  CHECK(orbit_gap(0.0, 0.5, 2) == 0.5);
}

TEST_CASE("orbit gap of a rational lattice is the lattice spacing") {
  CHECK(orbit_gap(0.1, 2.0 / 5.0, 5) == testutil::margin(0.2, 1e-14));
}

TEST_CASE("orbit gap for eight golden rotations") {
  double alpha = ContinuedFraction::golden().value();
  double got = orbit_gap(0.3, alpha, 8);
  CHECK(got == testutil::margin(orbit_gap_oracle(0.3, alpha, 8), 1e-14));
  CHECK(got < 3.0 / 8.0);
}

TEST_CASE("orbit gap beats three over q along golden denominators") {
  double alpha = ContinuedFraction::golden().value();
  for (long long q : {2LL, 3LL, 5LL, 8LL, 13LL, 21LL, 34LL, 55LL, 89LL}) {
    CHECK(orbit_gap(0.0, alpha, (int)q) < 3.0 / (double)q);
    CHECK(orbit_gap(0.37, alpha, (int)q) < 3.0 / (double)q);
  }
}

TEST_CASE("finite coefficient lists reconstruct exact rationals") {
  auto cf = ContinuedFraction::from_coefficients({1, 1, 1, 1, 1});
  CHECK(cf.terminated());
  CHECK(cf.value() == doctest::Approx(5.0 / 8.0).epsilon(1e-15));
  auto last = convergent_at(cf, 5);
  CHECK(last.p == 5);
  CHECK(last.q == 8);
}

TEST_CASE("repeating patterns give quadratic irrationals with a certified bound") {
  auto cf = ContinuedFraction::from_coefficients({2, 1}, /*repeating=*/true);
  CHECK(!cf.terminated());
  CHECK(cf.available_terms() >= 60);
  REQUIRE(cf.certified_bound().has_value());
  CHECK(*cf.certified_bound() == 2);
  // Fixed point of x = 1/(2 + 1/(1 + x)).
  double x = cf.value();
  CHECK(x == doctest::Approx(1.0 / (2.0 + 1.0 / (1.0 + x))).epsilon(1e-12));
}

TEST_CASE("bounded type report certifies named constants") {
  auto rg = bounded_type_report(ContinuedFraction::golden(), 50);
  CHECK(rg.bound == 1);
  CHECK(rg.bounded_so_far);
  CHECK(rg.certified);

  auto rs = bounded_type_report(ContinuedFraction::silver(), 50);
  CHECK(rs.bound == 2);
  CHECK(rs.certified);

  // A decimal expansion can only ever be inspected up to its horizon.
  auto rf = bounded_type_report(ContinuedFraction::from_value(M_PI - 3.0), 10);
  CHECK(!rf.certified);
  CHECK(rf.bound >= 292);  // [0;7,15,1,292,...] within the first ten terms
}

TEST_CASE("double precision limits the expansion depth") {
  double alpha = ContinuedFraction::golden().value();
  auto cf = ContinuedFraction::from_value(alpha, 200);
  CHECK(cf.precision_limited());
  CHECK(cf.available_terms() < 60);
  for (int i = 0; i < std::min(30, cf.available_terms()); ++i) CHECK(cf.coefficients()[i] == 1);
}
