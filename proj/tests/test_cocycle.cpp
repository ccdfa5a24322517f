#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "approx.hpp"

#include "qplab/cocycle.hpp"
#include "qplab/potential.hpp"
#include "qplab/rationals.hpp"

#include <cmath>
#include <complex>
#include <random>
#include <vector>

using namespace qplab;

namespace {

// Dense tridiagonal determinant by partial-pivoting elimination.  Slow and
// simple on purpose: it shares no code with the three-term recurrence.
double dense_tridiag_det(const std::vector<double>& diag) {
  const int n = (int)diag.size();
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    m[i][i] = diag[i];
    if (i + 1 < n) {
      m[i][i + 1] = -1.0;
      m[i + 1][i] = -1.0;
    }
  }
  double det = 1.0;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(m[r][col]) > std::fabs(m[piv][col])) piv = r;
    if (m[piv][col] == 0.0) return 0.0;
    if (piv != col) {
      std::swap(m[piv], m[col]);
      det = -det;
    }
    det *= m[col][col];
    for (int r = col + 1; r < n; ++r) {
      double factor = m[r][col] / m[col][col];
      for (int c = col; c < n; ++c) m[r][c] -= factor * m[col][c];
    }
  }
  return det;
}

TransferMatrix multiply_chain(const AnalyticPotential& f, double alpha, double theta,
                              double E, int n) {
  TransferMatrix t{1.0, 0.0, 0.0, 1.0};
  for (int j = 0; j < n; ++j) t = one_step(f, alpha, theta, E, j) * t;
  return t;
}

}  // namespace

TEST_CASE("single step matrix holds the potential value") {
  auto f = AnalyticPotential::almost_mathieu(2.0);
  auto m = one_step(f, 0.5, 0.0, 0.0, 1);  // phase 0 + 1*(1/2): f = -4
  CHECK(m.a11 == testutil::margin(4.0, 1e-12));
  CHECK(m.a12 == -1.0);
  CHECK(m.a21 == 1.0);
  CHECK(m.a22 == 0.0);

  auto m0 = one_step(f, 0.5, 0.2, 1.5, 0);
  CHECK(m0.a11 == testutil::margin(1.5 - f.evaluate(0.2), 1e-14));
}

TEST_CASE("every step matrix has unit determinant") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    auto f = AnalyticPotential::almost_mathieu(3.0 * u(rng));
    auto m = one_step(f, u(rng), u(rng), 6.0 * u(rng) - 3.0, (int)(u(rng) * 50));
    CHECK(m.det() == 1.0);  // exact: a12*a21 = -1 and a22 = 0
  }
}

TEST_CASE("free cocycle at band center is a quarter rotation") {
  auto f = AnalyticPotential::zero();
  auto t2 = n_step(f, 0.4, 0.1, 0.0, 2);
  CHECK(t2.m.a11 == -1.0);
  CHECK(t2.m.a12 == 0.0);
  CHECK(t2.m.a21 == 0.0);
  CHECK(t2.m.a22 == -1.0);
  CHECK(t2.log_scale == 0.0);

  auto t4 = n_step(f, 0.4, 0.1, 0.0, 4);
  CHECK(t4.m.a11 == 1.0);
  CHECK(t4.m.a12 == 0.0);
  CHECK(t4.m.a21 == 0.0);
  CHECK(t4.m.a22 == 1.0);
}

TEST_CASE("short products agree with explicit multiplication") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    auto f = AnalyticPotential::almost_mathieu(0.5 + 2.0 * u(rng));
    double alpha = u(rng), theta = u(rng), E = 8.0 * u(rng) - 4.0;
    int n = 1 + (int)(u(rng) * 8);
    auto got = n_step(f, alpha, theta, E, n);
    auto want = multiply_chain(f, alpha, theta, E, n);
    CHECK(got.log_scale == 0.0);  // far below the rescale threshold
    CHECK(got.m.a11 == testutil::margin_rel(want.a11, 1e-12, 1e-12));
    CHECK(got.m.a12 == testutil::margin_rel(want.a12, 1e-12, 1e-12));
    CHECK(got.m.a21 == testutil::margin_rel(want.a21, 1e-12, 1e-12));
    CHECK(got.m.a22 == testutil::margin_rel(want.a22, 1e-12, 1e-12));
  }
  CHECK_THROWS_AS(n_step(AnalyticPotential::zero(), 0.5, 0.0, 0.0, -1), std::domain_error);
}

TEST_CASE("product determinant stays near one while entries stay bounded") {
  // In the elliptic regime the product does not grow, so the determinant of
  // the accumulated matrix is well conditioned even after many steps.
  auto f = AnalyticPotential::zero();
  auto t = n_step(f, ContinuedFraction::golden().value(), 0.2, 1.0, 5000);
  CHECK(std::fabs(t.det_log_drift()) <= 1e-9);

  // Hyperbolic products lose the determinant to cancellation at a rate
  // ~ eps * ||T||^2; the drift must stay within that conditioning limit.
  auto am = AnalyticPotential::almost_mathieu(2.0);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    auto t2 = n_step(am, u(rng), u(rng), 6.0 * u(rng) - 3.0, 10);
    double conditioning = std::exp(2.0 * t2.log_frobenius());
    CHECK(std::fabs(t2.det_log_drift()) <= 1e-12 * std::max(1.0, conditioning));
  }
}

TEST_CASE("rescaling keeps growing products finite") {
  auto f = AnalyticPotential::almost_mathieu(2.0);
  double alpha = ContinuedFraction::golden().value();
  auto t = n_step(f, alpha, 0.1357, 0.0, 4000);
  CHECK(t.log_scale > 0.0);
  CHECK(std::isfinite(t.m.a11));
  CHECK(t.m.frobenius() <= 2.0 * kRescaleThreshold);
  // Growth rate lands near log 2 for this coupling.
  CHECK(t.log_frobenius() / 4000.0 == testutil::margin(std::log(2.0), 0.1));
}

TEST_CASE("transfer matrix is built from determinant polynomials") {
  // Columns of T_k are (P_k, P_{k-1}) at theta and -(P_{k-1}, P_{k-2}) at
  // theta+alpha.  Entries are compared after aligning on the largest log.
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    auto f = AnalyticPotential::almost_mathieu(0.4 + 2.0 * u(rng));
    double alpha = u(rng), theta = u(rng), E = 9.0 * u(rng) - 4.5;
    int k = 2 + (int)(u(rng) * 118);
    auto t = n_step(f, alpha, theta, E, k);

    auto pk = det_poly_pair(f, alpha, theta, E, k);
    auto pk_shift = det_poly_pair(f, alpha, mod1(theta + alpha), E, k - 1);

    struct Cell {
      double lg;
      double sgn;
    };
    const Cell want[4] = {
        {pk.pk.log_abs(), pk.pk.sign()},
        {pk_shift.pk.log_abs(), -pk_shift.pk.sign()},
        {pk.pk_prev.log_abs(), pk.pk_prev.sign()},
        {pk_shift.pk_prev.log_abs(), -pk_shift.pk_prev.sign()},
    };
    const int rows[4] = {0, 0, 1, 1}, cols[4] = {0, 1, 0, 1};
    double m = -1e308;
    for (int i = 0; i < 4; ++i) {
      m = std::max(m, want[i].lg);
      m = std::max(m, t.log_abs_entry(rows[i], cols[i]));
    }
    for (int i = 0; i < 4; ++i) {
      double a = t.sign_entry(rows[i], cols[i]) * std::exp(t.log_abs_entry(rows[i], cols[i]) - m);
      double b = want[i].sgn * std::exp(want[i].lg - m);
      CHECK(std::fabs(a - b) <= 1e-8);
    }
  }
}

TEST_CASE("recurrence values match the dense determinant") {
  std::mt19937_64 rng(59);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    auto f = AnalyticPotential::almost_mathieu(0.3 + 2.2 * u(rng));
    double alpha = u(rng), theta = u(rng), E = 8.0 * u(rng) - 4.0;
    int k = 1 + (int)(u(rng) * 29);
    std::vector<double> diag;
    for (int j = 0; j < k; ++j) diag.push_back(E - f.evaluate(theta + j * alpha));
    double want = dense_tridiag_det(diag);
    auto got = det_poly(f, alpha, theta, E, k);
    double scale = std::max({std::fabs(want), std::fabs(got), 1.0});
    CHECK(std::fabs(got - want) / scale <= 1e-8);
  }
}

TEST_CASE("determinant polynomial base cases") {
  auto f = AnalyticPotential::almost_mathieu(1.0);
  double alpha = ContinuedFraction::golden().value();
  CHECK(det_poly(f, alpha, 0.3, 1.7, 0) == 1.0);
  CHECK(det_poly(f, alpha, 0.3, 1.7, 1) == testutil::margin(1.7 - f.evaluate(0.3), 1e-14));

  // k=2 at E=0, theta=0: (0 - f(0)) * (0 - f(alpha)) - 1, frozen value.
  double expect = (0.0 - f.evaluate(0.0)) * (0.0 - f.evaluate(alpha)) - 1.0;
  CHECK(expect == testutil::margin(-3.9494755, 1e-6));
  CHECK(det_poly(f, alpha, 0.0, 0.0, 2) == testutil::margin(expect, 1e-12));
}

TEST_CASE("truncated evaluation keeps the modulus on the circle") {
  // A cosine potential truncates exactly, so the truncated modulus must match
  // the plain recurrence value.
  auto f = AnalyticPotential::almost_mathieu(1.5);
  double alpha = ContinuedFraction::golden().value();
  for (int k : {2, 5, 9}) {
    auto fk = truncate(f, k);
    for (double theta : {0.0, 0.17, 0.62}) {
      auto ev = truncated_det_eval(fk, alpha, theta, 0.7);
      double plain = det_poly(f, alpha, theta, 0.7, k);
      CHECK(std::fabs(std::exp(ev.log_abs) - std::fabs(plain)) <=
            1e-9 * std::max(1.0, std::fabs(plain)));
    }
  }
}

TEST_CASE("polynomial values on the circle carry the phase prefactor") {
  auto f = AnalyticPotential::almost_mathieu(1.5);
  double alpha = ContinuedFraction::golden().value();
  const int k = 3;
  double theta = 0.23;
  std::complex<double> z = std::polar(1.0, kTwoPi * theta);
  std::complex<double> val = truncated_det_poly(f, alpha, z, 0.7, k);
  auto ev = truncated_det_eval(truncate(f, k), alpha, theta, 0.7);
  CHECK(std::fabs(std::log(std::abs(val)) - ev.log_abs) <= 1e-10);

  // value = z^{k^3} * (real number): rotating by z^{-k^3} lands on the real axis.
  std::complex<double> zk = std::polar(1.0, kTwoPi * mod1((double)k * k * k * theta));
  std::complex<double> rotated = val / zk;
  CHECK(std::fabs(rotated.imag()) <= 1e-9 * std::abs(val));

  CHECK_THROWS_AS(truncated_det_poly(f, alpha, std::complex<double>(1.1, 0.0), 0.7, k),
                  std::domain_error);
}

TEST_CASE("free polynomial values cycle with period four") {
  auto f = AnalyticPotential::zero();
  // At E=0 the sequence is 1, 0, -1, 0, 1, ...
  const double want[8] = {1, 0, -1, 0, 1, 0, -1, 0};
  for (int k = 0; k < 8; ++k)
    CHECK(det_poly(f, 0.33, 0.1, 0.0, k) == testutil::margin(want[k], 1e-14));
}

TEST_CASE("growth ceiling bounds circle values") {
  auto f = AnalyticPotential::almost_mathieu(2.0);
  double alpha = ContinuedFraction::golden().value();
  const int k = 50;
  double ceiling = growth_ceiling(f, 1.3) * k;
  auto fk = truncate(f, k);
  for (int i = 0; i < 64; ++i) {
    auto ev = truncated_det_eval(fk, alpha, i / 64.0, 1.3);
    CHECK(ev.log_abs <= ceiling);
  }
}

TEST_CASE("truncation error companion stays small for fast decay") {
  auto g = [] {
    std::vector<std::complex<double>> c;
    for (int j = 0; j <= 20; ++j) c.push_back(std::cyl_bessel_i(j, 1.0));
    return AnalyticPotential::from_coefficients(c, 1.0, false, 1.6);
  }();
  double alpha = ContinuedFraction::golden().value();
  auto fk = truncate(g, 4);
  auto pair = truncated_det_pair(fk, alpha, 0.2, 0.9);
  CHECK(pair.err >= 0.0);
  CHECK(!pair.truncation_warning);

  // The free potential truncates exactly, so the companion is identically 0.
  auto zk = truncate(AnalyticPotential::zero(), 5);
  auto zp = truncated_det_pair(zk, alpha, 0.2, 0.9);
  CHECK(zp.err == 0.0);
}
