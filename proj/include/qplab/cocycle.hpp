#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qplab/potential.hpp"
#include "qplab/util.hpp"

namespace qplab {

// Running products are renormalised whenever the Frobenius norm passes this,
// with the log of the scale accumulated separately.
inline constexpr double kRescaleThreshold = 1e100;
inline constexpr double kSaturate = 1e300;

struct TransferMatrix {
  double a11 = 1.0, a12 = 0.0, a21 = 0.0, a22 = 1.0;

  double det() const { return det2x2(a11, a12, a21, a22); }
  double trace() const { return a11 + a22; }
  double frobenius() const {
    return std::sqrt(a11 * a11 + a12 * a12 + a21 * a21 + a22 * a22);
  }
  TransferMatrix operator*(const TransferMatrix& o) const {
    return {a11 * o.a11 + a12 * o.a21, a11 * o.a12 + a12 * o.a22,
            a21 * o.a11 + a22 * o.a21, a21 * o.a12 + a22 * o.a22};
  }
};

/// One cocycle step M_n(theta, E) = ((E - f(alpha n + theta), -1), (1, 0)).
template <class P>
TransferMatrix one_step(const P& f, double alpha, double theta, double E,
                        std::int64_t n) {
  double v = f.evaluate(std::fma(static_cast<double>(n), alpha, theta));
  return {E - v, -1.0, 1.0, 0.0};
}

/// Product of transfer matrices held as m * e^{log_scale}.  The true product
/// has determinant exactly 1; det_log_drift() measures the accumulated
/// floating-point departure of log|det| from 0 without over/underflowing.
struct ScaledTransfer {
  TransferMatrix m;
  double log_scale = 0.0;

  double log_frobenius() const { return log_scale + std::log(m.frobenius()); }

  /// Trace as a plain double, saturated to +-1e300 instead of overflowing.
  double trace() const {
    double t = m.trace();
    if (t == 0.0 || log_scale == 0.0) return t;
    double lt = log_scale + std::log(std::abs(t));
    if (lt > std::log(kSaturate)) return t > 0 ? kSaturate : -kSaturate;
    return std::exp(lt) * (t > 0 ? 1.0 : -1.0);
  }

  double entry(int r, int c) const {
    const double* e[2][2] = {{&m.a11, &m.a12}, {&m.a21, &m.a22}};
    double x = *e[r][c];
    if (x == 0.0 || log_scale == 0.0) return x;
    double lx = log_scale + std::log(std::abs(x));
    if (lx > std::log(kSaturate)) return x > 0 ? kSaturate : -kSaturate;
    return std::exp(lx) * (x > 0 ? 1.0 : -1.0);
  }

  double log_abs_entry(int r, int c) const {
    const double* e[2][2] = {{&m.a11, &m.a12}, {&m.a21, &m.a22}};
    double x = *e[r][c];
    if (x == 0.0) return -std::numeric_limits<double>::infinity();
    return log_scale + std::log(std::abs(x));
  }
  int sign_entry(int r, int c) const {
    const double* e[2][2] = {{&m.a11, &m.a12}, {&m.a21, &m.a22}};
    double x = *e[r][c];
    return (x > 0) - (x < 0);
  }

  /// log|det(true product)|; 0 up to rounding drift.  Extended precision keeps
  /// the mantissa determinant (~e^{-2 log_scale}) representable far beyond the
  /// double range.
  double det_log_drift() const {
    long double d = det2x2l(m.a11, m.a12, m.a21, m.a22);
    if (d == 0.0L) return -std::numeric_limits<double>::infinity();
    return static_cast<double>(std::log(std::abs(d))) + 2.0 * log_scale;
  }

  void maybe_rescale() {
    double norm = m.frobenius();
    if (norm > kRescaleThreshold) {
      m.a11 /= norm; m.a12 /= norm; m.a21 /= norm; m.a22 /= norm;
      log_scale += std::log(norm);
    }
  }
};

namespace detail {

// T <- M(v) * T with M(v) = ((E-v, -1), (1, 0)); same arithmetic as the
// determinant-polynomial recurrence, column-wise.
inline void advance(TransferMatrix& T, double E, double v) {
  double c = E - v;
  double n11 = c * T.a11 - T.a21;
  double n12 = c * T.a12 - T.a22;
  T.a21 = T.a11;
  T.a22 = T.a12;
  T.a11 = n11;
  T.a12 = n12;
}

}  // namespace detail

/// T_n = M_{n-1} ... M_1 M_0 with running rescaling.
template <class P>
ScaledTransfer n_step(const P& f, double alpha, double theta, double E,
                      std::int64_t n) {
  if (n < 0) throw std::domain_error("n_step: n must be nonnegative");
  ScaledTransfer T;
  for (std::int64_t i = 0; i < n; ++i) {
    double v = f.evaluate(std::fma(static_cast<double>(i), alpha, theta));
    detail::advance(T.m, E, v);
    T.maybe_rescale();
  }
  return T;
}

/// Product over a precomputed lattice of potential samples v[0..n-1]
/// (hot path for band computations: no trig in the inner loop).
inline ScaledTransfer product_over(const std::vector<double>& v, double E) {
  ScaledTransfer T;
  for (double vi : v) {
    detail::advance(T.m, E, vi);
    T.maybe_rescale();
  }
  return T;
}

/// Scalar value held as value * e^{log_scale}.
struct ScaledValue {
  double value = 0.0;
  double log_scale = 0.0;
  double log_abs() const {
    if (value == 0.0) return -std::numeric_limits<double>::infinity();
    return log_scale + std::log(std::abs(value));
  }
  int sign() const { return (value > 0) - (value < 0); }
  double saturated() const {
    if (value == 0.0 || log_scale == 0.0) return value;
    double lx = log_abs();
    if (lx > std::log(kSaturate)) return value > 0 ? kSaturate : -kSaturate;
    return std::exp(lx) * (value > 0 ? 1.0 : -1.0);
  }
};

/// Determinant polynomials (P_k, P_{k-1}) of the principal k x k block, from
/// the three-term recurrence P_k = (E - f(alpha(k-1)+theta)) P_{k-1} - P_{k-2},
/// P_0 = 1, P_1 = E - f(theta).  Jointly rescaled; when the potential carries a
/// truncation tolerance tau (see det_poly_pair overload below) a worst-case
/// propagated-error bound rides along in the same scale frame.
struct DetPair {
  int k = 0;
  ScaledValue pk;       // P_k
  ScaledValue pk_prev;  // P_{k-1}
  double err = 0.0;     // |P~_k - P_k| bound, same scale frame as pk
  bool truncation_warning = false;  // err > 10% of |P_k|
  double err_log() const {
    if (err <= 0.0) return -std::numeric_limits<double>::infinity();
    return pk.log_scale + std::log(err);
  }
};

namespace detail {

template <class P>
DetPair det_pair_impl(const P& f, double alpha, double theta, double E, int k,
                      double tau) {
  if (k < 0) throw std::domain_error("det_poly: k must be nonnegative");
  double pm = 0.0;   // P_{-1} convention
  double p = 1.0;    // P_0
  double L = 0.0;
  double err_m = 0.0, err = 0.0;  // error bounds for (P_{j-1}, P_j)
  for (int j = 1; j <= k; ++j) {
    double v = f.evaluate(std::fma(static_cast<double>(j - 1), alpha, theta));
    double c = E - v;
    double next = c * p - pm;
    double err_next = std::abs(c) * err + err_m + tau * (std::abs(p) + err);
    pm = p;
    p = next;
    err_m = err;
    err = err_next;
    double mag = std::max(std::abs(p), std::abs(pm));
    if (mag > kRescaleThreshold || (mag > 0.0 && mag < 1.0 / kRescaleThreshold)) {
      p /= mag; pm /= mag; err /= mag; err_m /= mag;
      L += std::log(mag);
    }
  }
  DetPair out;
  out.k = k;
  out.pk = {p, L};
  out.pk_prev = {pm, L};
  out.err = err;
  out.truncation_warning = (tau > 0.0) && (err > 0.1 * std::abs(p));
  return out;
}

}  // namespace detail

template <class P>
DetPair det_poly_pair(const P& f, double alpha, double theta, double E, int k) {
  return detail::det_pair_impl(f, alpha, theta, E, k, 0.0);
}

/// P_k as a plain double (saturated on overflow).
template <class P>
double det_poly(const P& f, double alpha, double theta, double E, int k) {
  return det_poly_pair(f, alpha, theta, E, k).pk.saturated();
}

/// Same recurrence with the series cut at |j| <= k^2; the propagated
/// truncation-error bound is tracked and flagged when it passes 10% of |P_k|.
DetPair truncated_det_pair(const TruncatedPotential& fk, double alpha,
                           double theta, double E);

/// z^{k^3} * det of the truncated block, for z on the unit circle
/// (|z| - 1 beyond 1e-12 is a domain error).  Plain complex return, saturated
/// on overflow; probes use truncated_det_eval for the log-domain value.
std::complex<double> truncated_det_poly(const AnalyticPotential& f, double alpha,
                                        std::complex<double> z, double E, int k);

struct PolyEval {
  double log_abs = 0.0;             // log |P_k(z)|
  std::complex<double> phase;       // unit-modulus phase of z^{k^3} P_k, 0 if value is 0
  bool truncation_warning = false;
  double err_log = 0.0;             // log of propagated truncation-error bound
};
PolyEval truncated_det_eval(const TruncatedPotential& fk, double alpha,
                            double theta, double E);

/// Growth ceiling exponent: |P_k| <= e^{D k} with D = ln(2 + sup|f| + |E|).
inline double growth_ceiling(const AnalyticPotential& f, double E) {
  return std::log(2.0 + f.sup_bound() + std::abs(E));
}

}  // namespace qplab
