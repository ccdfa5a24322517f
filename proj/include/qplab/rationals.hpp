#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qplab {

/// Reduced fraction p/q, q >= 1.
struct Rational {
  std::int64_t p = 0;
  std::int64_t q = 1;

  static Rational reduced(std::int64_t p, std::int64_t q);
  double value() const { return static_cast<double>(p) / static_cast<double>(q); }
};

/**
 * Continued-fraction expansion x = [0; a_1, a_2, ...] of a value in (0,1).
 *
 * Instances come from three sources:
 *  - from_value: Gauss-map expansion of a double.  Digits stop either when the
 *    remainder drops below `termination_eps` (the value is declared rational,
 *    `terminated() == true`) or when the denominators pass the precision
 *    horizon q_n^2 > 1/machine-eps, in which case the expansion is truncated
 *    and `precision_limited()` is set instead of emitting garbage digits.
 *  - from_coefficients(list): the exact finite expansion of a rational.
 *  - from_coefficients(list, repeating=true) and the named constructors
 *    golden()/silver(): an eventually-periodic (quadratic irrational) pattern;
 *    these carry a certified coefficient bound, used by the bounded-type
 *    reporting downstream.
 */
class ContinuedFraction {
 public:
  static ContinuedFraction from_value(double x, int max_terms = 64,
                                      double termination_eps = 1e-12);
  static ContinuedFraction from_coefficients(std::vector<std::int64_t> a,
                                             bool repeating = false);
  static ContinuedFraction golden(int terms = 120);  // [0;1,1,1,...]
  static ContinuedFraction silver(int terms = 120);  // [0;2,2,2,...] = sqrt(2)-1

  double value() const { return value_; }
  const std::vector<std::int64_t>& coefficients() const { return a_; }
  int available_terms() const { return static_cast<int>(a_.size()); }
  bool terminated() const { return terminated_; }
  bool precision_limited() const { return precision_limited_; }
  /// Set when the coefficient sequence is known in full (periodic pattern):
  /// a certified bound B(alpha) on all coefficients.
  std::optional<std::int64_t> certified_bound() const { return certified_bound_; }

 private:
  std::vector<std::int64_t> a_;
  double value_ = 0.0;
  bool terminated_ = false;
  bool precision_limited_ = false;
  std::optional<std::int64_t> certified_bound_;
};

struct Convergent {
  int n = 0;  // 1-based index: p_1/q_1 = 1/a_1
  std::int64_t p = 0;
  std::int64_t q = 1;
  double value() const { return static_cast<double>(p) / static_cast<double>(q); }
};

/// First `depth` convergents p_n/q_n (64-bit, explicit overflow error).
std::vector<Convergent> convergents(const ContinuedFraction& cf, int depth);
Convergent convergent_at(const ContinuedFraction& cf, int n);

/// Signed gap alpha - p_n/q_n, computed from the continued-fraction tail
/// (high relative accuracy even when the gap is ~1e-10).
double approximation_gap(const ContinuedFraction& cf, int n);

/// Maximum nearest-neighbour gap (on the circle) of {theta + j*alpha mod 1,
/// j = 0..q-1}.
double orbit_gap(double theta, double alpha, std::int64_t q);

struct BoundedTypeReport {
  int horizon = 0;          // requested number of coefficients
  int inspected = 0;        // actually available and inspected
  std::int64_t bound = 0;   // max over inspected coefficients, exact
  bool bounded_so_far = false;  // full horizon inspected, no precision cut
  bool certified = false;       // pattern source: bound holds for the whole sequence
};
BoundedTypeReport bounded_type_report(const ContinuedFraction& cf, int horizon);

}  // namespace qplab
