#include "qplab/rationals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "qplab/util.hpp"

namespace qplab {

namespace {

// Denominator horizon beyond which double digits are no longer trustworthy:
// the Gauss-map remainder has absolute error ~eps, and the remainder itself
// is ~1/(q_n q_{n+1}), so digits stop being meaningful once q_n^2 ~ 1/eps.
const double kPrecisionHorizonQ = std::sqrt(1.0 / std::numeric_limits<double>::epsilon());

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r))
    throw std::overflow_error("continued-fraction convergent overflows 64-bit");
  return r;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r))
    throw std::overflow_error("continued-fraction convergent overflows 64-bit");
  return r;
}

// Backward evaluation of [0; a_lo, ..., a_hi] with tail value `tail`
// (tail = 0 for a finite expansion; tail = x_{m} >= 1 truncates the rest).
double backward_value(const std::vector<std::int64_t>& a, std::size_t lo,
                      std::size_t hi, double tail) {
  double v = tail;
  for (std::size_t i = hi; i-- > lo;) {
    v = 1.0 / (static_cast<double>(a[i]) + v);
  }
  return v;
}

// Tail value x_{m+1} = [a_{m+1}; a_{m+2}, ...] >= 1 evaluated from the stored
// digits (0-based index m points at a_{m+1}).
double tail_value(const std::vector<std::int64_t>& a, std::size_t m) {
  double t = static_cast<double>(a.back());
  for (std::size_t i = a.size() - 1; i-- > m;) {
    t = static_cast<double>(a[i]) + 1.0 / t;
  }
  return t;
}

}  // namespace

Rational Rational::reduced(std::int64_t p, std::int64_t q) {
  if (q == 0) throw std::invalid_argument("rational: zero denominator");
  if (q < 0) { p = -p; q = -q; }
  std::int64_t g = std::gcd(p < 0 ? -p : p, q);
  if (g > 1) { p /= g; q /= g; }
  return {p, q};
}

ContinuedFraction ContinuedFraction::from_value(double x, int max_terms,
                                                double termination_eps) {
  if (!(x > 0.0) || !(x < 1.0))
    throw std::invalid_argument("continued fraction: value must lie in (0,1)");
  if (max_terms < 1) throw std::invalid_argument("continued fraction: max_terms < 1");

  ContinuedFraction cf;
  cf.value_ = x;
  double r = x;
  std::int64_t q_prev = 0, q_cur = 1;  // q_{n-1}, q_n
  for (int n = 0; n < max_terms; ++n) {
    double y = 1.0 / r;
    double af = std::floor(y);
    double frac = y - af;
    // A remainder this close to the next integer is a rounding artefact of a
    // rational input (e.g. 3/7 -> [2; 2.999...]); round up and terminate.
    if (frac > 1.0 - termination_eps) {
      af += 1.0;
      frac = 0.0;
    }
    std::int64_t a = static_cast<std::int64_t>(af);
    cf.a_.push_back(a);
    std::int64_t q_next = checked_add(checked_mul(a, q_cur), q_prev);
    q_prev = q_cur;
    q_cur = q_next;
    if (frac < termination_eps) {
      cf.terminated_ = true;
      break;
    }
    if (static_cast<double>(q_cur) > kPrecisionHorizonQ) {
      cf.precision_limited_ = true;
      break;
    }
    r = frac;
  }
  return cf;
}

ContinuedFraction ContinuedFraction::from_coefficients(std::vector<std::int64_t> a,
                                                       bool repeating) {
  if (a.empty())
    throw std::invalid_argument("continued fraction: empty coefficient list");
  for (std::int64_t ai : a) {
    if (ai < 1)
      throw std::invalid_argument("continued fraction: coefficients must be >= 1");
  }
  ContinuedFraction cf;
  if (!repeating) {
    cf.a_ = std::move(a);
    cf.terminated_ = true;
    cf.value_ = backward_value(cf.a_, 0, cf.a_.size(), 0.0);
    return cf;
  }
  // Unroll the pattern far enough that truncating the tail is far below
  // double resolution (q_n grows at least like Fibonacci; 120 terms is ample).
  const std::size_t unrolled = std::max<std::size_t>(120, a.size() * 4);
  cf.a_.reserve(unrolled);
  while (cf.a_.size() < unrolled) {
    for (std::int64_t ai : a) cf.a_.push_back(ai);
  }
  cf.certified_bound_ = *std::max_element(a.begin(), a.end());
  cf.value_ = backward_value(cf.a_, 0, cf.a_.size(), 0.0);
  return cf;
}

ContinuedFraction ContinuedFraction::golden(int terms) {
  if (terms < 1) throw std::invalid_argument("golden: terms < 1");
  ContinuedFraction cf = from_coefficients({1}, true);
  cf.a_.assign(static_cast<std::size_t>(terms), 1);
  cf.value_ = backward_value(cf.a_, 0, cf.a_.size(), 0.0);
  return cf;
}

ContinuedFraction ContinuedFraction::silver(int terms) {
  if (terms < 1) throw std::invalid_argument("silver: terms < 1");
  ContinuedFraction cf = from_coefficients({2}, true);
  cf.a_.assign(static_cast<std::size_t>(terms), 2);
  cf.value_ = backward_value(cf.a_, 0, cf.a_.size(), 0.0);
  return cf;
}

std::vector<Convergent> convergents(const ContinuedFraction& cf, int depth) {
  if (depth < 1) throw std::out_of_range("convergents: depth < 1");
  if (depth > cf.available_terms())
    throw std::out_of_range("convergents: depth exceeds available terms");
  std::vector<Convergent> out;
  out.reserve(static_cast<std::size_t>(depth));
  std::int64_t p_prev = 1, p_cur = 0;  // p_{-1}, p_0
  std::int64_t q_prev = 0, q_cur = 1;  // q_{-1}, q_0
  const auto& a = cf.coefficients();
  for (int n = 1; n <= depth; ++n) {
    std::int64_t an = a[static_cast<std::size_t>(n - 1)];
    std::int64_t p_next = checked_add(checked_mul(an, p_cur), p_prev);
    std::int64_t q_next = checked_add(checked_mul(an, q_cur), q_prev);
    p_prev = p_cur; p_cur = p_next;
    q_prev = q_cur; q_cur = q_next;
    out.push_back({n, p_cur, q_cur});
  }
  return out;
}

Convergent convergent_at(const ContinuedFraction& cf, int n) {
  auto all = convergents(cf, n);
  return all.back();
}

double approximation_gap(const ContinuedFraction& cf, int n) {
  if (n < 1) throw std::out_of_range("approximation_gap: n < 1");
  if (n > cf.available_terms())
    throw std::out_of_range("approximation_gap: n exceeds available terms");
  // alpha - p_n/q_n = (-1)^n / (q_n (x_{n+1} q_n + q_{n-1})), with x_{n+1} the
  // exact value of the tail.  Computed this way the gap keeps full relative
  // accuracy even at ~1e-10 where the direct difference has cancelled to noise.
  std::int64_t q_prev = 0, q_cur = 1;
  const auto& a = cf.coefficients();
  for (int m = 1; m <= n; ++m) {
    std::int64_t am = a[static_cast<std::size_t>(m - 1)];
    std::int64_t q_next = checked_add(checked_mul(am, q_cur), q_prev);
    q_prev = q_cur;
    q_cur = q_next;
  }
  if (n == cf.available_terms()) {
    // Finite expansion ends exactly here: p_n/q_n is alpha.
    if (cf.terminated()) return 0.0;
    throw std::out_of_range("approximation_gap: tail not available at this depth");
  }
  double x_tail = tail_value(cf.coefficients(), static_cast<std::size_t>(n));
  double denom = static_cast<double>(q_cur) *
                 (x_tail * static_cast<double>(q_cur) + static_cast<double>(q_prev));
  double gap = 1.0 / denom;
  return (n % 2 == 0) ? gap : -gap;
}

double orbit_gap(double theta, double alpha, std::int64_t q) {
  if (q < 1) throw std::invalid_argument("orbit_gap: q must be >= 1");
  if (q == 1) return 1.0;
  std::vector<double> pts;
  pts.reserve(static_cast<std::size_t>(q));
  for (std::int64_t j = 0; j < q; ++j) {
    pts.push_back(mod1(theta + static_cast<double>(j) * alpha));
  }
  std::sort(pts.begin(), pts.end());
  double gap = 1.0 - pts.back() + pts.front();  // wrap-around gap
  for (std::size_t i = 1; i < pts.size(); ++i) {
    gap = std::max(gap, pts[i] - pts[i - 1]);
  }
  return gap;
}

BoundedTypeReport bounded_type_report(const ContinuedFraction& cf, int horizon) {
  if (horizon < 1) throw std::invalid_argument("bounded_type_report: horizon < 1");
  BoundedTypeReport r;
  r.horizon = horizon;
  r.inspected = std::min(horizon, cf.available_terms());
  const auto& a = cf.coefficients();
  for (int i = 0; i < r.inspected; ++i) {
    r.bound = std::max(r.bound, a[static_cast<std::size_t>(i)]);
  }
  r.certified = cf.certified_bound().has_value();
  if (r.certified) r.bound = std::max(r.bound, *cf.certified_bound());
  // "Bounded so far" means every digit up to the horizon was actually seen:
  // either the horizon fits inside the available digits, or the expansion
  // genuinely ended (rational) before the horizon.  A precision cut leaves the
  // rest unknown.
  r.bounded_so_far = (r.inspected == horizon) ||
                     (cf.terminated() && !cf.precision_limited());
  if (r.certified) r.bounded_so_far = true;
  return r;
}

}  // namespace qplab
