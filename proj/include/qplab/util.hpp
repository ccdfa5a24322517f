#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace qplab {

inline constexpr double kTwoPi = 6.28318530717958647692528676655900577;

/// x reduced to [0,1).  Exact for inputs that are representable sums of an
/// integer and a fraction; the guard handles the x = -eps rounding case.
inline double mod1(double x) {
  double r = x - std::floor(x);
  return (r >= 1.0) ? r - 1.0 : r;
}

/// a*d - b*c evaluated with Kahan's fma trick: full relative accuracy even
/// under heavy cancellation.
inline double det2x2(double a, double b, double c, double d) {
  double w = b * c;
  double e = std::fma(b, c, -w);
  double f = std::fma(a, d, -w);
  return f - e;
}

/// Same, in extended precision (used for determinant-drift checks on heavily
/// rescaled products, where the mantissa determinant sits far below 1).
inline long double det2x2l(double a, double b, double c, double d) {
  long double w = (long double)b * (long double)c;
  long double e = std::fmal((long double)b, (long double)c, -w);
  long double f = std::fmal((long double)a, (long double)d, -w);
  return f - e;
}

/// Thrown when an adaptive numerical procedure exhausts its refinement budget;
/// carries the bound that was actually achieved so callers can report it.
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what,
                         double achieved = std::numeric_limits<double>::quiet_NaN())
      : std::runtime_error(what), achieved_bound(achieved) {}
  double achieved_bound;
};

inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

/// Runs fn(i) for i in [0,n).  Work is distributed over threads but every
/// index writes only its own slot, so results are reduced by the caller in
/// index order and output never depends on the thread count.
inline void parallel_fill(std::size_t n, int threads,
                          const std::function<void(std::size_t)>& fn) {
  int t = resolve_threads(threads);
  if (t <= 1 || n < 64) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(t));
  std::size_t chunk = (n + static_cast<std::size_t>(t) - 1) / static_cast<std::size_t>(t);
  for (int w = 0; w < t; ++w) {
    std::size_t lo = static_cast<std::size_t>(w) * chunk;
    std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn]() {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace qplab
