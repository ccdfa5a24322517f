#pragma once

#include <string>
#include <vector>

#include "qplab/potential.hpp"

namespace qplab {

struct ScheduleEntry {
  int n = 0;            // cocycle length (or polynomial depth for mu_k)
  int theta_grid = 0;
  double average = 0.0; // (1/n) * grid average of the log quantity
};

/**
 * Subadditive estimate of the Lyapunov exponent.  gamma is the minimum over
 * the schedule of per-n averages (each average over-estimates the limit, so
 * the minimum is the best certified value at this budget).  method is
 * "norm-average" (Frobenius norm of the n-step product) or "mu_k" (max of the
 * four determinant-polynomial moduli).
 */
struct LyapunovEstimate {
  double alpha = 0.0;
  double energy = 0.0;
  double gamma = 0.0;
  std::string method;          // "norm-average" | "mu_k"
  std::string norm = "frobenius";
  std::vector<ScheduleEntry> schedule;
  double uncertainty = 0.0;    // last-step spread + grid-doubling jitter
  double grid_jitter = 0.0;
  std::vector<std::string> flags;

  std::string to_json_text() const;
};

inline const std::vector<int>& default_schedule() {
  static const std::vector<int> s = {50, 100, 200, 500, 1000, 2000};
  return s;
}

/// (1/n) * average over a midpoint theta grid of log ||T_n(theta, E)||_F,
/// minimised over the schedule.  Monotone violations beyond the statistical
/// jitter 3/sqrt(theta_grid) are flagged, never silently clipped.
LyapunovEstimate gamma_norm_average(const AnalyticPotential& f, double alpha,
                                    double E,
                                    const std::vector<int>& n_schedule = default_schedule(),
                                    int theta_grid = 256, int threads = 0);

/// (1/k) * theta-grid average of log mu_k, where mu_k(theta) is the max of
/// |P_k(theta)|, |P_{k-1}(theta)|, |P_{k-1}(theta+alpha)|, |P_{k-2}(theta+alpha)|
/// for the truncated determinant polynomials.  Grid points where all four
/// vanish are dropped and flagged via the estimate variant below.
double gamma_mu(const AnalyticPotential& f, double alpha, double E, int k,
                int theta_grid = 256, int threads = 0);

LyapunovEstimate gamma_mu_estimate(const AnalyticPotential& f, double alpha,
                                   double E, const std::vector<int>& k_schedule,
                                   int theta_grid = 256, int threads = 0);

}  // namespace qplab
