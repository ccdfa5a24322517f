#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qplab/bands.hpp"
#include "qplab/lyapunov.hpp"
#include "qplab/potential.hpp"
#include "qplab/rationals.hpp"

namespace qplab {

/**
 * Large-value search: scan m = 0..window-1 for
 * |P_k(e^{2 pi i (theta + m alpha)}, E)| >= e^{(gamma - eps_prime) k}.
 * Absence of a hit inside the window is a valid (reported) outcome, not an
 * error.  The maximum achieved value over the scanned range is always
 * recorded.
 */
struct Lemma1Report {
  int k = 0;
  double eps_prime = 0.0;
  double gamma = 0.0;
  double window_constant = 0.0;  // window = ceil(C * k^3)
  std::int64_t window = 0;
  double threshold_log = 0.0;    // (gamma - eps_prime) * k
  std::optional<std::int64_t> found_m;
  double max_log_abs = 0.0;      // best log|P_k| over the scanned prefix
  std::int64_t scanned = 0;
  bool truncation_warning = false;
  std::string omega_label;       // "certified(B=...)" or "inspected-horizon-only"
  std::string to_json_text() const;
};

Lemma1Report lemma1_search(const AnalyticPotential& f, const ContinuedFraction& alpha,
                           double theta, double E, int k, double eps_prime,
                           std::int64_t window, double gamma);

/// Sweep k = k_lo..k_hi with window ceil(C k^3); C is fitted by doubling from
/// c_start until every consecutive triple of k values contains a success (or
/// the cap is hit), then frozen for the reported sweep.
struct Lemma1Sweep {
  double fitted_constant = 0.0;
  bool triple_property = false;
  int k_lo = 0, k_hi = 0;
  double success_frequency = 0.0;
  std::vector<Lemma1Report> reports;
  std::string to_json_text() const;
};
Lemma1Sweep lemma1_sweep(const AnalyticPotential& f, const ContinuedFraction& alpha,
                         double theta, double E, int k_lo, int k_hi,
                         double eps_prime, double gamma, double c_start = 4.0,
                         double c_cap = 512.0, int threads = 0);

/// Sup of |P_k| over a z-grid on the unit circle (>= 8k^2 points) versus the
/// ceiling e^{(gamma + eps) k}; grid-doubling stability is enforced and
/// reported.  Values are carried in logs (the sup overflows doubles long
/// before k = 200).
struct Lemma2Report {
  int k = 0;
  double eps = 0.0;
  double gamma = 0.0;
  int z_grid = 0;
  double sup_log = 0.0;        // log max |P_k| (finer grid)
  double threshold_log = 0.0;  // (gamma + eps) * k
  bool pass = false;
  double doubling_diff = 0.0;  // |log sup(2G) - log sup(G)|
  bool stable = false;         // doubling_diff within 2%
  bool truncation_warning = false;
  std::string to_json_text() const;
};
Lemma2Report lemma2_sup(const AnalyticPotential& f, double alpha, double E,
                        int k, double eps, int z_grid, double gamma,
                        int threads = 0);

/// Band-measure convergence along the convergents of alpha.  residual is
/// measure - 4|1 - |lambda|| for the 2 lambda cos family, absent otherwise.
struct ConvergenceRow {
  int n = 0;
  std::int64_t p = 0, q = 1;
  double measure = 0.0;
  std::optional<double> residual;
  std::string error;  // non-empty if this row's band computation failed
};
struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  std::string to_csv() const;  // header "n,p,q,measure,residual"
  std::string to_json_text() const;
};
ConvergenceTable measure_convergence(const AnalyticPotential& f,
                                     const ContinuedFraction& alpha, int depth,
                                     double tol = 1e-9, int threads = 0);

/// One-sided deviation of S(p_n/q_n) from S(p_{n+1}/q_{n+1}) (endpoints of the
/// coarser set against the finer set, matching the direction "for any E in
/// S(alpha) find E' in S(alpha')"), with the bound shapes evaluated at
/// d_alpha = 1/(q_n q_{n+1}).
struct ContinuityReport {
  int n = 0;
  std::int64_t p1 = 0, q1 = 1, p2 = 0, q2 = 1;
  double d_alpha = 0.0;
  double deviation = 0.0;
  double shape_log3 = 0.0;    // d_alpha |ln d_alpha|^3
  double shape_log1 = 0.0;    // d_alpha |ln d_alpha|
  double shape_holder = 0.0;  // d_alpha^{1/2}
  bool resolution_limited = false;  // tol >= deviation/10
  std::string to_json_text() const;
};
ContinuityReport continuity_probe(const AnalyticPotential& f,
                                  const ContinuedFraction& alpha, int n,
                                  double tol = 1e-9, int threads = 0);

/// Least-squares and enclosing constants for d <= c * shape(d_alpha) across a
/// sweep of convergent pairs; the free exponent fit needs >= 4 pairs.
struct ContinuityFit {
  int pairs = 0;
  double c_log3 = 0.0, c_log3_max = 0.0, residual_log3 = 0.0;
  double c_log1 = 0.0, c_log1_max = 0.0, residual_log1 = 0.0;
  double c_holder = 0.0, c_holder_max = 0.0, residual_holder = 0.0;
  std::optional<double> exponent;  // slope of log d vs log d_alpha
  std::vector<ContinuityReport> reports;
  std::string to_json_text() const;
};
ContinuityFit continuity_sweep(const AnalyticPotential& f,
                               const ContinuedFraction& alpha, int n_first,
                               int pairs, double tol = 1e-9, int threads = 0);

/// Right-hand side of the approximation inequality
///   |S(alpha)| < |S(p_n/q_n)| + 2 c q_n |d_alpha ln^3|d_alpha|| + delta,
/// plus the constructive variant measure(inflate(S, c|d_alpha ln^3 d_alpha|)) + delta.
struct UpperBoundReport {
  int n = 0;
  std::int64_t p = 0, q = 1;
  double c = 1.0, delta = 0.0;
  double measure = 0.0;
  double d_alpha = 0.0;        // signed alpha - p_n/q_n
  double radius = 0.0;         // c |d_alpha| |ln|d_alpha||^3
  double second_addend = 0.0;  // 2 c q_n |d_alpha| |ln|d_alpha||^3
  double rhs = 0.0;
  double constructive = 0.0;
  std::string to_json_text() const;
};
UpperBoundReport spectrum_upper_bound(const AnalyticPotential& f,
                                      const ContinuedFraction& alpha, int n,
                                      double c, double delta, double tol = 1e-9,
                                      int threads = 0);

}  // namespace qplab
