#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qplab/potential.hpp"
#include "qplab/rationals.hpp"

namespace qplab {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
};

/**
 * Finite union of disjoint closed intervals, kept sorted; touching or
 * overlapping intervals are merged on construction.  A merge_gap > 0 also
 * swallows gaps up to that size (used by the spectrum assemblers to absorb
 * gaps below resolution), recording them as unresolved.
 */
class BandSet {
 public:
  BandSet() = default;
  static BandSet from_intervals(std::vector<Interval> iv, double merge_gap = 0.0,
                                std::vector<double>* unresolved_gaps = nullptr);

  const std::vector<Interval>& intervals() const { return iv_; }
  std::size_t count() const { return iv_.size(); }
  bool empty() const { return iv_.empty(); }

  double measure() const;
  BandSet inflate(double r) const;
  BandSet intersect(const BandSet& o) const;
  BandSet reflect() const;  // E -> -E

  /// min_{y in this} |x - y|; +inf for an empty set.
  double distance_to(double x) const;

  /// sup_{x in A} dist(x, B), exact for interval unions (candidates: endpoints
  /// of A plus B-gap midpoints falling inside A).
  static double one_sided_deviation(const BandSet& a, const BandSet& b);
  /// max over endpoints of A of dist(., B).
  static double endpoint_deviation(const BandSet& a, const BandSet& b);
  static double hausdorff_distance(const BandSet& a, const BandSet& b);

  double symmetric_difference_measure(const BandSet& o) const;
  /// Every interval of `other` covered by this set inflated by slack.
  bool contains(const BandSet& other, double slack) const;

 private:
  std::vector<Interval> iv_;
};

/// Trace of the q-step transfer product at rational frequency p/q (lattice
/// points computed exactly via integer arithmetic mod q).
double trace_at(const AnalyticPotential& f, std::int64_t p, std::int64_t q,
                double theta, double E);

struct DiscriminantProbe {
  std::int64_t p = 0, q = 1;
  double E = 0.0;
  double theta = 0.0;
  double trace = 0.0;
};

struct SpectrumDiagnostics {
  int grid_nodes = 0;        // final E-grid density used for bracketing
  int refinements = 0;
  std::vector<double> unresolved_gaps;  // gap sizes merged below resolution
  int theta_samples = 0;     // envelope path only
  double envelope_bound = 0.0;  // conservative Lipschitz-based envelope error
  bool chambers_path = false;
  double chambers_spread = 0.0;  // validation residual (theta-independence)
};

/// {E : |tr T_q(theta, E)| <= 2} within the a-priori window
/// [-2 - sup|f|, 2 + sup|f|].  Sign-change bracketing on an adaptive grid
/// (>= 16q nodes) + bisection to tol; gaps below 2*tol are merged and
/// reported in diagnostics.
BandSet fixed_theta_spectrum(const AnalyticPotential& f, std::int64_t p,
                             std::int64_t q, double theta, double tol = 1e-9,
                             SpectrumDiagnostics* diag = nullptr,
                             int threads = 0);

/// Union over theta of the fixed-theta spectra.  For the 2 lambda cos family
/// this uses the theta-independent combination tr T_q(theta,E) +
/// 2 lambda^q cos(2 pi q theta) (validated at runtime, not assumed):
/// S = {E : |combination| <= 2 + 2|lambda|^q}.  Other potentials go through a
/// theta-grid min/max envelope with doubling refinement.
BandSet union_spectrum(const AnalyticPotential& f, std::int64_t p,
                       std::int64_t q, double tol = 1e-9,
                       SpectrumDiagnostics* diag = nullptr, int threads = 0);

/// Forced theta-grid envelope path (cross-validation of the reduction above).
BandSet union_spectrum_envelope(const AnalyticPotential& f, std::int64_t p,
                                std::int64_t q, double tol = 1e-9,
                                SpectrumDiagnostics* diag = nullptr,
                                int threads = 0);

/// max - min over a theta grid of tr T_q + 2 lambda^q cos(2 pi q theta);
/// ~0 exactly when the reduction is valid.  Returns the spread and the scale
/// (largest |tr T_q| seen -- the conditioning of the cancellation, so the
/// relative gate spread <= 1e-8 (1 + scale) is meaningful even mid-band where
/// the combination itself is O(1) but the traces are lambda^q sized).
struct ChambersCheck {
  double spread = 0.0;
  double scale = 1.0;
};
ChambersCheck chambers_spread(double lambda, std::int64_t p, std::int64_t q,
                              double E, int theta_grid = 64);

/// Text record "p q theta_tag a b" per band; theta_tag is a number or "union".
std::string band_records(const BandSet& bs, std::int64_t p, std::int64_t q,
                         const std::string& theta_tag);

}  // namespace qplab
