#include "qplab/cocycle.hpp"

#include <cmath>

namespace qplab {

DetPair truncated_det_pair(const TruncatedPotential& fk, double alpha,
                           double theta, double E) {
  return detail::det_pair_impl(fk, alpha, theta, E, fk.k(), fk.tail_bound());
}

PolyEval truncated_det_eval(const TruncatedPotential& fk, double alpha,
                            double theta, double E) {
  DetPair pair = truncated_det_pair(fk, alpha, theta, E);
  PolyEval out;
  out.log_abs = pair.pk.log_abs();
  out.truncation_warning = pair.truncation_warning;
  out.err_log = pair.err_log();
  if (pair.pk.sign() == 0) {
    out.phase = {0.0, 0.0};
    return out;
  }
  // The block determinant is a trig polynomial of degree k^3 in theta; the
  // polynomial-in-z normalisation carries the prefactor z^{k^3}, so the phase
  // of the normalised value at z = e^{2 pi i theta} is e^{2 pi i k^3 theta}
  // times the sign of the (real) determinant.
  double k3 = static_cast<double>(fk.k()) * fk.k() * fk.k();
  double w = kTwoPi * mod1(k3 * mod1(theta));
  std::complex<double> ph{std::cos(w), std::sin(w)};
  out.phase = (pair.pk.sign() > 0) ? ph : -ph;
  return out;
}

std::complex<double> truncated_det_poly(const AnalyticPotential& f, double alpha,
                                        std::complex<double> z, double E, int k) {
  double r = std::abs(z);
  if (std::abs(r - 1.0) > 1e-12)
    throw std::domain_error("truncated_det_poly: z must lie on the unit circle");
  double theta = mod1(std::arg(z) / kTwoPi);
  TruncatedPotential fk = truncate(f, k);
  PolyEval ev = truncated_det_eval(fk, alpha, theta, E);
  if (ev.phase == std::complex<double>(0.0, 0.0)) return {0.0, 0.0};
  double mag = (ev.log_abs > std::log(kSaturate)) ? kSaturate : std::exp(ev.log_abs);
  return mag * ev.phase;
}

}  // namespace qplab
