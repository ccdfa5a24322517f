#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qplab {

/**
 * Real-analytic 1-periodic sampling function f(theta) = sum_j c_j e^{2 pi i j theta}
 * held as its Fourier coefficients.  Reality is built in: only the j >= 0 half
 * is stored and the j < 0 half is the conjugate mirror.  A decay envelope
 * |c_j| <= A e^{-c|j|} is recorded alongside; for objects that stand for a
 * genuinely infinite series (finite_series() == false) the envelope also
 * certifies the neglected tail beyond the stored cutoff, and that tail is
 * charged to sup_bound().
 */
class AnalyticPotential {
 public:
  /// coeffs[j] is the coefficient of e^{2 pi i j theta} for j = 0..J.
  /// The envelope amplitude defaults to the smallest A that dominates the
  /// stored coefficients at the given rate; passing one explicitly validates it.
  static AnalyticPotential from_coefficients(
      std::vector<std::complex<double>> coeffs, double decay_rate = 1.0,
      bool finite_series = true,
      std::optional<double> envelope_amplitude = std::nullopt);

  /// f(theta) = 2 lambda cos(2 pi theta); sup_bound exactly 2|lambda|.
  static AnalyticPotential almost_mathieu(double lambda);
  static AnalyticPotential zero();

  static AnalyticPotential from_json_text(const std::string& text);
  static AnalyticPotential load_file(const std::string& path);
  std::string to_json_text() const;

  /// Real value at theta (theta reduced mod 1 first; real cosine form, exact
  /// reality).
  double evaluate(double theta) const;
  /// Two-sided complex sum, for reality-residue checks.
  std::complex<double> evaluate_complex(double theta) const;

  double sup_bound() const { return sup_bound_; }
  double derivative_sup_bound() const;
  double decay_rate() const { return decay_rate_; }
  double envelope_amplitude() const { return envelope_amplitude_; }
  int max_index() const { return static_cast<int>(coeffs_.size()) - 1; }
  bool finite_series() const { return finite_; }
  const std::vector<std::complex<double>>& half_coefficients() const { return coeffs_; }
  const std::string& name() const { return name_; }
  void set_name(std::string n) { name_ = std::move(n); }

  /// Closed-form envelope tail sum_{|j| > m} A e^{-c|j|}.
  double envelope_tail(int m) const;

  /// lambda if this is exactly the 2*lambda*cos(2 pi theta) family (including
  /// lambda = 0 for the zero potential), otherwise nullopt.
  std::optional<double> am_lambda() const;

 private:
  std::vector<std::complex<double>> coeffs_;  // j = 0..J
  double decay_rate_ = 1.0;
  double envelope_amplitude_ = 0.0;
  double sup_bound_ = 0.0;
  bool finite_ = true;
  std::string name_;
};

/// f with the Fourier series cut at |j| <= k^2, plus a certified bound on what
/// was dropped (computed in closed form from the envelope, so it also covers
/// the never-stored tail of an infinite series).
class TruncatedPotential {
 public:
  TruncatedPotential(const AnalyticPotential& base, int k);

  double evaluate(double theta) const { return series_.evaluate(theta); }
  int k() const { return k_; }
  int cutoff() const;  // k^2
  double tail_bound() const { return tail_bound_; }
  const AnalyticPotential& series() const { return series_; }

 private:
  AnalyticPotential series_;
  int k_;
  double tail_bound_;
};

TruncatedPotential truncate(const AnalyticPotential& f, int k);

}  // namespace qplab
