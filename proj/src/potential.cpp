#include "qplab/potential.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "qplab/util.hpp"

namespace qplab {

namespace {

using ordered_json = nlohmann::ordered_json;

// Smallest A with |c_j| <= A e^{-c j} over the stored half.
double fitted_amplitude(const std::vector<std::complex<double>>& coeffs,
                        double decay_rate) {
  double A = 0.0;
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    A = std::max(A, std::abs(coeffs[j]) *
                        std::exp(decay_rate * static_cast<double>(j)));
  }
  return A;
}

}  // namespace

AnalyticPotential AnalyticPotential::from_coefficients(
    std::vector<std::complex<double>> coeffs, double decay_rate,
    bool finite_series, std::optional<double> envelope_amplitude) {
  if (coeffs.empty())
    throw std::invalid_argument("potential: needs at least the constant coefficient");
  if (!(decay_rate > 0.0))
    throw std::invalid_argument("potential: decay rate must be positive");
  if (std::abs(coeffs[0].imag()) > 0.0)
    throw std::invalid_argument("potential: constant coefficient must be real");

  AnalyticPotential f;
  f.coeffs_ = std::move(coeffs);
  f.decay_rate_ = decay_rate;
  f.finite_ = finite_series;
  if (envelope_amplitude) {
    if (!(*envelope_amplitude >= 0.0))
      throw std::invalid_argument("potential: envelope amplitude must be >= 0");
    // Validate the claimed envelope against every stored coefficient.
    for (std::size_t j = 0; j < f.coeffs_.size(); ++j) {
      double cap = *envelope_amplitude *
                   std::exp(-decay_rate * static_cast<double>(j));
      if (std::abs(f.coeffs_[j]) > cap * (1.0 + 1e-12) + 1e-300)
        throw std::invalid_argument(
            "potential: coefficient exceeds the declared decay envelope");
    }
    f.envelope_amplitude_ = *envelope_amplitude;
  } else {
    f.envelope_amplitude_ = fitted_amplitude(f.coeffs_, decay_rate);
  }

  // sup|f| <= |c_0| + 2 sum_{j>=1} |c_j|, plus the certified tail for a series
  // that continues past the stored cutoff.
  double s = std::abs(f.coeffs_[0].real());
  for (std::size_t j = 1; j < f.coeffs_.size(); ++j) s += 2.0 * std::abs(f.coeffs_[j]);
  if (!f.finite_) s += f.envelope_tail(f.max_index());
  f.sup_bound_ = s;
  return f;
}

AnalyticPotential AnalyticPotential::almost_mathieu(double lambda) {
  // 2 lambda cos(2 pi theta) = lambda e^{2 pi i theta} + lambda e^{-2 pi i theta}.
  AnalyticPotential f = from_coefficients({{0.0, 0.0}, {lambda, 0.0}});
  f.sup_bound_ = 2.0 * std::abs(lambda);  // exact, not via the generic sum
  f.name_ = "almost-mathieu";
  return f;
}

AnalyticPotential AnalyticPotential::zero() {
  AnalyticPotential f = from_coefficients({{0.0, 0.0}});
  f.name_ = "zero";
  return f;
}

double AnalyticPotential::evaluate(double theta) const {
  double t = mod1(theta);
  double acc = coeffs_[0].real();
  for (std::size_t j = 1; j < coeffs_.size(); ++j) {
    double w = kTwoPi * static_cast<double>(j) * t;
    acc += 2.0 * (coeffs_[j].real() * std::cos(w) - coeffs_[j].imag() * std::sin(w));
  }
  return acc;
}

std::complex<double> AnalyticPotential::evaluate_complex(double theta) const {
  double t = mod1(theta);
  std::complex<double> acc = coeffs_[0];
  for (std::size_t j = 1; j < coeffs_.size(); ++j) {
    double w = kTwoPi * static_cast<double>(j) * t;
    std::complex<double> e{std::cos(w), std::sin(w)};
    acc += coeffs_[j] * e + std::conj(coeffs_[j]) * std::conj(e);
  }
  return acc;
}

double AnalyticPotential::derivative_sup_bound() const {
  double s = 0.0;
  for (std::size_t j = 1; j < coeffs_.size(); ++j) {
    s += kTwoPi * static_cast<double>(j) * 2.0 * std::abs(coeffs_[j]);
  }
  if (!finite_) {
    // sum_{j > J} 2 A j e^{-c j} * 2 pi, closed form with x = e^{-c}:
    // sum_{j>m} j x^j = x^{m+1} ((m+1) - m x) / (1-x)^2.
    double x = std::exp(-decay_rate_);
    double m = static_cast<double>(max_index());
    double tail = std::pow(x, m + 1.0) * ((m + 1.0) - m * x) / ((1.0 - x) * (1.0 - x));
    s += 2.0 * envelope_amplitude_ * kTwoPi * tail;
  }
  return s;
}

double AnalyticPotential::envelope_tail(int m) const {
  if (m < 0) throw std::invalid_argument("envelope_tail: m < 0");
  if (finite_) {
    // Exact dropped mass of the stored series beyond m.
    double s = 0.0;
    for (std::size_t j = static_cast<std::size_t>(m) + 1; j < coeffs_.size(); ++j) {
      s += 2.0 * std::abs(coeffs_[j]);
    }
    return s;
  }
  double x = std::exp(-decay_rate_);
  return 2.0 * envelope_amplitude_ * std::pow(x, static_cast<double>(m) + 1.0) /
         (1.0 - x);
}

std::optional<double> AnalyticPotential::am_lambda() const {
  if (!finite_) return std::nullopt;
  if (coeffs_[0] != std::complex<double>(0.0, 0.0)) return std::nullopt;
  if (coeffs_.size() == 1) return 0.0;
  if (coeffs_.size() != 2) return std::nullopt;
  if (coeffs_[1].imag() != 0.0) return std::nullopt;
  return coeffs_[1].real();
}

std::string AnalyticPotential::to_json_text() const {
  ordered_json j;
  j["name"] = name_;
  ordered_json cj = ordered_json::array();
  for (const auto& c : coeffs_) cj.push_back({c.real(), c.imag()});
  j["coefficients"] = cj;
  j["decay_rate"] = decay_rate_;
  j["envelope_amplitude"] = envelope_amplitude_;
  j["finite_series"] = finite_;
  return j.dump(2);
}

AnalyticPotential AnalyticPotential::from_json_text(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("potential JSON parse: ") + e.what());
  }
  if (!j.contains("coefficients") || !j["coefficients"].is_array())
    throw std::invalid_argument("potential JSON: missing coefficients array");
  std::vector<std::complex<double>> coeffs;
  for (const auto& c : j["coefficients"]) {
    if (c.is_number()) {
      coeffs.emplace_back(c.get<double>(), 0.0);
    } else if (c.is_array() && c.size() == 2) {
      coeffs.emplace_back(c[0].get<double>(), c[1].get<double>());
    } else {
      throw std::invalid_argument("potential JSON: coefficient must be number or [re, im]");
    }
  }
  double rate = j.value("decay_rate", 1.0);
  bool finite = j.value("finite_series", true);
  std::optional<double> amp;
  if (j.contains("envelope_amplitude")) amp = j["envelope_amplitude"].get<double>();
  AnalyticPotential f = from_coefficients(std::move(coeffs), rate, finite, amp);
  f.name_ = j.value("name", std::string());
  return f;
}

AnalyticPotential AnalyticPotential::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("potential: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

TruncatedPotential::TruncatedPotential(const AnalyticPotential& base, int k)
    : series_(AnalyticPotential::zero()), k_(k), tail_bound_(0.0) {
  if (k < 1) throw std::invalid_argument("truncate: k must be >= 1");
  std::int64_t cut = static_cast<std::int64_t>(k) * k;
  std::size_t keep = std::min<std::size_t>(base.half_coefficients().size(),
                                           static_cast<std::size_t>(cut) + 1);
  std::vector<std::complex<double>> coeffs(base.half_coefficients().begin(),
                                           base.half_coefficients().begin() +
                                               static_cast<std::ptrdiff_t>(keep));
  // The truncated object is a genuinely finite series; the certified dropped
  // mass (stored digits past the cutoff plus, for infinite series, the
  // envelope tail) is charged separately.
  series_ = AnalyticPotential::from_coefficients(std::move(coeffs),
                                                 base.decay_rate(), true,
                                                 base.envelope_amplitude());
  series_.set_name(base.name());
  tail_bound_ = base.envelope_tail(static_cast<int>(cut));
}

int TruncatedPotential::cutoff() const { return k_ * k_; }

TruncatedPotential truncate(const AnalyticPotential& f, int k) {
  return TruncatedPotential(f, k);
}

}  // namespace qplab
