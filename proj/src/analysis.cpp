#include "qplab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "qplab/cocycle.hpp"
#include "qplab/util.hpp"

namespace qplab {

namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json lemma1_json(const Lemma1Report& r) {
  ordered_json j;
  j["k"] = r.k;
  j["eps_prime"] = r.eps_prime;
  j["gamma"] = r.gamma;
  j["window_constant"] = r.window_constant;
  j["window"] = r.window;
  j["threshold_log"] = r.threshold_log;
  if (r.found_m) j["found_m"] = *r.found_m; else j["found_m"] = nullptr;
  j["max_log_abs"] = r.max_log_abs;
  j["scanned"] = r.scanned;
  j["truncation_warning"] = r.truncation_warning;
  j["omega_label"] = r.omega_label;
  return j;
}

ordered_json continuity_json(const ContinuityReport& r) {
  ordered_json j;
  j["n"] = r.n;
  j["p1"] = r.p1;
  j["q1"] = r.q1;
  j["p2"] = r.p2;
  j["q2"] = r.q2;
  j["d_alpha"] = r.d_alpha;
  j["deviation"] = r.deviation;
  j["shape_log3"] = r.shape_log3;
  j["shape_log1"] = r.shape_log1;
  j["shape_holder"] = r.shape_holder;
  j["resolution_limited"] = r.resolution_limited;
  return j;
}

}  // namespace

// ---------------------------------------------------------------------------
// Large-value search

Lemma1Report lemma1_search(const AnalyticPotential& f, const ContinuedFraction& alpha,
                           double theta, double E, int k, double eps_prime,
                           std::int64_t window, double gamma) {
  if (k < 1) throw std::invalid_argument("lemma1_search: k must be >= 1");
  if (window < 1) throw std::invalid_argument("lemma1_search: window must be >= 1");

  Lemma1Report r;
  r.k = k;
  r.eps_prime = eps_prime;
  r.gamma = gamma;
  r.window = window;
  r.threshold_log = (gamma - eps_prime) * static_cast<double>(k);
  r.max_log_abs = -std::numeric_limits<double>::infinity();
  r.omega_label = alpha.certified_bound()
                      ? "certified(B=" + std::to_string(*alpha.certified_bound()) + ")"
                      : "inspected-horizon-only";

  TruncatedPotential fk = truncate(f, k);
  const double a = alpha.value();
  const std::int64_t chunk = 4096;
  std::vector<double> logs(static_cast<std::size_t>(std::min(chunk, window)));
  std::vector<char> warns(logs.size());

  for (std::int64_t m0 = 0; m0 < window; m0 += chunk) {
    std::int64_t m1 = std::min(window, m0 + chunk);
    std::size_t len = static_cast<std::size_t>(m1 - m0);
    // Evaluate the whole chunk in parallel slots, then walk it in order so
    // found_m, the scanned count, and the prefix maximum never depend on the
    // thread count.
    parallel_fill(len, 0, [&](std::size_t i) {
      double th = mod1(std::fma(static_cast<double>(m0 + static_cast<std::int64_t>(i)),
                                a, theta));
      DetPair pr = truncated_det_pair(fk, a, th, E);
      logs[i] = pr.pk.log_abs();
      warns[i] = pr.truncation_warning ? 1 : 0;
    });
    for (std::size_t i = 0; i < len; ++i) {
      r.max_log_abs = std::max(r.max_log_abs, logs[i]);
      if (warns[i]) r.truncation_warning = true;
      if (logs[i] >= r.threshold_log) {
        r.found_m = m0 + static_cast<std::int64_t>(i);
        r.scanned = *r.found_m + 1;
        return r;
      }
    }
  }
  r.scanned = window;
  return r;
}

Lemma1Sweep lemma1_sweep(const AnalyticPotential& f, const ContinuedFraction& alpha,
                         double theta, double E, int k_lo, int k_hi,
                         double eps_prime, double gamma, double c_start,
                         double c_cap, int threads) {
  if (k_lo < 1 || k_hi < k_lo) throw std::invalid_argument("lemma1_sweep: bad k range");
  if (!(c_start > 0.0) || c_cap < c_start)
    throw std::invalid_argument("lemma1_sweep: bad window constants");
  (void)threads;  // each search parallelises its own scan

  auto run_all = [&](double C) {
    std::vector<Lemma1Report> reports;
    reports.reserve(static_cast<std::size_t>(k_hi - k_lo + 1));
    for (int k = k_lo; k <= k_hi; ++k) {
      double w = C * static_cast<double>(k) * k * k;
      std::int64_t window = static_cast<std::int64_t>(std::ceil(w));
      Lemma1Report r = lemma1_search(f, alpha, theta, E, k, eps_prime, window, gamma);
      r.window_constant = C;
      reports.push_back(std::move(r));
    }
    return reports;
  };
  auto triple_ok = [](const std::vector<Lemma1Report>& reports) {
    if (reports.size() < 3) {
      for (const auto& r : reports) if (r.found_m) return true;
      return false;
    }
    for (std::size_t i = 0; i + 2 < reports.size(); ++i) {
      if (!reports[i].found_m && !reports[i + 1].found_m && !reports[i + 2].found_m)
        return false;
    }
    return true;
  };

  Lemma1Sweep sweep;
  sweep.k_lo = k_lo;
  sweep.k_hi = k_hi;
  double C = c_start;
  for (;;) {
    sweep.reports = run_all(C);
    sweep.triple_property = triple_ok(sweep.reports);
    if (sweep.triple_property || C >= c_cap) break;
    C = std::min(2.0 * C, c_cap);
  }
  sweep.fitted_constant = C;
  int hits = 0;
  for (const auto& r : sweep.reports) if (r.found_m) ++hits;
  sweep.success_frequency =
      static_cast<double>(hits) / static_cast<double>(sweep.reports.size());
  return sweep;
}

// ---------------------------------------------------------------------------
// Circle supremum

Lemma2Report lemma2_sup(const AnalyticPotential& f, double alpha, double E,
                        int k, double eps, int z_grid, double gamma,
                        int threads) {
  if (k < 1) throw std::invalid_argument("lemma2_sup: k must be >= 1");
  std::int64_t need = 8ll * k * k;
  if (z_grid < need)
    throw std::invalid_argument("lemma2_sup: z grid must have at least 8 k^2 points");

  TruncatedPotential fk = truncate(f, k);
  bool warn = false;
  auto sup_on = [&](std::int64_t G) {
    std::vector<double> logs(static_cast<std::size_t>(G));
    std::vector<char> warns(static_cast<std::size_t>(G));
    parallel_fill(static_cast<std::size_t>(G), threads, [&](std::size_t i) {
      double th = static_cast<double>(i) / static_cast<double>(G);
      DetPair pr = truncated_det_pair(fk, alpha, th, E);
      logs[i] = pr.pk.log_abs();
      warns[i] = pr.truncation_warning ? 1 : 0;
    });
    double s = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < logs.size(); ++i) {
      s = std::max(s, logs[i]);
      if (warns[i]) warn = true;
    }
    return s;
  };

  double coarse = sup_on(z_grid);
  double fine = sup_on(2ll * z_grid);

  Lemma2Report r;
  r.k = k;
  r.eps = eps;
  r.gamma = gamma;
  r.z_grid = z_grid;
  r.sup_log = fine;
  r.threshold_log = (gamma + eps) * static_cast<double>(k);
  r.doubling_diff = std::abs(fine - coarse);
  r.stable = r.doubling_diff <= -std::log(0.98);
  r.pass = r.sup_log <= r.threshold_log;
  r.truncation_warning = warn;
  return r;
}

// ---------------------------------------------------------------------------
// Measure convergence along the approximants

ConvergenceTable measure_convergence(const AnalyticPotential& f,
                                     const ContinuedFraction& alpha, int depth,
                                     double tol, int threads) {
  auto conv = convergents(alpha, depth);
  std::optional<double> lam = f.am_lambda();
  ConvergenceTable t;
  for (const auto& c : conv) {
    ConvergenceRow row;
    row.n = c.n;
    row.p = c.p;
    row.q = c.q;
    try {
      row.measure = union_spectrum(f, c.p, c.q, tol, nullptr, threads).measure();
      if (lam) {
        row.residual = row.measure - 4.0 * std::abs(1.0 - std::abs(*lam));
      }
    } catch (const std::exception& e) {
      row.measure = std::numeric_limits<double>::quiet_NaN();
      row.error = e.what();
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string ConvergenceTable::to_csv() const {
  std::string out = "n,p,q,measure,residual\n";
  char buf[200];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%lld,%lld,%.12g,",
                  r.n, static_cast<long long>(r.p), static_cast<long long>(r.q),
                  r.measure);
    out += buf;
    if (r.residual) {
      std::snprintf(buf, sizeof(buf), "%.12g", *r.residual);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

std::string ConvergenceTable::to_json_text() const {
  ordered_json j;
  ordered_json rs = ordered_json::array();
  for (const auto& r : rows) {
    ordered_json rj;
    rj["n"] = r.n;
    rj["p"] = r.p;
    rj["q"] = r.q;
    rj["measure"] = r.measure;
    if (r.residual) rj["residual"] = *r.residual;
    if (!r.error.empty()) rj["error"] = r.error;
    rs.push_back(std::move(rj));
  }
  j["rows"] = rs;
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Frequency continuity

ContinuityReport continuity_probe(const AnalyticPotential& f,
                                  const ContinuedFraction& alpha, int n,
                                  double tol, int threads) {
  Convergent c1 = convergent_at(alpha, n);
  Convergent c2 = convergent_at(alpha, n + 1);
  BandSet s1 = union_spectrum(f, c1.p, c1.q, tol, nullptr, threads);
  BandSet s2 = union_spectrum(f, c2.p, c2.q, tol, nullptr, threads);

  ContinuityReport r;
  r.n = n;
  r.p1 = c1.p; r.q1 = c1.q;
  r.p2 = c2.p; r.q2 = c2.q;
  // |p1/q1 - p2/q2| = 1/(q1 q2): adjacent convergents are unimodular.
  r.d_alpha = 1.0 / (static_cast<double>(c1.q) * static_cast<double>(c2.q));
  r.deviation = BandSet::endpoint_deviation(s1, s2);
  double L = std::abs(std::log(r.d_alpha));
  r.shape_log3 = r.d_alpha * L * L * L;
  r.shape_log1 = r.d_alpha * L;
  r.shape_holder = std::sqrt(r.d_alpha);
  r.resolution_limited = tol >= r.deviation / 10.0;
  return r;
}

ContinuityFit continuity_sweep(const AnalyticPotential& f,
                               const ContinuedFraction& alpha, int n_first,
                               int pairs, double tol, int threads) {
  if (pairs < 1) throw std::invalid_argument("continuity_sweep: needs >= 1 pair");
  ContinuityFit fit;
  fit.pairs = pairs;
  for (int i = 0; i < pairs; ++i) {
    fit.reports.push_back(continuity_probe(f, alpha, n_first + i, tol, threads));
  }

  auto fit_shape = [&](auto shape_of, double& c_ls, double& c_max, double& resid) {
    double acc = 0.0;
    c_max = 0.0;
    for (const auto& r : fit.reports) {
      double dev = std::max(r.deviation, 1e-300);
      double sh = shape_of(r);
      acc += std::log(dev) - std::log(sh);
      c_max = std::max(c_max, dev / sh);
    }
    double logc = acc / static_cast<double>(pairs);
    c_ls = std::exp(logc);
    double sq = 0.0;
    for (const auto& r : fit.reports) {
      double dev = std::max(r.deviation, 1e-300);
      double e = std::log(dev) - std::log(shape_of(r)) - logc;
      sq += e * e;
    }
    resid = std::sqrt(sq / static_cast<double>(pairs));
  };
  fit_shape([](const ContinuityReport& r) { return r.shape_log3; },
            fit.c_log3, fit.c_log3_max, fit.residual_log3);
  fit_shape([](const ContinuityReport& r) { return r.shape_log1; },
            fit.c_log1, fit.c_log1_max, fit.residual_log1);
  fit_shape([](const ContinuityReport& r) { return r.shape_holder; },
            fit.c_holder, fit.c_holder_max, fit.residual_holder);

  if (pairs >= 4) {
    double sx = 0.0, sy = 0.0;
    for (const auto& r : fit.reports) {
      sx += std::log(r.d_alpha);
      sy += std::log(std::max(r.deviation, 1e-300));
    }
    double mx = sx / pairs, my = sy / pairs;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& r : fit.reports) {
      double dx = std::log(r.d_alpha) - mx;
      double dy = std::log(std::max(r.deviation, 1e-300)) - my;
      sxx += dx * dx;
      sxy += dx * dy;
    }
    if (sxx > 0.0) fit.exponent = sxy / sxx;
  }
  return fit;
}

// ---------------------------------------------------------------------------
// Measure upper bound at the true frequency

UpperBoundReport spectrum_upper_bound(const AnalyticPotential& f,
                                      const ContinuedFraction& alpha, int n,
                                      double c, double delta, double tol,
                                      int threads) {
  Convergent cv = convergent_at(alpha, n);
  BandSet s = union_spectrum(f, cv.p, cv.q, tol, nullptr, threads);

  UpperBoundReport r;
  r.n = n;
  r.p = cv.p;
  r.q = cv.q;
  r.c = c;
  r.delta = delta;
  r.measure = s.measure();
  r.d_alpha = approximation_gap(alpha, n);
  double ad = std::abs(r.d_alpha);
  if (ad > 0.0 && c != 0.0) {
    double L = std::abs(std::log(ad));
    r.radius = c * ad * L * L * L;
    r.second_addend = 2.0 * static_cast<double>(r.q) * r.radius;
  }
  r.rhs = r.measure + r.second_addend + delta;
  r.constructive = s.inflate(r.radius).measure() + delta;
  return r;
}

// ---------------------------------------------------------------------------
// JSON serialisation

std::string Lemma1Report::to_json_text() const { return lemma1_json(*this).dump(2); }

std::string Lemma1Sweep::to_json_text() const {
  ordered_json j;
  j["fitted_constant"] = fitted_constant;
  j["triple_property"] = triple_property;
  j["k_lo"] = k_lo;
  j["k_hi"] = k_hi;
  j["success_frequency"] = success_frequency;
  ordered_json rs = ordered_json::array();
  for (const auto& r : reports) rs.push_back(lemma1_json(r));
  j["reports"] = rs;
  return j.dump(2);
}

std::string Lemma2Report::to_json_text() const {
  ordered_json j;
  j["k"] = k;
  j["eps"] = eps;
  j["gamma"] = gamma;
  j["z_grid"] = z_grid;
  j["sup_log"] = sup_log;
  j["threshold_log"] = threshold_log;
  j["pass"] = pass;
  j["doubling_diff"] = doubling_diff;
  j["stable"] = stable;
  j["truncation_warning"] = truncation_warning;
  return j.dump(2);
}

std::string ContinuityReport::to_json_text() const {
  return continuity_json(*this).dump(2);
}

std::string ContinuityFit::to_json_text() const {
  ordered_json j;
  j["pairs"] = pairs;
  j["c_log3"] = c_log3;
  j["c_log3_max"] = c_log3_max;
  j["residual_log3"] = residual_log3;
  j["c_log1"] = c_log1;
  j["c_log1_max"] = c_log1_max;
  j["residual_log1"] = residual_log1;
  j["c_holder"] = c_holder;
  j["c_holder_max"] = c_holder_max;
  j["residual_holder"] = residual_holder;
  if (exponent) j["exponent"] = *exponent; else j["exponent"] = nullptr;
  ordered_json rs = ordered_json::array();
  for (const auto& r : reports) rs.push_back(continuity_json(r));
  j["reports"] = rs;
  return j.dump(2);
}

std::string UpperBoundReport::to_json_text() const {
  ordered_json j;
  j["n"] = n;
  j["p"] = p;
  j["q"] = q;
  j["c"] = c;
  j["delta"] = delta;
  j["measure"] = measure;
  j["d_alpha"] = d_alpha;
  j["radius"] = radius;
  j["second_addend"] = second_addend;
  j["rhs"] = rhs;
  j["constructive"] = constructive;
  return j.dump(2);
}

}  // namespace qplab
