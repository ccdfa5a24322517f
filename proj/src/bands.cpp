#include "qplab/bands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "qplab/cocycle.hpp"
#include "qplab/util.hpp"

namespace qplab {

// ---------------------------------------------------------------------------
// BandSet

BandSet BandSet::from_intervals(std::vector<Interval> iv, double merge_gap,
                                std::vector<double>* unresolved_gaps) {
  for (const auto& i : iv) {
    if (!(i.hi >= i.lo))
      throw std::invalid_argument("band set: interval with hi < lo");
  }
  std::sort(iv.begin(), iv.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  BandSet out;
  for (const auto& i : iv) {
    if (!out.iv_.empty()) {
      Interval& last = out.iv_.back();
      double gap = i.lo - last.hi;
      if (gap <= merge_gap) {
        if (gap > 0.0 && unresolved_gaps) unresolved_gaps->push_back(gap);
        last.hi = std::max(last.hi, i.hi);
        continue;
      }
    }
    out.iv_.push_back(i);
  }
  return out;
}

double BandSet::measure() const {
  double m = 0.0;
  for (const auto& i : iv_) m += i.length();
  return m;
}

BandSet BandSet::inflate(double r) const {
  if (!(r >= 0.0)) throw std::invalid_argument("inflate: radius must be >= 0");
  std::vector<Interval> iv;
  iv.reserve(iv_.size());
  for (const auto& i : iv_) iv.push_back({i.lo - r, i.hi + r});
  return from_intervals(std::move(iv));
}

BandSet BandSet::intersect(const BandSet& o) const {
  std::vector<Interval> iv;
  std::size_t a = 0, b = 0;
  while (a < iv_.size() && b < o.iv_.size()) {
    double lo = std::max(iv_[a].lo, o.iv_[b].lo);
    double hi = std::min(iv_[a].hi, o.iv_[b].hi);
    if (hi >= lo) iv.push_back({lo, hi});
    if (iv_[a].hi < o.iv_[b].hi) ++a; else ++b;
  }
  return from_intervals(std::move(iv));
}

BandSet BandSet::reflect() const {
  std::vector<Interval> iv;
  iv.reserve(iv_.size());
  for (auto it = iv_.rbegin(); it != iv_.rend(); ++it) iv.push_back({-it->hi, -it->lo});
  BandSet out;
  out.iv_ = std::move(iv);
  return out;
}

double BandSet::distance_to(double x) const {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& i : iv_) {
    if (x < i.lo) d = std::min(d, i.lo - x);
    else if (x > i.hi) d = std::min(d, x - i.hi);
    else return 0.0;
  }
  return d;
}

double BandSet::one_sided_deviation(const BandSet& a, const BandSet& b) {
  if (a.empty()) return 0.0;
  if (b.empty()) throw std::domain_error("one_sided_deviation: empty target set");
  // dist(., b) is piecewise linear on a with local maxima only at endpoints of
  // a and at midpoints of gaps of b, so checking those is exact.
  double dev = 0.0;
  for (const auto& i : a.iv_) {
    dev = std::max(dev, b.distance_to(i.lo));
    dev = std::max(dev, b.distance_to(i.hi));
  }
  for (std::size_t g = 1; g < b.iv_.size(); ++g) {
    double mid = 0.5 * (b.iv_[g - 1].hi + b.iv_[g].lo);
    if (a.distance_to(mid) == 0.0) dev = std::max(dev, b.distance_to(mid));
  }
  return dev;
}

double BandSet::endpoint_deviation(const BandSet& a, const BandSet& b) {
  if (a.empty()) return 0.0;
  if (b.empty()) throw std::domain_error("endpoint_deviation: empty target set");
  double dev = 0.0;
  for (const auto& i : a.iv_) {
    dev = std::max(dev, b.distance_to(i.lo));
    dev = std::max(dev, b.distance_to(i.hi));
  }
  return dev;
}

double BandSet::hausdorff_distance(const BandSet& a, const BandSet& b) {
  if (a.empty() || b.empty())
    throw std::domain_error("hausdorff_distance: empty set");
  return std::max(one_sided_deviation(a, b), one_sided_deviation(b, a));
}

double BandSet::symmetric_difference_measure(const BandSet& o) const {
  return measure() + o.measure() - 2.0 * intersect(o).measure();
}

bool BandSet::contains(const BandSet& other, double slack) const {
  BandSet grown = inflate(slack);
  for (const auto& i : other.iv_) {
    bool covered = false;
    for (const auto& g : grown.iv_) {
      if (g.lo <= i.lo && i.hi <= g.hi) { covered = true; break; }
    }
    if (!covered) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Traces on the exact rational lattice

namespace {

std::int64_t positive_residue(std::int64_t p, std::int64_t q) {
  std::int64_t r = p % q;
  return (r < 0) ? r + q : r;
}

void check_reduced(std::int64_t p, std::int64_t q) {
  if (q < 1) throw std::invalid_argument("rational frequency: q must be >= 1");
  if (std::gcd(p < 0 ? -p : p, q) != 1)
    throw std::invalid_argument("rational frequency: p/q must be in lowest terms");
}

// Samples f(theta + j p/q), j = 0..q-1, with the lattice angle formed by
// integer arithmetic mod q (no accumulated rounding across the orbit).
std::vector<double> sample_lattice(const AnalyticPotential& f, std::int64_t p,
                                   std::int64_t q, double theta) {
  std::int64_t r = positive_residue(p, q);
  std::vector<double> v(static_cast<std::size_t>(q));
  std::int64_t idx = 0;
  for (std::int64_t j = 0; j < q; ++j) {
    v[static_cast<std::size_t>(j)] =
        f.evaluate(theta + static_cast<double>(idx) / static_cast<double>(q));
    idx += r;
    if (idx >= q) idx -= q;
  }
  return v;
}

}  // namespace

double trace_at(const AnalyticPotential& f, std::int64_t p, std::int64_t q,
                double theta, double E) {
  check_reduced(p, q);
  std::vector<double> v = sample_lattice(f, p, q, theta);
  return product_over(v, E).trace();
}

// ---------------------------------------------------------------------------
// Root bracketing and band assembly
//
// Every spectrum path reduces to the same shape: two continuous functions
// u(E), l(E) with the band condition u <= 0 && l >= 0, whose roots delimit the
// bands.  Brackets come from sign changes on an adaptive grid; each bracket is
// bisected; bands are assembled by classifying the segment midpoints.

namespace {

struct UL {
  double u = 0.0;
  double l = 0.0;
};

struct SearchResult {
  BandSet set;
  int nodes = 0;
  int passes = 0;
  std::vector<double> unresolved;
};

int sgn(double x) { return (x > 0.0) - (x < 0.0); }

int count_brackets(const std::vector<double>& vals) {
  int c = 0;
  for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
    int s0 = sgn(vals[i]), s1 = sgn(vals[i + 1]);
    if (s0 * s1 < 0) ++c;
    else if (s0 == 0 && s1 != 0) ++c;  // exact node zero, counted once
  }
  return c;
}

double bisect(const std::function<UL(double)>& eval, int component, double a,
              double b, double fa, double fb, double width_tol) {
  while (b - a > width_tol) {
    double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;  // hit double resolution
    UL v = eval(m);
    double fm = (component == 0) ? v.u : v.l;
    if (fm == 0.0) return m;
    if ((fm > 0.0) == (fa > 0.0)) { a = m; fa = fm; }
    else { b = m; fb = fm; }
  }
  (void)fb;
  return 0.5 * (a + b);
}

SearchResult find_bands(const std::function<UL(double)>& eval, double lo,
                        double hi, std::int64_t q, double tol, int threads,
                        int bracket_cap) {
  const double width_tol = tol * 0.05;
  std::size_t n0 = static_cast<std::size_t>(std::max<std::int64_t>(16 * q + 1, 65));
  std::vector<double> xs(n0);
  for (std::size_t i = 0; i < n0; ++i) {
    xs[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n0 - 1);
  }
  std::vector<UL> vals(n0);
  parallel_fill(n0, threads, [&](std::size_t i) { vals[i] = eval(xs[i]); });

  auto u_at = [&](std::size_t i) { return vals[i].u; };
  auto l_at = [&](std::size_t i) { return vals[i].l; };
  auto counts = [&]() {
    std::vector<double> us(xs.size()), ls(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) { us[i] = vals[i].u; ls[i] = vals[i].l; }
    return std::pair<int, int>(count_brackets(us), count_brackets(ls));
  };

  // Refinement: split cells that could hide an unbracketed root — the value
  // at an endpoint is small against the local variation and no neighbouring
  // cell already brackets that function.
  auto cell_sign_change = [&](std::size_t i, int comp) {
    double a = comp == 0 ? u_at(i) : l_at(i);
    double b = comp == 0 ? u_at(i + 1) : l_at(i + 1);
    return sgn(a) * sgn(b) < 0 || sgn(a) == 0 || sgn(b) == 0;
  };
  auto near_miss = [&](std::size_t i, int comp) {
    if (cell_sign_change(i, comp)) return false;
    if (i > 0 && cell_sign_change(i - 1, comp)) return false;
    if (i + 2 < xs.size() && cell_sign_change(i + 1, comp)) return false;
    double a = comp == 0 ? u_at(i) : l_at(i);
    double b = comp == 0 ? u_at(i + 1) : l_at(i + 1);
    double var = std::abs(b - a);
    if (i > 0) var = std::max(var, std::abs(a - (comp == 0 ? u_at(i - 1) : l_at(i - 1))));
    if (i + 2 < xs.size())
      var = std::max(var, std::abs((comp == 0 ? u_at(i + 2) : l_at(i + 2)) - b));
    return std::min(std::abs(a), std::abs(b)) < 2.0 * var;
  };

  int passes = 0;
  int stable_streak = 0;
  auto prev_counts = counts();
  while (passes < 18 && xs.size() < 300000) {
    std::vector<double> fresh;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      if (xs[i + 1] - xs[i] <= 4.0 * width_tol) continue;
      if (near_miss(i, 0) || near_miss(i, 1)) {
        fresh.push_back(0.5 * (xs[i] + xs[i + 1]));
      }
    }
    if (fresh.empty()) break;
    std::vector<UL> fresh_vals(fresh.size());
    parallel_fill(fresh.size(), threads,
                  [&](std::size_t i) { fresh_vals[i] = eval(fresh[i]); });
    std::vector<double> nxs;
    std::vector<UL> nvals;
    nxs.reserve(xs.size() + fresh.size());
    nvals.reserve(xs.size() + fresh.size());
    std::size_t fi = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      nxs.push_back(xs[i]);
      nvals.push_back(vals[i]);
      if (fi < fresh.size() && i + 1 < xs.size() && fresh[fi] < xs[i + 1] &&
          fresh[fi] > xs[i]) {
        nxs.push_back(fresh[fi]);
        nvals.push_back(fresh_vals[fi]);
        ++fi;
      }
    }
    xs = std::move(nxs);
    vals = std::move(nvals);
    ++passes;
    auto nc = counts();
    stable_streak = (nc == prev_counts) ? stable_streak + 1 : 0;
    prev_counts = nc;
    if (stable_streak >= 2) break;
  }

  if (prev_counts.first > bracket_cap || prev_counts.second > bracket_cap) {
    throw numeric_error(
        "band search: sign-change count exceeds the degree bound after refinement",
        static_cast<double>(std::max(prev_counts.first, prev_counts.second)));
  }

  // Collect brackets (and exact node zeros) for both functions.
  struct Bracket { double a, b, fa, fb; int comp; };
  std::vector<Bracket> brs;
  std::vector<double> roots;
  for (int comp = 0; comp < 2; ++comp) {
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      double a = comp == 0 ? u_at(i) : l_at(i);
      double b = comp == 0 ? u_at(i + 1) : l_at(i + 1);
      if (sgn(a) == 0) {
        if (i == 0 || sgn(comp == 0 ? u_at(i - 1) : l_at(i - 1)) != 0)
          roots.push_back(xs[i]);
        continue;
      }
      if (sgn(b) == 0) continue;  // handled as the next cell's left endpoint
      if (sgn(a) * sgn(b) < 0) brs.push_back({xs[i], xs[i + 1], a, b, comp});
    }
  }
  std::vector<double> bracket_roots(brs.size());
  parallel_fill(brs.size(), threads, [&](std::size_t i) {
    bracket_roots[i] = bisect(eval, brs[i].comp, brs[i].a, brs[i].b, brs[i].fa,
                              brs[i].fb, width_tol);
  });
  roots.insert(roots.end(), bracket_roots.begin(), bracket_roots.end());
  std::sort(roots.begin(), roots.end());

  // Segment classification between consecutive boundaries.
  std::vector<double> cuts;
  cuts.push_back(lo);
  cuts.insert(cuts.end(), roots.begin(), roots.end());
  cuts.push_back(hi);
  std::vector<Interval> bands;
  std::vector<char> inband(cuts.size() - 1, 0);
  parallel_fill(cuts.size() - 1, threads, [&](std::size_t s) {
    double mid = 0.5 * (cuts[s] + cuts[s + 1]);
    UL v = eval(mid);
    inband[s] = (v.u <= 0.0 && v.l >= 0.0) ? 1 : 0;
  });
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    if (inband[s]) bands.push_back({cuts[s], cuts[s + 1]});
  }

  SearchResult res;
  res.set = BandSet::from_intervals(std::move(bands), 2.0 * tol, &res.unresolved);
  res.nodes = static_cast<int>(xs.size());
  res.passes = passes;
  return res;
}

void fill_diag(SpectrumDiagnostics* diag, const SearchResult& r) {
  if (!diag) return;
  diag->grid_nodes = r.nodes;
  diag->refinements = r.passes;
  diag->unresolved_gaps = r.unresolved;
}

}  // namespace

// ---------------------------------------------------------------------------
// Spectrum paths

BandSet fixed_theta_spectrum(const AnalyticPotential& f, std::int64_t p,
                             std::int64_t q, double theta, double tol,
                             SpectrumDiagnostics* diag, int threads) {
  check_reduced(p, q);
  if (!(tol > 0.0)) throw std::invalid_argument("spectrum: tol must be positive");
  std::vector<double> v = sample_lattice(f, p, q, theta);
  double w = 2.0 + f.sup_bound();
  double pad = std::max(1e-7, 8.0 * tol);
  auto eval = [&v](double E) {
    double t = product_over(v, E).trace();
    return UL{t - 2.0, t + 2.0};
  };
  SearchResult r = find_bands(eval, -w - pad, w + pad, q, tol, threads,
                              static_cast<int>(2 * q + 8));
  if (r.set.count() > static_cast<std::size_t>(q)) {
    throw numeric_error("spectrum: more bands than the degree allows",
                        static_cast<double>(r.set.count()));
  }
  fill_diag(diag, r);
  if (diag) { diag->chambers_path = false; diag->theta_samples = 1; }
  return r.set;
}

ChambersCheck chambers_spread(double lambda, std::int64_t p, std::int64_t q,
                              double E, int theta_grid) {
  check_reduced(p, q);
  if (theta_grid < 2) throw std::invalid_argument("chambers_spread: grid too small");
  AnalyticPotential f = AnalyticPotential::almost_mathieu(lambda);
  double corr_amp = 2.0 * std::pow(std::abs(lambda), static_cast<double>(q));
  if (!std::isfinite(corr_amp))
    throw numeric_error("chambers_spread: lambda^q exceeds double range");
  double sign = (lambda < 0.0 && (q % 2 == 1)) ? -1.0 : 1.0;
  double cmin = std::numeric_limits<double>::infinity();
  double cmax = -cmin;
  double scale = 0.0;
  for (int i = 0; i < theta_grid; ++i) {
    double theta = static_cast<double>(i) / static_cast<double>(theta_grid);
    std::vector<double> v = sample_lattice(f, p, q, theta);
    double t = product_over(v, E).trace();
    double c = t + sign * corr_amp *
                       std::cos(kTwoPi * static_cast<double>(q) * theta);
    cmin = std::min(cmin, c);
    cmax = std::max(cmax, c);
    scale = std::max(scale, std::abs(t));
  }
  return {cmax - cmin, scale == 0.0 ? 1.0 : scale};
}

BandSet union_spectrum(const AnalyticPotential& f, std::int64_t p,
                       std::int64_t q, double tol, SpectrumDiagnostics* diag,
                       int threads) {
  check_reduced(p, q);
  if (!(tol > 0.0)) throw std::invalid_argument("spectrum: tol must be positive");
  std::optional<double> lam = f.am_lambda();
  if (!lam) return union_spectrum_envelope(f, p, q, tol, diag, threads);

  double corr = 2.0 * std::pow(*lam, static_cast<double>(q));
  double thr = 2.0 + 2.0 * std::pow(std::abs(*lam), static_cast<double>(q));
  if (!std::isfinite(corr) || !std::isfinite(thr))
    throw numeric_error("union spectrum: lambda^q exceeds double range");

  // The reduction rests on tr T_q + 2 lambda^q cos(2 pi q theta) being
  // theta-independent; verify that numerically instead of assuming it.
  double w = 2.0 + f.sup_bound();
  ChambersCheck ck = chambers_spread(*lam, p, q, 0.625 * w, 64);
  if (ck.spread > 1e-8 * (1.0 + ck.scale)) {
    throw numeric_error("union spectrum: theta-independence validation failed",
                        ck.spread);
  }

  std::vector<double> v0 = sample_lattice(f, p, q, 0.0);
  auto eval = [&v0, corr, thr](double E) {
    double c = product_over(v0, E).trace() + corr;
    return UL{c - thr, c + thr};
  };
  double pad = std::max(1e-7, 8.0 * tol);
  SearchResult r = find_bands(eval, -w - pad, w + pad, q, tol, threads,
                              static_cast<int>(2 * q + 8));
  if (r.set.count() > static_cast<std::size_t>(q)) {
    throw numeric_error("union spectrum: more bands than the degree allows",
                        static_cast<double>(r.set.count()));
  }
  fill_diag(diag, r);
  if (diag) {
    diag->chambers_path = true;
    diag->chambers_spread = ck.spread;
    diag->theta_samples = 64;
  }
  return r.set;
}

BandSet union_spectrum_envelope(const AnalyticPotential& f, std::int64_t p,
                                std::int64_t q, double tol,
                                SpectrumDiagnostics* diag, int threads) {
  check_reduced(p, q);
  if (!(tol > 0.0)) throw std::invalid_argument("spectrum: tol must be positive");
  double w = 2.0 + f.sup_bound();
  double pad = std::max(1e-7, 8.0 * tol);
  int deg = std::max(1, f.max_index());

  auto compute = [&](int N, SearchResult& out) {
    // Per-theta lattices cached up front: the E loop then runs trig-free.
    std::vector<std::vector<double>> lat(static_cast<std::size_t>(N));
    parallel_fill(static_cast<std::size_t>(N), threads, [&](std::size_t i) {
      double theta = static_cast<double>(i) / static_cast<double>(N);
      lat[i] = sample_lattice(f, p, q, theta);
    });
    auto eval = [&lat](double E) {
      double tmin = std::numeric_limits<double>::infinity();
      double tmax = -tmin;
      for (const auto& v : lat) {
        double t = product_over(v, E).trace();
        tmin = std::min(tmin, t);
        tmax = std::max(tmax, t);
      }
      return UL{tmin - 2.0, tmax + 2.0};
    };
    out = find_bands(eval, -w - pad, w + pad, q, tol, threads,
                     static_cast<int>(4 * q + 16));
  };

  int N = std::max(64, 8 * static_cast<int>(q) * deg);
  SearchResult cur;
  compute(N, cur);
  double achieved = std::numeric_limits<double>::infinity();
  bool converged = false;
  int final_N = N;
  for (int round = 0; round < 12; ++round) {
    if (static_cast<std::int64_t>(N) * 2 * q > 20000000) break;
    SearchResult next;
    compute(2 * N, next);
    double hd = BandSet::hausdorff_distance(cur.set, next.set);
    double dm = std::abs(cur.set.measure() - next.set.measure());
    achieved = std::max(hd, dm);
    cur = std::move(next);
    N *= 2;
    final_N = N;
    if (hd <= 0.5 * tol && dm <= 0.5 * tol) { converged = true; break; }
  }
  if (!converged) {
    throw numeric_error(
        "union spectrum envelope: theta refinement budget exhausted", achieved);
  }
  if (cur.set.count() > static_cast<std::size_t>(q)) {
    throw numeric_error("union spectrum envelope: more bands than the degree allows",
                        static_cast<double>(cur.set.count()));
  }
  fill_diag(diag, cur);
  if (diag) {
    diag->chambers_path = false;
    diag->theta_samples = final_N;
    // Conservative first-order bound on the theta-discretisation effect:
    // sup_E,theta |d tr / d theta| * grid step, evaluated in logs so the
    // (astronomical) worst case still reports as a finite number.
    double lb = std::log(static_cast<double>(q)) +
                static_cast<double>(q - 1) * std::log(2.0 + f.sup_bound() + w + pad) +
                std::log(std::max(f.derivative_sup_bound(), 1e-300)) -
                std::log(static_cast<double>(final_N));
    diag->envelope_bound = (lb > std::log(kSaturate)) ? kSaturate : std::exp(lb);
  }
  return cur.set;
}

std::string band_records(const BandSet& bs, std::int64_t p, std::int64_t q,
                         const std::string& theta_tag) {
  std::string out;
  char buf[160];
  for (const auto& i : bs.intervals()) {
    std::snprintf(buf, sizeof(buf), "%lld %lld %s %.12g %.12g\n",
                  static_cast<long long>(p), static_cast<long long>(q),
                  theta_tag.c_str(), i.lo, i.hi);
    out += buf;
  }
  return out;
}

}  // namespace qplab
