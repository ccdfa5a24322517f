// qplab command line front end.  Deterministic text output: identical
// invocations produce identical bytes, and the --threads degree never changes
// results (library reductions are index-ordered).
//
// Exit codes: 0 success, 2 usage/validation error, 3 numeric failure
// (refinement budget exhausted); errors also emit a machine-readable record.

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "qplab/analysis.hpp"
#include "qplab/bands.hpp"
#include "qplab/lyapunov.hpp"
#include "qplab/potential.hpp"
#include "qplab/rationals.hpp"
#include "qplab/util.hpp"

using nlohmann::ordered_json;
using namespace qplab;

namespace {

std::string fmt(const char* f, ...) {
  char buf[256];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

// ------------------------------------------------------------------- output

struct Sink {
  std::string path;  // empty = stdout
  std::string buf;

  void line(const std::string& l) {
    buf += l;
    buf += '\n';
  }
  void raw(const std::string& s) { buf += s; }

  int flush() {
    if (path.empty()) {
      std::fwrite(buf.data(), 1, buf.size(), stdout);
      return 0;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
      std::fprintf(stderr, "cannot open output file: %s\n", path.c_str());
      return 2;
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    return out ? 0 : 2;
  }
};

// Relative --out paths may be redirected into $QPLAB_OUTDIR.
std::string resolve_out(const std::string& p) {
  if (p.empty() || p.front() == '/') return p;
  const char* d = std::getenv("QPLAB_OUTDIR");
  if (!d || !*d) return p;
  return std::string(d) + "/" + p;
}

// ---------------------------------------------------------------- frequency

struct FreqSpec {
  std::string raw;
  bool has_rational = false;
  std::int64_t p = 0, q = 1;
  std::optional<ContinuedFraction> cf;
  double value = 0.0;
};

std::vector<std::int64_t> euclid_coefficients(std::int64_t r, std::int64_t q) {
  std::vector<std::int64_t> a;
  std::int64_t hi = q, lo = r;
  while (lo != 0) {
    a.push_back(hi / lo);
    std::int64_t rem = hi % lo;
    hi = lo;
    lo = rem;
  }
  return a;
}

std::vector<std::int64_t> parse_int_list(const std::string& s) {
  std::vector<std::int64_t> v;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t comma = s.find(',', pos);
    std::string tok = s.substr(pos, comma == std::string::npos ? comma : comma - pos);
    if (tok.empty()) throw std::invalid_argument("empty coefficient in list");
    v.push_back(std::stoll(tok));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return v;
}

FreqSpec parse_alpha(const std::string& s) {
  FreqSpec fs;
  fs.raw = s;
  if (s == "golden") {
    fs.cf = ContinuedFraction::golden();
    fs.value = fs.cf->value();
    return fs;
  }
  if (s == "silver") {
    fs.cf = ContinuedFraction::silver();
    fs.value = fs.cf->value();
    return fs;
  }
  if (s.rfind("cf:", 0) == 0 || s.rfind("repeat:", 0) == 0) {
    bool repeating = s.rfind("repeat:", 0) == 0;
    auto coeffs = parse_int_list(s.substr(repeating ? 7 : 3));
    fs.cf = ContinuedFraction::from_coefficients(coeffs, repeating);
    fs.value = fs.cf->value();
    if (!repeating) {
      auto conv = convergents(*fs.cf, fs.cf->available_terms()).back();
      fs.has_rational = true;
      fs.p = conv.p;
      fs.q = conv.q;
    }
    return fs;
  }
  std::size_t slash = s.find('/');
  if (slash != std::string::npos) {
    std::int64_t p = std::stoll(s.substr(0, slash));
    std::int64_t q = std::stoll(s.substr(slash + 1));
    if (q <= 0) throw std::invalid_argument("frequency denominator must be positive");
    std::int64_t g = std::gcd(p < 0 ? -p : p, q);
    if (g > 1) {
      p /= g;
      q /= g;
    }
    fs.has_rational = true;
    fs.p = p;
    fs.q = q;
    fs.value = static_cast<double>(p) / static_cast<double>(q);
    std::int64_t r = ((p % q) + q) % q;
    if (r != 0) fs.cf = ContinuedFraction::from_coefficients(euclid_coefficients(r, q));
    return fs;
  }
  double x = std::stod(s);
  fs.value = x;
  if (x > 0.0 && x < 1.0) {
    fs.cf = ContinuedFraction::from_value(x);
    if (fs.cf->precision_limited())
      std::fprintf(stderr,
                   "warning: continued fraction of %s hits the double-precision "
                   "horizon; trailing coefficients are untrusted\n",
                   s.c_str());
  }
  return fs;
}

const ContinuedFraction& need_cf(const FreqSpec& fs) {
  if (!fs.cf)
    throw std::invalid_argument(
        "this command needs a frequency with a continued-fraction expansion "
        "(got '" + fs.raw + "')");
  return *fs.cf;
}

void need_rational(const FreqSpec& fs) {
  if (!fs.has_rational)
    throw std::invalid_argument(
        "this command needs an exact rational frequency p/q (got '" + fs.raw +
        "')");
}

AnalyticPotential parse_potential(const std::string& s) {
  if (s == "zero") return AnalyticPotential::zero();
  if (s.rfind("am:", 0) == 0)
    return AnalyticPotential::almost_mathieu(std::stod(s.substr(3)));
  return AnalyticPotential::load_file(s);
}

// ------------------------------------------------------------------ helpers

ordered_json with_schema(const std::string& schema, const std::string& body) {
  ordered_json j;
  j["schema"] = schema;
  ordered_json parsed = ordered_json::parse(body);
  for (auto& [k, v] : parsed.items()) j[k] = v;
  return j;
}

void emit_bands_header(Sink& out) {
  out.line("# schema qplab.bands.v1");
  out.line("p,q,theta_tag,a,b");
}

void emit_bands_rows(Sink& out, const BandSet& bs, std::int64_t p,
                     std::int64_t q, const std::string& tag) {
  for (const auto& iv : bs.intervals())
    out.line(fmt("%lld,%lld,%s,%.12g,%.12g", static_cast<long long>(p),
                 static_cast<long long>(q), tag.c_str(), iv.lo, iv.hi));
}

ordered_json diagnostics_json(const SpectrumDiagnostics& d) {
  ordered_json j;
  j["grid_nodes"] = d.grid_nodes;
  j["refinements"] = d.refinements;
  j["theta_samples"] = d.theta_samples;
  j["chambers_path"] = d.chambers_path;
  j["chambers_spread"] = d.chambers_spread;
  j["envelope_bound"] = d.envelope_bound;
  j["unresolved_gaps"] = d.unresolved_gaps;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discrete quasiperiodic operator laboratory"};
  app.require_subcommand(1);

  // shared option storage
  std::string alpha_s, potential_s, out_path, format, meas_format;
  double tol = 1e-9, bfly_tol = 1e-7;
  double theta = 0.0, energy = 0.0, eps_prime = 0.15, eps = 0.1;
  double gamma = 0.0, c_const = 1.0, delta = 0.0, c_start = 4.0, c_cap = 512.0;
  int depth = 10, n_index = 1, pairs = 0, k = 0, k_lo = 0, k_hi = 0;
  int threads = 0, grid = 256, qmax = 10;
  std::int64_t window = 0, z_grid = 0;
  std::vector<double> energies;
  bool have_theta = false;

  auto add_common = [&](CLI::App* sub, bool with_format,
                        const char* def_format = "csv") {
    sub->add_option("--out", out_path, "output file (default: stdout)");
    sub->add_option("--threads", threads,
                    "worker threads (0 = machine width; never changes bytes)");
    if (with_format)
      sub->add_option("--format", format, "output format")
          ->check(CLI::IsMember({"csv", "json"}))
          ->default_val(def_format);
  };

  auto* sc_conv = app.add_subcommand("convergents",
                                     "continued-fraction convergents of a frequency");
  sc_conv->add_option("--alpha", alpha_s, "frequency")->required();
  sc_conv->add_option("--depth", depth, "number of convergents")->required();
  add_common(sc_conv, true);

  auto* sc_spec = app.add_subcommand("spectrum",
                                     "band spectrum at a rational frequency");
  sc_spec->add_option("--potential", potential_s, "potential (am:<l>, zero, or file)")->required();
  sc_spec->add_option("--alpha", alpha_s, "rational frequency p/q")->required();
  sc_spec->add_option("--theta", theta, "fixed phase (omit for the phase union)")
      ->each([&](const std::string&) { have_theta = true; });
  sc_spec->add_option("--tol", tol, "endpoint tolerance")->default_val(1e-9);
  add_common(sc_spec, true);

  auto* sc_meas = app.add_subcommand("measure",
                                     "total band measure at a rational frequency");
  sc_meas->add_option("--potential", potential_s, "potential")->required();
  sc_meas->add_option("--alpha", alpha_s, "rational frequency p/q")->required();
  sc_meas->add_option("--tol", tol, "endpoint tolerance")->default_val(1e-9);
  sc_meas->add_option("--format", meas_format, "output format")
      ->check(CLI::IsMember({"plain", "json"}))
      ->default_val("plain");
  add_common(sc_meas, false);

  auto* sc_lyap = app.add_subcommand("lyapunov", "growth-rate estimates");
  sc_lyap->add_option("--potential", potential_s, "potential")->required();
  sc_lyap->add_option("--alpha", alpha_s, "frequency")->required();
  sc_lyap->add_option("--energy", energies, "energy (repeatable)")->required();
  std::string method = "norm";
  sc_lyap->add_option("--method", method, "estimator")
      ->check(CLI::IsMember({"norm", "mu"}))
      ->default_val("norm");
  sc_lyap->add_option("--k", k, "depth for the mu estimator")->default_val(2000);
  sc_lyap->add_option("--grid", grid, "phase grid")->default_val(256);
  add_common(sc_lyap, true);

  auto* sc_cvg = app.add_subcommand("convergence",
                                    "band measure along the convergents");
  sc_cvg->add_option("--potential", potential_s, "potential")->required();
  sc_cvg->add_option("--alpha", alpha_s, "frequency")->required();
  sc_cvg->add_option("--depth", depth, "convergent depth")->required();
  sc_cvg->add_option("--tol", tol, "endpoint tolerance")->default_val(1e-9);
  add_common(sc_cvg, true);

  auto* sc_l1 = app.add_subcommand("probe-lemma1",
                                   "search for a large determinant value along the orbit");
  sc_l1->add_option("--potential", potential_s, "potential")->required();
  sc_l1->add_option("--alpha", alpha_s, "frequency")->required();
  sc_l1->add_option("--theta", theta, "base phase")->default_val(0.0);
  sc_l1->add_option("--energy", energy, "energy")->required();
  sc_l1->add_option("--eps-prime", eps_prime, "threshold slack")->default_val(0.15);
  sc_l1->add_option("--gamma", gamma, "growth rate")->required();
  sc_l1->add_option("--k", k, "depth (single search)");
  sc_l1->add_option("--window", window, "orbit window (single search)");
  sc_l1->add_option("--k-lo", k_lo, "sweep start depth");
  sc_l1->add_option("--k-hi", k_hi, "sweep end depth");
  sc_l1->add_option("--c-start", c_start, "initial window constant")->default_val(4.0);
  sc_l1->add_option("--c-cap", c_cap, "window constant cap")->default_val(512.0);
  add_common(sc_l1, false);

  auto* sc_l2 = app.add_subcommand("probe-lemma2",
                                   "sup of the determinant modulus on the unit circle");
  sc_l2->add_option("--potential", potential_s, "potential")->required();
  sc_l2->add_option("--alpha", alpha_s, "frequency")->required();
  sc_l2->add_option("--energy", energy, "energy")->required();
  sc_l2->add_option("--k", k, "depth")->required();
  sc_l2->add_option("--eps", eps, "ceiling slack")->required();
  sc_l2->add_option("--z-grid", z_grid, "circle grid (>= 8 k^2)")->required();
  sc_l2->add_option("--gamma", gamma, "growth rate")->required();
  add_common(sc_l2, false);

  auto* sc_cont = app.add_subcommand("probe-continuity",
                                     "spectrum deviation between successive convergents");
  sc_cont->add_option("--potential", potential_s, "potential")->required();
  sc_cont->add_option("--alpha", alpha_s, "frequency")->required();
  sc_cont->add_option("--n", n_index, "first convergent index")->required();
  sc_cont->add_option("--pairs", pairs, "number of pairs (0 = single probe)")->default_val(0);
  sc_cont->add_option("--tol", tol, "endpoint tolerance")->default_val(1e-9);
  add_common(sc_cont, false);

  auto* sc_ub = app.add_subcommand("upper-bound",
                                   "measure bound from the rational approximation error");
  sc_ub->add_option("--potential", potential_s, "potential")->required();
  sc_ub->add_option("--alpha", alpha_s, "frequency")->required();
  sc_ub->add_option("--n", n_index, "convergent index")->required();
  sc_ub->add_option("--c", c_const, "shape constant")->default_val(1.0);
  sc_ub->add_option("--delta", delta, "additive slack")->default_val(0.0);
  sc_ub->add_option("--tol", tol, "endpoint tolerance")->default_val(1e-9);
  add_common(sc_ub, false);

  auto* sc_bfly = app.add_subcommand("butterfly",
                                     "band records over all reduced p/q up to a denominator");
  sc_bfly->add_option("--potential", potential_s, "potential")->required();
  sc_bfly->add_option("--qmax", qmax, "largest denominator")->required()
      ->check(CLI::PositiveNumber);
  sc_bfly->add_option("--tol", bfly_tol, "endpoint tolerance")->default_val(1e-7);
  add_common(sc_bfly, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  Sink out;
  out.path = resolve_out(out_path);
  std::string command = app.get_subcommands().front()->get_name();

  try {
    if (sc_conv->parsed()) {
      if (depth < 1) throw std::invalid_argument("depth must be >= 1");
      FreqSpec fs = parse_alpha(alpha_s);
      const auto& cf = need_cf(fs);
      int avail = std::min(depth, cf.available_terms());
      if (avail < depth)
        std::fprintf(stderr, "warning: only %d convergents available\n", avail);
      auto rows = convergents(cf, avail);
      if (format == "json") {
        ordered_json j;
        j["schema"] = "qplab.convergents.v1";
        j["alpha"] = fs.raw;
        ordered_json arr = ordered_json::array();
        for (const auto& c : rows) {
          ordered_json r;
          r["n"] = c.n;
          r["p"] = c.p;
          r["q"] = c.q;
          r["value"] = static_cast<double>(c.p) / static_cast<double>(c.q);
          try {
            r["gap"] = approximation_gap(cf, c.n);
          } catch (const std::out_of_range&) {
            r["gap"] = nullptr;
          }
          arr.push_back(r);
        }
        j["rows"] = arr;
        out.line(j.dump(2));
      } else {
        out.line("# schema qplab.convergents.v1");
        out.line("n,p,q,value,gap");
        for (const auto& c : rows) {
          std::string gap;
          try {
            gap = fmt("%.12g", approximation_gap(cf, c.n));
          } catch (const std::out_of_range&) {
          }
          out.line(fmt("%d,%lld,%lld,%.12g,%s", c.n,
                       static_cast<long long>(c.p), static_cast<long long>(c.q),
                       static_cast<double>(c.p) / static_cast<double>(c.q),
                       gap.c_str()));
        }
      }
    } else if (sc_spec->parsed() || sc_meas->parsed()) {
      FreqSpec fs = parse_alpha(alpha_s);
      need_rational(fs);
      auto f = parse_potential(potential_s);
      SpectrumDiagnostics diag;
      BandSet bs = have_theta && sc_spec->parsed()
                       ? fixed_theta_spectrum(f, fs.p, fs.q, theta, tol, &diag,
                                              threads)
                       : union_spectrum(f, fs.p, fs.q, tol, &diag, threads);
      std::string tag = have_theta && sc_spec->parsed() ? fmt("%.12g", theta)
                                                        : std::string("union");
      if (sc_meas->parsed()) {
        if (meas_format == "json") {
          ordered_json j;
          j["schema"] = "qplab.measure.v1";
          j["p"] = fs.p;
          j["q"] = fs.q;
          j["tol"] = tol;
          j["measure"] = bs.measure();
          out.line(j.dump(2));
        } else {
          out.line(fmt("%.12g", bs.measure()));
        }
      } else if (format == "json") {
        ordered_json j;
        j["schema"] = "qplab.bands.v1";
        j["p"] = fs.p;
        j["q"] = fs.q;
        j["theta"] = tag;
        j["tol"] = tol;
        j["measure"] = bs.measure();
        ordered_json arr = ordered_json::array();
        for (const auto& iv : bs.intervals())
          arr.push_back(ordered_json::array({iv.lo, iv.hi}));
        j["bands"] = arr;
        j["diagnostics"] = diagnostics_json(diag);
        out.line(j.dump(2));
      } else {
        emit_bands_header(out);
        emit_bands_rows(out, bs, fs.p, fs.q, tag);
      }
    } else if (sc_lyap->parsed()) {
      FreqSpec fs = parse_alpha(alpha_s);
      auto f = parse_potential(potential_s);
      std::vector<LyapunovEstimate> ests;
      for (double E : energies) {
        if (method == "norm") {
          ests.push_back(
              gamma_norm_average(f, fs.value, E, default_schedule(), grid, threads));
        } else {
          std::vector<int> ks;
          for (int d = 8; d >= 1; d /= 2)
            if (k / d >= 2 && (ks.empty() || ks.back() != k / d))
              ks.push_back(k / d);
          ests.push_back(gamma_mu_estimate(f, fs.value, E, ks, grid, threads));
        }
      }
      if (format == "json") {
        ordered_json j;
        j["schema"] = "qplab.lyapunov.v1";
        ordered_json arr = ordered_json::array();
        for (const auto& e : ests)
          arr.push_back(ordered_json::parse(e.to_json_text()));
        j["estimates"] = arr;
        out.line(j.dump(2));
      } else {
        out.line("# schema qplab.lyapunov.v1");
        out.line("alpha,energy,method,gamma,uncertainty,grid_jitter");
        for (const auto& e : ests)
          out.line(fmt("%.12g,%.12g,%s,%.12g,%.12g,%.12g", e.alpha, e.energy,
                       e.method.c_str(), e.gamma, e.uncertainty, e.grid_jitter));
      }
    } else if (sc_cvg->parsed()) {
      FreqSpec fs = parse_alpha(alpha_s);
      auto f = parse_potential(potential_s);
      auto table = measure_convergence(f, need_cf(fs), depth, tol, threads);
      if (format == "json") {
        out.line(with_schema("qplab.convergence.v1", table.to_json_text()).dump(2));
      } else {
        out.line("# schema qplab.convergence.v1");
        out.raw(table.to_csv());
      }
    } else if (sc_l1->parsed()) {
      FreqSpec fs = parse_alpha(alpha_s);
      auto f = parse_potential(potential_s);
      const auto& cf = need_cf(fs);
      bool single = sc_l1->count("--k") > 0;
      bool sweep = sc_l1->count("--k-lo") > 0 || sc_l1->count("--k-hi") > 0;
      if (single == sweep)
        throw std::invalid_argument(
            "give either --k with --window (single search) or --k-lo/--k-hi "
            "(sweep)");
      if (single) {
        if (sc_l1->count("--window") == 0)
          throw std::invalid_argument("single search needs --window");
        auto rep = lemma1_search(f, cf, theta, energy, k, eps_prime, window, gamma);
        out.line(with_schema("qplab.lemma1.v1", rep.to_json_text()).dump(2));
      } else {
        auto sw = lemma1_sweep(f, cf, theta, energy, k_lo, k_hi, eps_prime,
                               gamma, c_start, c_cap, threads);
        out.line(with_schema("qplab.lemma1sweep.v1", sw.to_json_text()).dump(2));
      }
    } else if (sc_l2->parsed()) {
      FreqSpec fs = parse_alpha(alpha_s);
      auto f = parse_potential(potential_s);
      auto rep = lemma2_sup(f, fs.value, energy, k, eps,
                            static_cast<int>(z_grid), gamma, threads);
      out.line(with_schema("qplab.lemma2.v1", rep.to_json_text()).dump(2));
    } else if (sc_cont->parsed()) {
      FreqSpec fs = parse_alpha(alpha_s);
      auto f = parse_potential(potential_s);
      const auto& cf = need_cf(fs);
      if (pairs > 0) {
        auto fit = continuity_sweep(f, cf, n_index, pairs, tol, threads);
        out.line(with_schema("qplab.continuityfit.v1", fit.to_json_text()).dump(2));
      } else {
        auto rep = continuity_probe(f, cf, n_index, tol, threads);
        out.line(with_schema("qplab.continuity.v1", rep.to_json_text()).dump(2));
      }
    } else if (sc_ub->parsed()) {
      FreqSpec fs = parse_alpha(alpha_s);
      auto f = parse_potential(potential_s);
      auto rep = spectrum_upper_bound(f, need_cf(fs), n_index, c_const, delta,
                                      tol, threads);
      out.line(with_schema("qplab.upperbound.v1", rep.to_json_text()).dump(2));
    } else if (sc_bfly->parsed()) {
      auto f = parse_potential(potential_s);
      emit_bands_header(out);
      for (std::int64_t q = 1; q <= qmax; ++q) {
        if (q == 1) {
          emit_bands_rows(out,
                          union_spectrum(f, 0, 1, bfly_tol, nullptr, threads),
                          0, 1, "union");
          continue;
        }
        for (std::int64_t p = 1; p < q; ++p) {
          if (std::gcd(p, q) != 1) continue;
          emit_bands_rows(out,
                          union_spectrum(f, p, q, bfly_tol, nullptr, threads),
                          p, q, "union");
        }
      }
    }
  } catch (const numeric_error& e) {
    ordered_json j;
    j["schema"] = "qplab.error.v1";
    j["command"] = command;
    j["error"] = e.what();
    if (std::isfinite(e.achieved_bound)) j["achieved_bound"] = e.achieved_bound;
    out.line(j.dump(2));
    out.flush();
    return 3;
  } catch (const std::exception& e) {
    ordered_json j;
    j["schema"] = "qplab.error.v1";
    j["command"] = command;
    j["error"] = e.what();
    out.line(j.dump(2));
    out.flush();
    return 2;
  }
  return out.flush();
}
