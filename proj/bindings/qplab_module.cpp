// Python bindings: the operator-laboratory core exposed as `qplab._qplab`.
// Scalar results come back as native types, band sets as a small class, and
// the structured probe reports as JSON text (the package wraps them in dicts).

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qplab/analysis.hpp"
#include "qplab/bands.hpp"
#include "qplab/cocycle.hpp"
#include "qplab/lyapunov.hpp"
#include "qplab/potential.hpp"
#include "qplab/rationals.hpp"

namespace py = pybind11;
using namespace qplab;

namespace {

py::dict estimate_dict(const LyapunovEstimate& e) {
  py::dict d;
  d["alpha"] = e.alpha;
  d["energy"] = e.energy;
  d["gamma"] = e.gamma;
  d["method"] = e.method;
  d["uncertainty"] = e.uncertainty;
  d["grid_jitter"] = e.grid_jitter;
  d["flags"] = e.flags;
  py::list sched;
  for (const auto& s : e.schedule) {
    py::dict row;
    row["n"] = s.n;
    row["theta_grid"] = s.theta_grid;
    row["average"] = s.average;
    sched.append(row);
  }
  d["schedule"] = sched;
  return d;
}

}  // namespace

PYBIND11_MODULE(_qplab, m) {
  m.doc() = "numerical laboratory for discrete quasiperiodic operators";

  py::register_exception<numeric_error>(m, "NumericError", PyExc_RuntimeError);

  py::class_<ContinuedFraction>(m, "ContinuedFraction")
      .def_static("from_value", &ContinuedFraction::from_value,
                  py::arg("x"), py::arg("max_terms") = 64,
                  py::arg("termination_eps") = 1e-12)
      .def_static("from_coefficients", &ContinuedFraction::from_coefficients,
                  py::arg("coefficients"), py::arg("repeating") = false)
      .def_static("golden", &ContinuedFraction::golden, py::arg("terms") = 120)
      .def_static("silver", &ContinuedFraction::silver, py::arg("terms") = 120)
      .def("value", &ContinuedFraction::value)
      .def("coefficients", &ContinuedFraction::coefficients)
      .def("available_terms", &ContinuedFraction::available_terms)
      .def("terminated", &ContinuedFraction::terminated)
      .def("precision_limited", &ContinuedFraction::precision_limited);

  m.def(
      "convergents",
      [](const ContinuedFraction& cf, int depth) {
        py::list out;
        for (const auto& c : convergents(cf, depth))
          out.append(py::make_tuple(c.n, c.p, c.q));
        return out;
      },
      py::arg("cf"), py::arg("depth"),
      "list of (n, p, q) convergents");
  m.def("approximation_gap", &approximation_gap, py::arg("cf"), py::arg("n"));
  m.def("orbit_gap", &orbit_gap, py::arg("theta"), py::arg("alpha"),
        py::arg("q"));

  py::class_<AnalyticPotential>(m, "Potential")
      .def_static("almost_mathieu", &AnalyticPotential::almost_mathieu,
                  py::arg("coupling"))
      .def_static("zero", &AnalyticPotential::zero)
      .def_static("load_file", &AnalyticPotential::load_file, py::arg("path"))
      .def("evaluate", &AnalyticPotential::evaluate, py::arg("t"))
      .def("sup_bound", &AnalyticPotential::sup_bound)
      .def("derivative_sup_bound", &AnalyticPotential::derivative_sup_bound)
      .def("name", &AnalyticPotential::name)
      .def("coupling",
           [](const AnalyticPotential& f) -> py::object {
             auto l = f.am_lambda();
             if (!l) return py::none();
             return py::float_(*l);
           })
      .def("to_json_text", &AnalyticPotential::to_json_text);

  py::class_<BandSet>(m, "BandSet")
      .def("intervals",
           [](const BandSet& b) {
             py::list out;
             for (const auto& iv : b.intervals())
               out.append(py::make_tuple(iv.lo, iv.hi));
             return out;
           })
      .def("count", &BandSet::count)
      .def("measure", &BandSet::measure)
      .def("inflate", &BandSet::inflate, py::arg("r"))
      .def("intersect", &BandSet::intersect, py::arg("other"))
      .def("reflect", &BandSet::reflect)
      .def("distance_to", &BandSet::distance_to, py::arg("x"))
      .def("symmetric_difference_measure",
           &BandSet::symmetric_difference_measure, py::arg("other"))
      .def_static("hausdorff_distance", &BandSet::hausdorff_distance,
                  py::arg("a"), py::arg("b"));

  m.def(
      "fixed_theta_spectrum",
      [](const AnalyticPotential& f, std::int64_t p, std::int64_t q,
         double theta, double tol, int threads) {
        return fixed_theta_spectrum(f, p, q, theta, tol, nullptr, threads);
      },
      py::arg("f"), py::arg("p"), py::arg("q"), py::arg("theta"),
      py::arg("tol") = 1e-9, py::arg("threads") = 0);
  m.def(
      "union_spectrum",
      [](const AnalyticPotential& f, std::int64_t p, std::int64_t q,
         double tol, int threads) {
        return union_spectrum(f, p, q, tol, nullptr, threads);
      },
      py::arg("f"), py::arg("p"), py::arg("q"), py::arg("tol") = 1e-9,
      py::arg("threads") = 0);
  m.def(
      "union_spectrum_envelope",
      [](const AnalyticPotential& f, std::int64_t p, std::int64_t q,
         double tol, int threads) {
        return union_spectrum_envelope(f, p, q, tol, nullptr, threads);
      },
      py::arg("f"), py::arg("p"), py::arg("q"), py::arg("tol") = 1e-9,
      py::arg("threads") = 0);
  m.def("trace_at", &trace_at, py::arg("f"), py::arg("p"), py::arg("q"),
        py::arg("theta"), py::arg("E"));
  m.def(
      "chambers_spread",
      [](double lambda, std::int64_t p, std::int64_t q, double E,
         int theta_grid) {
        auto c = chambers_spread(lambda, p, q, E, theta_grid);
        return py::make_tuple(c.spread, c.scale);
      },
      py::arg("coupling"), py::arg("p"), py::arg("q"), py::arg("E"),
      py::arg("theta_grid") = 64, "(spread, scale) of the phase combination");

  m.def(
      "det_poly",
      [](const AnalyticPotential& f, double alpha, double theta, double E,
         int k) { return det_poly(f, alpha, theta, E, k); },
      py::arg("f"), py::arg("alpha"), py::arg("theta"), py::arg("E"),
      py::arg("k"));

  m.def(
      "gamma_norm_average",
      [](const AnalyticPotential& f, double alpha, double E,
         std::vector<int> schedule, int theta_grid, int threads) {
        if (schedule.empty()) schedule = default_schedule();
        return estimate_dict(
            gamma_norm_average(f, alpha, E, schedule, theta_grid, threads));
      },
      py::arg("f"), py::arg("alpha"), py::arg("E"),
      py::arg("schedule") = std::vector<int>{}, py::arg("theta_grid") = 256,
      py::arg("threads") = 0);
  m.def("gamma_mu", &gamma_mu, py::arg("f"), py::arg("alpha"), py::arg("E"),
        py::arg("k"), py::arg("theta_grid") = 256, py::arg("threads") = 0);

  m.def(
      "measure_convergence_json",
      [](const AnalyticPotential& f, const ContinuedFraction& cf, int depth,
         double tol, int threads) {
        return measure_convergence(f, cf, depth, tol, threads).to_json_text();
      },
      py::arg("f"), py::arg("cf"), py::arg("depth"), py::arg("tol") = 1e-9,
      py::arg("threads") = 0);
  m.def(
      "lemma1_search_json",
      [](const AnalyticPotential& f, const ContinuedFraction& cf, double theta,
         double E, int k, double eps_prime, std::int64_t window, double gamma) {
        return lemma1_search(f, cf, theta, E, k, eps_prime, window, gamma)
            .to_json_text();
      },
      py::arg("f"), py::arg("cf"), py::arg("theta"), py::arg("E"),
      py::arg("k"), py::arg("eps_prime"), py::arg("window"), py::arg("gamma"));
  m.def(
      "lemma1_sweep_json",
      [](const AnalyticPotential& f, const ContinuedFraction& cf, double theta,
         double E, int k_lo, int k_hi, double eps_prime, double gamma,
         double c_start, double c_cap, int threads) {
        return lemma1_sweep(f, cf, theta, E, k_lo, k_hi, eps_prime, gamma,
                            c_start, c_cap, threads)
            .to_json_text();
      },
      py::arg("f"), py::arg("cf"), py::arg("theta"), py::arg("E"),
      py::arg("k_lo"), py::arg("k_hi"), py::arg("eps_prime"), py::arg("gamma"),
      py::arg("c_start") = 4.0, py::arg("c_cap") = 512.0,
      py::arg("threads") = 0);
  m.def(
      "lemma2_sup_json",
      [](const AnalyticPotential& f, double alpha, double E, int k, double eps,
         int z_grid, double gamma, int threads) {
        return lemma2_sup(f, alpha, E, k, eps, z_grid, gamma, threads)
            .to_json_text();
      },
      py::arg("f"), py::arg("alpha"), py::arg("E"), py::arg("k"),
      py::arg("eps"), py::arg("z_grid"), py::arg("gamma"),
      py::arg("threads") = 0);
  m.def(
      "continuity_probe_json",
      [](const AnalyticPotential& f, const ContinuedFraction& cf, int n,
         double tol, int threads) {
        return continuity_probe(f, cf, n, tol, threads).to_json_text();
      },
      py::arg("f"), py::arg("cf"), py::arg("n"), py::arg("tol") = 1e-9,
      py::arg("threads") = 0);
  m.def(
      "continuity_sweep_json",
      [](const AnalyticPotential& f, const ContinuedFraction& cf, int n_first,
         int pairs, double tol, int threads) {
        return continuity_sweep(f, cf, n_first, pairs, tol, threads)
            .to_json_text();
      },
      py::arg("f"), py::arg("cf"), py::arg("n_first"), py::arg("pairs"),
      py::arg("tol") = 1e-9, py::arg("threads") = 0);
  m.def(
      "spectrum_upper_bound_json",
      [](const AnalyticPotential& f, const ContinuedFraction& cf, int n,
         double c, double delta, double tol, int threads) {
        return spectrum_upper_bound(f, cf, n, c, delta, tol, threads)
            .to_json_text();
      },
      py::arg("f"), py::arg("cf"), py::arg("n"), py::arg("c") = 1.0,
      py::arg("delta") = 0.0, py::arg("tol") = 1e-9, py::arg("threads") = 0);
}
