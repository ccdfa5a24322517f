"""Numerical laboratory for discrete quasiperiodic Schrodinger operators.

The heavy lifting lives in the compiled extension ``_qplab``; this package
re-exports it and adds thin conveniences that turn the JSON probe reports
into dictionaries.
"""

import json as _json

try:
    from qplab._qplab import (  # type: ignore[attr-defined]
        BandSet,
        ContinuedFraction,
        NumericError,
        Potential,
        approximation_gap,
        chambers_spread,
        continuity_probe_json,
        continuity_sweep_json,
        convergents,
        det_poly,
        fixed_theta_spectrum,
        gamma_mu,
        gamma_norm_average,
        lemma1_search_json,
        lemma1_sweep_json,
        lemma2_sup_json,
        measure_convergence_json,
        orbit_gap,
        spectrum_upper_bound_json,
        trace_at,
        union_spectrum,
        union_spectrum_envelope,
    )
except ImportError:  # pragma: no cover - flat build-tree layout
    from _qplab import (  # type: ignore[no-redef]
        BandSet,
        ContinuedFraction,
        NumericError,
        Potential,
        approximation_gap,
        chambers_spread,
        continuity_probe_json,
        continuity_sweep_json,
        convergents,
        det_poly,
        fixed_theta_spectrum,
        gamma_mu,
        gamma_norm_average,
        lemma1_search_json,
        lemma1_sweep_json,
        lemma2_sup_json,
        measure_convergence_json,
        orbit_gap,
        spectrum_upper_bound_json,
        trace_at,
        union_spectrum,
        union_spectrum_envelope,
    )

__all__ = [
    "BandSet",
    "ContinuedFraction",
    "NumericError",
    "Potential",
    "approximation_gap",
    "chambers_spread",
    "continuity_probe",
    "continuity_sweep",
    "convergents",
    "det_poly",
    "fixed_theta_spectrum",
    "gamma_mu",
    "gamma_norm_average",
    "lemma1_search",
    "lemma1_sweep",
    "lemma2_sup",
    "measure_convergence",
    "orbit_gap",
    "spectrum_upper_bound",
    "trace_at",
    "union_spectrum",
    "union_spectrum_envelope",
]


def measure_convergence(f, cf, depth, tol=1e-9, threads=0):
    """Band-measure table along the convergents, as a list of row dicts."""
    return _json.loads(measure_convergence_json(f, cf, depth, tol, threads))["rows"]


def lemma1_search(f, cf, theta, E, k, eps_prime, window, gamma):
    return _json.loads(lemma1_search_json(f, cf, theta, E, k, eps_prime, window, gamma))


def lemma1_sweep(f, cf, theta, E, k_lo, k_hi, eps_prime, gamma,
                 c_start=4.0, c_cap=512.0, threads=0):
    return _json.loads(
        lemma1_sweep_json(f, cf, theta, E, k_lo, k_hi, eps_prime, gamma,
                          c_start, c_cap, threads))


def lemma2_sup(f, alpha, E, k, eps, z_grid, gamma, threads=0):
    return _json.loads(lemma2_sup_json(f, alpha, E, k, eps, z_grid, gamma, threads))


def continuity_probe(f, cf, n, tol=1e-9, threads=0):
    return _json.loads(continuity_probe_json(f, cf, n, tol, threads))


def continuity_sweep(f, cf, n_first, pairs, tol=1e-9, threads=0):
    return _json.loads(continuity_sweep_json(f, cf, n_first, pairs, tol, threads))


def spectrum_upper_bound(f, cf, n, c=1.0, delta=0.0, tol=1e-9, threads=0):
    return _json.loads(spectrum_upper_bound_json(f, cf, n, c, delta, tol, threads))
