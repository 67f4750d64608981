"""Sweep drivers behind the command-line subcommands.

Each driver takes a resolved configuration and returns a :class:`SweepResult`
of named columns, one row per grid point in grid order, and a summary.
Missing values are ``None``; they are written as empty cells.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bethe import solve_rapidities
from .eigenbasis import build_spectral_basis
from .errors import DivergenceError, NoDominantPeakError, SCCError
from .interferometer import (SequenceConfig, calibrate, estimate_fringe_frequency,
                             observable_moments, output_state, seeded_pair_number)
from .metrology import hellinger_sensitivity_proxy, sensitivity_sweep
from .model import ModelParams, build_hamiltonian, exact_spectrum
from .validation import run_property_suite

__all__ = ["SweepResult", "run_spectrum", "run_seed_sweep", "run_dwell_sweep", "run_phase_sweep",
           "run_eta1_sweep", "run_validate", "operation"]


@dataclass
class SweepResult:
    columns: list
    rows: list
    summary: dict = field(default_factory=dict)
    passed: bool = True
    report: list = field(default_factory=list)


class operation:
    """Context manager tagging package errors with the operation that raised them."""

    def __init__(self, name):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and isinstance(exc, SCCError) and not hasattr(exc, "operation"):
            exc.operation = self.name
        return False


def _params(cfg, q=None):
    return ModelParams(cfg["N"], cfg["lam"], cfg["q"] if q is None else q)


def _basis(params, workers=1):
    with operation("solve_rapidities"):
        spectrum = solve_rapidities(params, workers=workers if workers > 1 else None)
    with operation("build_spectral_basis"):
        return build_spectral_basis(spectrum)


def _sequence(cfg, t=None):
    t = cfg["t"] if t is None else t
    if cfg["sequence"] == "free":
        return SequenceConfig.free(t, omega=cfg["omega"], omega0=cfg["omega0"])
    return SequenceConfig.quasifree(t, q_prime=cfg["q_prime"])


def _map(workers, fn, items):
    items = list(items)
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _refs(eta1):
    if eta1 > 0:
        return 1.0 / eta1, 1.0 / (eta1 * (eta1 + 2.0))
    return None, None


def run_spectrum(cfg, workers=1) -> SweepResult:
    params = _params(cfg)
    with operation("solve_rapidities"):
        spectrum = solve_rapidities(params, workers=workers if workers > 1 else None)
    ed, _ = exact_spectrum(build_hamiltonian(params))
    rows = []
    for s, state in enumerate(spectrum.states):
        rapidities = " ".join(format(v, ".17g") for v in state.values)
        rows.append([s, state.label, state.energy, float(ed[s]), state.r0, state.r1,
                     state.residual_norm, rapidities])
    columns = ["index", "label", "energy", "ed_energy", "r0", "r1", "residual", "rapidities"]
    summary = {"states": len(rows), "max_residual": spectrum.max_residual,
               "ed_mismatch": spectrum.energy_mismatch()}
    return SweepResult(columns, rows, summary)


def run_seed_sweep(cfg, workers=1) -> SweepResult:
    ts = np.linspace(cfg["t_min"], cfg["t_max"], cfg["t_steps"])

    def one(q):
        return seeded_pair_number(_basis(_params(cfg, q)), ts)

    curves = _map(workers, one, cfg["q_list"])
    rows = [[q, float(t), float(e)] for q, curve in zip(cfg["q_list"], curves) for t, e in zip(ts, curve)]
    summary = {f"max_eta1[q={q:.6g}]": float(np.max(c)) for q, c in zip(cfg["q_list"], curves)}
    return SweepResult(["q", "t", "eta1"], rows, summary)


def _prime(cfg, seq, workers):
    if seq.kind == "quasifree":
        return _basis(_params(cfg, seq.q_prime), workers)
    return None


def run_dwell_sweep(cfg, workers=1) -> SweepResult:
    basis = _basis(_params(cfg), workers)
    seq = _sequence(cfg)
    prime = _prime(cfg, seq, workers)
    us = np.linspace(cfg["u_min"], cfg["u_max"], cfg["u_steps"])
    mean, var = observable_moments(output_state(basis, seq, prime, us), basis)
    eta1 = seeded_pair_number(basis, seq.t)
    rows = [[float(u), eta1, float(m), float(v)] for u, m, v in zip(us, mean, var)]
    summary = {"eta1": eta1}
    try:
        with operation("estimate_fringe_frequency"):
            cal = estimate_fringe_frequency(us, mean)
        summary["Omega"] = cal.Omega
        summary["period"] = 2.0 * math.pi / cal.Omega
    except NoDominantPeakError as exc:
        summary["Omega"] = None
        summary["calibration"] = f"no dominant peak ({exc})"
    return SweepResult(["u", "eta1", "mean_eta", "var_eta"], rows, summary)


def run_phase_sweep(cfg, workers=1) -> SweepResult:
    basis = _basis(_params(cfg), workers)
    seq = _sequence(cfg)
    prime = _prime(cfg, seq, workers)
    with operation("calibrate"):
        cal = calibrate(basis, seq, prime)
    phis = np.linspace(cfg["phi_min"], cfg["phi_max"], cfg["phi_steps"])
    with operation("sensitivity_sweep"):
        points = sensitivity_sweep(basis, seq, cal, phis, prime, delta=cfg["delta"], guard=cfg["guard"])
    rows = []
    for p in points:
        sql, hl = _refs(p.eta1)
        rows.append([p.phi, p.eta1, p.mean_eta, p.var_eta, p.delta_phi_sq, p.proxy_delta_phi_sq, p.fisher,
                     p.ideal, sql, hl, ";".join(p.flags)])
    columns = ["phi", "eta1", "mean_eta", "var_eta", "delta_phi_sq", "proxy_delta_phi_sq", "fisher",
               "ideal_delta_phi_sq", "sql_ref", "heisenberg_ref", "flags"]
    ep = [p.delta_phi_sq for p in points if p.delta_phi_sq is not None]
    px = [p.proxy_delta_phi_sq for p in points if p.proxy_delta_phi_sq is not None]
    summary = {"Omega": cal.Omega, "eta1": points[0].eta1 if points else None,
               "min_delta_phi_sq": min(ep) if ep else None, "min_proxy_delta_phi_sq": min(px) if px else None,
               "flagged_rows": sum(1 for p in points if "guard_band" in p.flags)}
    return SweepResult(columns, rows, summary)


def run_eta1_sweep(cfg, workers=1) -> SweepResult:
    """Hellinger proxy at ``phi = 0`` against the seeded pair number.

    Each series is calibrated once at ``calibration_t`` and that phase scale
    is kept along the ``t`` grid.
    """
    basis = _basis(_params(cfg), workers)
    ts = np.linspace(cfg["eta1_t_min"], cfg["eta1_t_max"], cfg["eta1_t_steps"])
    eta1 = seeded_pair_number(basis, ts)
    series = []
    if cfg["include_free"]:
        series.append(("free", None))
    series += [("quasifree", qp) for qp in cfg["q_prime_list"]]

    def one(item):
        kind, qp = item
        if kind == "free":
            seq = SequenceConfig.free(cfg["calibration_t"], omega=cfg["omega"], omega0=cfg["omega0"])
            prime = None
        else:
            seq = SequenceConfig.quasifree(cfg["calibration_t"], q_prime=qp)
            prime = _basis(_params(cfg, qp))
        with operation("calibrate"):
            cal = calibrate(basis, seq, prime)
        out = []
        for t, e in zip(ts, eta1):
            flags = ""
            try:
                value = hellinger_sensitivity_proxy(basis, seq.at(t=t), cal, 0.0, prime, cfg["delta"])
                proxy = value.value
                if value.delta_sensitive:
                    flags = "delta_sensitive"
            except DivergenceError:
                proxy, flags = None, "hellinger_flat"
            out.append((cal.Omega, float(t), float(e), proxy, flags))
        return out

    results = _map(workers, one, series)
    rows = []
    for (kind, qp), out in zip(series, results):
        for omega, t, e, proxy, flags in out:
            sql, hl = _refs(e)
            rows.append([kind, qp, omega, t, e, proxy, sql, hl, flags])
    columns = ["series", "q_prime", "Omega", "t", "eta1", "proxy_delta_phi_sq", "sql_ref", "heisenberg_ref",
               "flags"]
    summary = {f"Omega[{k}{'' if qp is None else f'={qp:g}'}]": out[0][0] for (k, qp), out in zip(series, results)}
    return SweepResult(columns, rows, summary)


def run_validate(cfg, workers=1) -> SweepResult:
    params = _params(cfg)
    configs = [_sequence(cfg)]
    with operation("validate"):
        results = run_property_suite(params, configs, rapidity_perturbation=cfg["rapidity_perturbation"],
                                     workers=workers if workers > 1 else None)
    rows = [[r.name, r.value, r.threshold, "pass" if r.passed else "fail"] for r in results]
    passed = all(r.passed for r in results)
    summary = {"properties": len(results), "failed": sum(not r.passed for r in results)}
    return SweepResult(["property", "value", "limit", "status"], rows, summary, passed,
                       [r.line() for r in results])
