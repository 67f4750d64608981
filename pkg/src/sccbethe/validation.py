"""Property suite shared by the ``validate`` subcommand and the tests.

Each check returns a :class:`PropertyResult` with the measured worst case so
reports show margins, not just verdicts.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bethe import richardson_residual, solve_rapidities
from .eigenbasis import alpha_coefficients, build_spectral_basis, row_error
from .errors import NoDominantPeakError
from .interferometer import (PhaseCalibration, SequenceConfig, calibrate, nominal_fringe_frequency,
                             observable_moments, output_state)
from .metrology import (DEFAULT_DELTA, fringe_extrema, hellinger_distance, phase_derivatives,
                        _moments)
from .model import ModelParams, build_conserved_charges, build_hamiltonian, exact_spectrum

__all__ = [
    "PropertyResult",
    "permutation_alpha",
    "exact_charge_identities",
    "charge_identity_errors",
    "alpha_recursion_error",
    "spectrum_properties",
    "sequence_properties",
    "run_property_suite",
]


@dataclass(frozen=True)
class PropertyResult:
    name: str
    value: float
    threshold: float
    passed: bool

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"{verdict}  {self.name}: {self.value:.3e} (limit {self.threshold:.1e})"


def _check(name, value, threshold, lower=False):
    value = float(value)
    ok = value >= threshold if lower else value <= threshold
    return PropertyResult(name, value, threshold, bool(ok and math.isfinite(value)))


def permutation_alpha(values):
    """Brute-force permutation sum for the expansion amplitudes (small n only)."""
    values = list(values)
    n = len(values)
    out = []
    for k in range(n + 1):
        total = 0.0
        for perm in itertools.permutations(values):
            term = 1.0
            for e in perm[:k]:
                term *= -1.0 / (1.0 + e)
            for e in perm[k:]:
                term *= 1.0 / (1.0 - e)
            total += term
        out.append(total)
    return np.array(out)


def alpha_recursion_error(max_n: int = 6, samples: int = 20, seed: int = 0) -> float:
    """Worst relative gap between the O(n^2) recursion and the permutation sum."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for n in range(1, max_n + 1):
        for _ in range(samples):
            values = rng.uniform(-4.0, 4.0, n)
            values = values[np.min(np.abs(np.abs(values)[:, None] - 1.0), axis=1) > 1e-3]
            if len(values) == 0:
                continue
            brute = permutation_alpha(values)
            signs, logs = alpha_coefficients(values)
            fast = signs * np.exp(logs)
            scale = np.max(np.abs(brute))
            worst = max(worst, float(np.max(np.abs(fast - brute)) / scale))
    return worst


def exact_charge_identities(n: int, lam: Fraction, q: Fraction) -> bool:
    """Check both charge identities in exact rational arithmetic.

    The charges are ``D0 + g X`` and ``D1 - g X`` with ``X`` the symmetric
    pair-hopping matrix. They commute for every ``X`` iff ``D0 + D1`` is a
    multiple of the identity, and ``H`` is recovered iff the diagonal and the
    coefficient of ``X`` match separately. Both reduce to rational identities.
    """
    lam, q = Fraction(lam), Fraction(q)
    g = 2 * lam / q
    ks = range(n + 1)
    lz = [n - k + Fraction(1, 4) for k in ks]
    kz = [k + Fraction(1, 2) for k in ks]
    d0 = [lz[k] - 2 * g * lz[k] * kz[k] for k in ks]
    d1 = [kz[k] + 2 * g * lz[k] * kz[k] for k in ks]
    commute = len({d0[k] + d1[k] for k in ks}) == 1
    h_diag = [2 * k * (4 * lam * (n - k) + q - lam) for k in ks]
    diag_ok = all((2 * lam - q) - 4 * lam * d0[k] + 2 * (q - 2 * lam) * d1[k] == h_diag[k] for k in ks)
    # coefficient of X: -4 lam g - 2 (q - 2 lam) g must equal the -4 lam of H
    hop_ok = -4 * lam * g - 2 * (q - 2 * lam) * g == -4 * lam
    return commute and diag_ok and hop_ok


def charge_identity_errors(params: ModelParams):
    """Relative float errors of ``[R0, R1] = 0`` and the Hamiltonian reconstruction."""
    r0, r1 = build_conserved_charges(params)
    h = build_hamiltonian(params).dense()
    n1 = len(h)
    comm = np.max(np.abs(r0 @ r1 - r1 @ r0)) / (np.max(np.abs(r0)) * np.max(np.abs(r1)) * n1)
    rebuilt = (2 * params.lam - params.q) * np.eye(n1) - 4 * params.lam * r0 + 2 * (params.q - 2 * params.lam) * r1
    recon = np.max(np.abs(rebuilt - h)) / max(np.max(np.abs(h)), 1.0)
    return float(comm), float(recon)


def spectrum_properties(params: ModelParams, *, rapidity_perturbation: float = 0.0, workers=None):
    """Solver, oracle and basis checks for one model; returns ``(results, basis)``."""
    spectrum = solve_rapidities(params, check=False, workers=workers)
    results = []
    worst_res = 0.0
    for state in spectrum.states:
        rap = state.rapidities
        if rapidity_perturbation:
            rap = rap.perturbed(rapidity_perturbation)
        worst_res = max(worst_res, float(np.max(np.abs(richardson_residual(rap, params)))))
    results.append(_check("richardson_residual", worst_res, 1e-10))
    ed_energies, vectors = exact_spectrum(build_hamiltonian(params))
    mismatch = np.max(np.abs(spectrum.energies - ed_energies) / np.maximum(np.abs(ed_energies), 1.0))
    results.append(_check("ed_energy_match", mismatch, 1e-8))
    basis = build_spectral_basis(spectrum, check=False)
    rows = max(row_error(basis.c[s], vectors[:, s]) for s in range(basis.n + 1))
    results.append(_check("ed_row_match", rows, 1e-6))
    results.append(_check("orthogonality", basis.orthogonality_error(), 1e-8))
    comm, recon = charge_identity_errors(params)
    results.append(_check("charge_commutator_rel", comm, 1e-12))
    results.append(_check("hamiltonian_reconstruction_rel", recon, 1e-12))
    if params.n <= 60:
        exact = exact_charge_identities(params.n, Fraction(params.lam).limit_denominator(10**6),
                                        Fraction(params.q).limit_denominator(10**6))
        results.append(_check("charge_identities_exact", 0.0 if exact else 1.0, 0.0))
    return results, basis


def sequence_properties(basis, config: SequenceConfig, basis_prime=None, *, calibration=None, phis=None,
                        delta: float = DEFAULT_DELTA, guard: float = 1e-3):
    """Normalisation, derivative, periodicity and estimator-consistency checks.

    The checks hold for any phase scale, so when no calibration is given and
    the fringe has no dominant peak the nominal frequency is used.
    """
    results = []
    cal = calibration
    if cal is None:
        try:
            cal = calibrate(basis, config, basis_prime)
        except NoDominantPeakError:
            cal = PhaseCalibration(nominal_fringe_frequency(config, basis_prime))
    period = 2.0 * math.pi / cal.Omega
    us = np.linspace(0.0, 2.0 * period, 97)
    out = output_state(basis, config, basis_prime, us)
    results.append(_check("normalisation", np.max(out.norm_error()), 1e-10))
    at_zero = output_state(basis, config, basis_prime, 0.0)
    fidelity = abs(np.vdot(basis.c[:, 0], at_zero.x))
    results.append(_check("u0_fidelity", abs(fidelity - 1.0), 1e-10))
    h = 1e-4 / cal.Omega
    inner = us[1:]
    xs = [output_state(basis, config, basis_prime, inner + m * h).x for m in (-2, -1, 1, 2)]
    fd = (8.0 * (xs[2] - xs[1]) - (xs[3] - xs[0])) / (12.0 * h)
    rel = np.max(np.abs(fd - out.dx_du[1:])) / np.max(np.abs(out.dx_du[1:]))
    results.append(_check("dx_du_finite_difference", rel, 1e-6))
    if config.kind == "free" and config.omega0 == 0.0:
        shifted = output_state(basis, config, basis_prime, us + math.pi / config.omega)
        m0, _ = observable_moments(out, basis)
        m1, _ = observable_moments(shifted, basis)
        results.append(_check("free_periodicity", np.max(np.abs(m1 - m0)), 1e-8))
    if phis is None:
        phis = np.linspace(0.0, 2.0 * math.pi, 315)
    phis = np.asarray(phis, dtype=float)
    extrema = fringe_extrema(basis, config, cal, phis.min() - guard, phis.max() + guard, basis_prime)
    keep = np.array([not (len(extrema) and np.min(np.abs(extrema - p)) < guard) for p in phis])
    phis = phis[keep]
    amps, damps = phase_derivatives(basis, config, cal, phis, basis_prime)
    prob, dprob, mean, var, slope = _moments(amps, damps)
    # fourth-order stencil; errors are relative to the largest derivative on the grid
    hp = 1e-4
    probs = [np.abs(phase_derivatives(basis, config, cal, phis + m * hp, basis_prime)[0]) ** 2
             for m in (-2, -1, 1, 2)]
    fd_prob = (8.0 * (probs[2] - probs[1]) - (probs[3] - probs[0])) / (12.0 * hp)
    k = np.arange(basis.n + 1)
    fd_slope = 2.0 * fd_prob @ k
    rel_slope = np.max(np.abs(fd_slope - slope)) / np.max(np.abs(slope))
    rel_prob = np.max(np.abs(fd_prob - dprob)) / np.max(np.abs(dprob))
    results.append(_check("phase_derivative_mean", rel_slope, 1e-6))
    results.append(_check("phase_derivative_prob", rel_prob, 1e-6))
    keep_p = prob > 1e-14
    fisher = np.sum(np.where(keep_p, dprob ** 2 / np.where(keep_p, prob, 1.0), 0.0), axis=1)
    ep = np.maximum(var, 0.0) / slope ** 2
    results.append(_check("cramer_rao", np.min(ep * fisher), 1.0 - 1e-9, lower=True))
    shifted, _ = phase_derivatives(basis, config, cal, phis + delta, basis_prime)
    q_shift = np.abs(shifted) ** 2
    dh2 = np.array([hellinger_distance(p / p.sum(), q / q.sum()) for p, q in zip(prob, q_shift)])
    ratio = np.abs(8.0 * dh2 / delta ** 2 - fisher) / fisher
    results.append(_check("hellinger_fisher", np.max(ratio), 1e-2))
    return results, cal


def run_property_suite(params: ModelParams, configs=(), *, rapidity_perturbation: float = 0.0,
                       workers=None):
    """Model checks plus sequence checks for each ``(config, basis_prime)`` pair."""
    results, basis = spectrum_properties(params, rapidity_perturbation=rapidity_perturbation, workers=workers)
    results.append(_check("alpha_recursion_vs_permutations", alpha_recursion_error(), 1e-10))
    for config in configs:
        prime = None
        if config.kind == "quasifree":
            prime = build_spectral_basis(solve_rapidities(params.with_q(config.q_prime)))
        seq, _ = sequence_properties(basis, config, prime)
        results.extend(PropertyResult(f"{config.kind}:{r.name}", r.value, r.threshold, r.passed) for r in seq)
    return results
