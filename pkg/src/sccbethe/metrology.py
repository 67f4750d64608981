"""Phase sensitivity estimates for the interferometer output.

The phase is ``phi = Omega u`` with ``Omega`` from a fringe calibration, so
every phase derivative is the analytic dwell-time derivative divided by
``Omega``. Three estimates are offered: error propagation on the mean
+-boson number, the Fisher information of the Fock-number distribution, and
the derivative-free Hellinger proxy ``Delta^2 / (8 dH^2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .eigenbasis import SpectralBasis
from .errors import DivergenceError, ModelError, NormalizationError
from .interferometer import (PhaseCalibration, SequenceConfig, fock_amplitudes, output_state,
                             seeded_pair_number)

__all__ = [
    "SensitivityPoint",
    "IdealReference",
    "FisherInformation",
    "HellingerProxy",
    "phase_derivatives",
    "phase_sensitivity_error_propagation",
    "fisher_information",
    "fisher_from_distribution",
    "hellinger_distance",
    "hellinger_sensitivity_proxy",
    "ideal_su11_sensitivity",
    "fringe_extrema",
    "sensitivity_sweep",
]

DERIVATIVE_FLOOR = 1e-12
PROB_CUTOFF = 1e-14
HELLINGER_FLOOR = 1e-16
DEFAULT_DELTA = 1e-5
GUARD_BAND = 1e-3


@dataclass(frozen=True)
class FisherInformation:
    value: float
    dropped_mass: float = 0.0


@dataclass(frozen=True)
class HellingerProxy:
    """Proxy at step ``Delta`` and at ``Delta/2``; ``delta_sensitive`` marks >1% disagreement."""

    value: float
    half_step_value: float
    delta_sensitive: bool


@dataclass(frozen=True)
class SensitivityPoint:
    """One phase point. ``None`` entries are flagged, never filled in."""

    phi: float
    delta_phi_sq: float | None
    proxy_delta_phi_sq: float | None
    fisher: float | None
    eta1: float
    mean_eta: float | None = None
    var_eta: float | None = None
    ideal: float | None = None
    flags: tuple = field(default=())


@dataclass(frozen=True)
class IdealReference:
    """Ideal SU(1,1) interferometer with the same number of seeded pairs."""

    eta1: float

    def __post_init__(self):
        if not self.eta1 >= 0:
            raise ModelError("eta1 must be nonnegative")

    @property
    def beta(self) -> float:
        return math.acosh(self.eta1 + 1.0)

    @property
    def heisenberg(self) -> float:
        return 1.0 / (self.eta1 * (self.eta1 + 2.0))

    @property
    def standard(self) -> float:
        return 1.0 / self.eta1

    def curve(self, phi):
        return ideal_su11_sensitivity(self.eta1, phi)


def ideal_su11_sensitivity(eta1, phi):
    """``[2/(eta1(eta1+2)) + 1 - cos phi] / (1 + cos phi)``.

    Raises
    ------
    DivergenceError
        At ``phi = pi`` mod ``2 pi`` (scalar input); arrays get ``inf`` there.
    """
    phi_arr = np.asarray(phi, dtype=float)
    if not np.all(np.asarray(eta1) > 0):
        raise ModelError("eta1 must be positive")
    cos = np.cos(phi_arr)
    denom = 1.0 + cos
    numer = 2.0 / (eta1 * (eta1 + 2.0)) + 1.0 - cos
    if phi_arr.ndim == 0:
        if abs(denom) < 1e-15:
            raise DivergenceError("ideal sensitivity diverges at phi = pi mod 2pi")
        return float(numer / denom)
    with np.errstate(divide="ignore"):
        return np.where(np.abs(denom) < 1e-15, np.inf, numer / denom)


def phase_derivatives(basis: SpectralBasis, config: SequenceConfig, calibration: PhaseCalibration,
                      phi, basis_prime: SpectralBasis | None = None):
    """Fock amplitudes at phase ``phi`` and their phase derivatives."""
    out = output_state(basis, config, basis_prime, calibration.dwell(phi))
    amps, damps = fock_amplitudes(out, basis)
    return amps, damps / calibration.Omega


def _moments(amps, damps):
    k = np.arange(amps.shape[-1])
    prob = np.abs(amps) ** 2
    dprob = 2.0 * np.real(np.conj(amps) * damps)
    mean = 2.0 * prob @ k
    var = 4.0 * prob @ (k * k) - mean * mean
    return prob, dprob, mean, var, 2.0 * dprob @ k


def phase_sensitivity_error_propagation(basis, config, calibration, phi, basis_prime=None):
    """``Var(eta) / (d<eta>/dphi)^2`` with an analytic derivative.

    Raises
    ------
    DivergenceError
        If ``|d<eta>/dphi| < 1e-12`` (fringe extremum).
    """
    amps, damps = phase_derivatives(basis, config, calibration, float(phi), basis_prime)
    _, _, _, var, slope = _moments(amps, damps)
    if abs(slope) < DERIVATIVE_FLOOR:
        raise DivergenceError(f"d<eta>/dphi = {slope:.3g} vanishes at phi = {phi}")
    return float(max(var, 0.0) / slope ** 2)


def fisher_from_distribution(prob, dprob, cutoff: float = PROB_CUTOFF) -> FisherInformation:
    """``sum (dP)^2 / P`` over outcomes with ``P > cutoff``."""
    prob = np.asarray(prob, dtype=float)
    dprob = np.asarray(dprob, dtype=float)
    keep = prob > cutoff
    value = float(np.sum(dprob[keep] ** 2 / prob[keep]))
    return FisherInformation(value, float(np.sum(prob[~keep])))


def fisher_information(basis, config, calibration, phi, basis_prime=None) -> FisherInformation:
    """Classical Fisher information of the Fock-number distribution at ``phi``."""
    amps, damps = phase_derivatives(basis, config, calibration, float(phi), basis_prime)
    prob, dprob, *_ = _moments(amps, damps)
    return fisher_from_distribution(prob, dprob)


def hellinger_distance(p, q) -> float:
    """Squared Hellinger distance ``0.5 * sum (sqrt p - sqrt q)^2``.

    Raises
    ------
    NormalizationError
        If either distribution is off normalisation by more than 1e-8.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise NormalizationError("distributions must share their support")
    for name, dist in (("P", p), ("Q", q)):
        if abs(dist.sum() - 1.0) > 1e-8:
            raise NormalizationError(f"{name} sums to {dist.sum():.12g}")
    diff = np.sqrt(np.clip(p, 0.0, None)) - np.sqrt(np.clip(q, 0.0, None))
    return float(0.5 * np.sum(diff * diff))


def _proxy_from(p0, p1, delta):
    dh2 = hellinger_distance(p0, p1)
    if dh2 < HELLINGER_FLOOR:
        raise DivergenceError(f"Hellinger distance {dh2:.3g} too small; distribution is phase independent")
    return delta * delta / (8.0 * dh2)


def hellinger_sensitivity_proxy(basis, config, calibration, phi, basis_prime=None,
                                delta: float = DEFAULT_DELTA) -> HellingerProxy:
    """``Delta^2 / (8 dH^2(phi, phi + Delta))``, also evaluated at ``Delta/2``."""
    phis = float(phi) + np.array([0.0, delta, 0.5 * delta])
    out = output_state(basis, config, basis_prime, calibration.dwell(phis))
    amps, _ = fock_amplitudes(out, basis)
    prob = np.abs(amps) ** 2
    value = _proxy_from(prob[0], prob[1], delta)
    half = _proxy_from(prob[0], prob[2], 0.5 * delta)
    return HellingerProxy(value, half, abs(half - value) > 0.01 * value)


def fringe_extrema(basis, config, calibration, lo, hi, basis_prime=None, *, per_radian: int = 64):
    """Phases in ``[lo, hi]`` where ``d<eta>/dphi`` changes sign, refined by Brent's method."""
    m = max(int(math.ceil((hi - lo) * per_radian)), 2) + 1
    grid = np.linspace(lo, hi, m)

    def slope(phi):
        amps, damps = phase_derivatives(basis, config, calibration, phi, basis_prime)
        return _moments(amps, damps)[4]

    values = slope(grid)
    roots = [float(p) for p, v in zip(grid, values) if v == 0.0]
    for a, b, va, vb in zip(grid[:-1], grid[1:], values[:-1], values[1:]):
        if va * vb < 0.0:
            roots.append(brentq(lambda x: float(slope(x)), a, b, xtol=1e-13))
    return np.array(sorted(roots))


def sensitivity_sweep(basis, config, calibration, phis, basis_prime=None, *,
                      delta: float = DEFAULT_DELTA, guard: float = GUARD_BAND):
    """All estimates along a phase grid, with guard-band flags.

    Points within ``guard`` of a fringe extremum (where error propagation
    diverges) carry no sensitivity values; the ideal reference is dropped at
    ``phi = pi`` mod ``2 pi``.
    """
    phis = np.asarray(phis, dtype=float)
    eta1 = seeded_pair_number(basis, config.t)
    extrema = fringe_extrema(basis, config, calibration, min(phis.min(), 0.0) - guard,
                             phis.max() + guard, basis_prime)
    amps, damps = phase_derivatives(basis, config, calibration, phis, basis_prime)
    prob, dprob, mean, var, slope = _moments(amps, damps)
    points = []
    for i, phi in enumerate(phis):
        flags = []
        ideal = None
        if eta1 > 0:
            if abs(math.remainder(phi - math.pi, 2.0 * math.pi)) < guard:
                flags.append("ideal_divergent")
            else:
                ideal = ideal_su11_sensitivity(eta1, phi)
        near = len(extrema) and np.min(np.abs(extrema - phi)) < guard
        if near or abs(slope[i]) < DERIVATIVE_FLOOR:
            flags.append("guard_band")
            points.append(SensitivityPoint(float(phi), None, None, None, eta1, float(mean[i]),
                                           float(var[i]), ideal, tuple(flags)))
            continue
        ep = float(max(var[i], 0.0) / slope[i] ** 2)
        fisher = fisher_from_distribution(prob[i], dprob[i])
        if fisher.dropped_mass > 0.0:
            flags.append("fisher_cutoff")
        try:
            proxy = hellinger_sensitivity_proxy(basis, config, calibration, phi, basis_prime, delta)
            proxy_value = proxy.value
            if proxy.delta_sensitive:
                flags.append("delta_sensitive")
        except DivergenceError:
            proxy_value = None
            flags.append("hellinger_flat")
        points.append(SensitivityPoint(float(phi), ep, proxy_value, fisher.value, eta1, float(mean[i]),
                                       float(var[i]), ideal, tuple(flags)))
    return points
