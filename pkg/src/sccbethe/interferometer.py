"""Active interferometer sequences on the all-zeros input state.

Both sequences sandwich a phase stage between ``exp(itH)`` (seeding) and
``exp(-itH)`` (readout). In the free sequence the phase stage multiplies the
Fock state ``|k>`` by ``exp(-2i[k omega + (n-k) omega0] u)``; in the
quasifree one it is evolution under ``H(q', lam)``. Output states are kept as
coefficients ``x_q`` in the energy basis of ``H(q, lam)`` together with
their analytic dwell-time derivative.

All functions accept a scalar dwell time or an array of them; batched
states carry the dwell-time axis first.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .eigenbasis import SpectralBasis
from .errors import CalibrationError, ModelError, NoDominantPeakError

__all__ = [
    "SequenceConfig",
    "OutputState",
    "PhaseCalibration",
    "seeded_pair_number",
    "output_state",
    "output_state_free",
    "output_state_quasifree",
    "fock_amplitudes",
    "observable_moments",
    "fock_probabilities",
    "estimate_fringe_frequency",
    "nominal_fringe_frequency",
    "calibrate",
]

FREE = "free"
QUASIFREE = "quasifree"


@dataclass(frozen=True)
class SequenceConfig:
    """Seeding time ``t``, dwell time ``u`` and the phase stage.

    ``kind`` is ``"free"`` (uses ``omega``, ``omega0``) or ``"quasifree"``
    (uses ``q_prime``).
    """

    kind: str
    t: float
    u: float = 0.0
    omega: float | None = None
    omega0: float = 0.0
    q_prime: float | None = None

    def __post_init__(self):
        if self.kind not in (FREE, QUASIFREE):
            raise ModelError(f"unknown sequence kind {self.kind!r}")
        if not (self.t >= 0 and self.u >= 0):
            raise ModelError("seeding and dwell times must be nonnegative")
        if self.kind == FREE and self.omega is None:
            raise ModelError("free sequence needs omega")
        if self.kind == QUASIFREE and not self.q_prime:
            raise ModelError("quasifree sequence needs a nonzero q_prime")

    @classmethod
    def free(cls, t, u=0.0, omega=1000.0, omega0=0.0):
        return cls(FREE, float(t), float(u), omega=float(omega), omega0=float(omega0))

    @classmethod
    def quasifree(cls, t, u=0.0, q_prime=1000.0):
        return cls(QUASIFREE, float(t), float(u), q_prime=float(q_prime))

    def at(self, t=None, u=None) -> "SequenceConfig":
        return SequenceConfig(self.kind, self.t if t is None else float(t), self.u if u is None else float(u),
                              self.omega, self.omega0, self.q_prime)


@dataclass(frozen=True)
class OutputState:
    """Energy-basis coefficients ``x`` of ``|out>`` and ``dx/du``."""

    x: np.ndarray
    dx_du: np.ndarray

    def norm_error(self):
        return np.abs(np.sum(np.abs(self.x) ** 2, axis=-1) - 1.0)


@dataclass(frozen=True)
class PhaseCalibration:
    """Fringe angular frequency ``Omega`` so that ``phi = Omega * u``."""

    Omega: float
    peak_ratio: float = math.inf

    def __post_init__(self):
        if not self.Omega > 0:
            raise CalibrationError(f"fringe frequency must be positive, got {self.Omega}")

    def dwell(self, phi):
        return np.asarray(phi, dtype=float) / self.Omega


def _seeded(basis: SpectralBasis, t):
    """Energy-basis components of ``exp(itH)|in>`` projected back: ``C^T (c_0 e^{iEt})``."""
    c = basis.c
    return c.T @ (c[:, 0] * np.exp(1j * basis.energies * t))


def seeded_pair_number(basis: SpectralBasis, t):
    """Mean number of +-bosons after the seeding stage, ``eta_1(t)``.

    ``t`` may be an array.
    """
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    c = basis.c
    k = np.arange(basis.n + 1)
    phases = np.exp(1j * np.outer(ts, basis.energies))
    amps = (phases * c[:, 0]) @ c
    eta1 = 2.0 * (np.abs(amps) ** 2) @ k
    return eta1 if np.ndim(t) else float(eta1[0])


def output_state_free(basis: SpectralBasis, config: SequenceConfig, u=None) -> OutputState:
    """Output of the free sequence; ``u`` overrides ``config.u`` and may be an array."""
    if config.kind != FREE:
        raise ModelError("output_state_free needs a free sequence")
    us = np.asarray(config.u if u is None else u, dtype=float)
    n = basis.n
    k = np.arange(n + 1)
    w = _seeded(basis, config.t)
    rate = 2.0 * (k * config.omega + (n - k) * config.omega0)
    phase = np.exp(-1j * np.multiply.outer(us, rate))
    back = np.exp(-1j * basis.energies * config.t)
    x = back * ((w * phase) @ basis.c.T)
    dx = back * ((w * phase * (-1j * rate)) @ basis.c.T)
    return OutputState(x, dx)


def output_state_quasifree(basis: SpectralBasis, basis_prime: SpectralBasis, config: SequenceConfig,
                           u=None) -> OutputState:
    """Output of the quasifree sequence with phase stage ``exp(-iuH(q'))``.

    Contracted as three matrix products so each dwell time costs O(n^2).
    """
    if config.kind != QUASIFREE:
        raise ModelError("output_state_quasifree needs a quasifree sequence")
    if basis_prime.n != basis.n or basis_prime.params.lam != basis.params.lam:
        raise ModelError("primed basis must share N and lambda")
    us = np.asarray(config.u if u is None else u, dtype=float)
    w = _seeded(basis, config.t)
    y = basis_prime.c @ w
    e_prime = basis_prime.energies
    phase = np.exp(-1j * np.multiply.outer(us, e_prime))
    back = np.exp(-1j * basis.energies * config.t)
    to_energy = basis_prime.c @ basis.c.T  # row-vector form of x = C C'^T y
    x = back * ((y * phase) @ to_energy)
    dx = back * ((y * phase * (-1j * e_prime)) @ to_energy)
    return OutputState(x, dx)


def output_state(basis: SpectralBasis, config: SequenceConfig, basis_prime: SpectralBasis | None = None,
                 u=None) -> OutputState:
    if config.kind == FREE:
        return output_state_free(basis, config, u)
    if basis_prime is None:
        raise ModelError("quasifree sequence needs the primed basis")
    return output_state_quasifree(basis, basis_prime, config, u)


def fock_amplitudes(out: OutputState, basis: SpectralBasis):
    """Fock amplitudes ``A_k = sum_q x_q c_qk`` and their dwell-time derivatives."""
    return out.x @ basis.c, out.dx_du @ basis.c


def observable_moments(out: OutputState, basis: SpectralBasis):
    """Mean and variance of the +-boson number ``eta`` in ``out``."""
    amps, _ = fock_amplitudes(out, basis)
    prob = np.abs(amps) ** 2
    k = np.arange(basis.n + 1)
    mean = 2.0 * prob @ k
    second = 4.0 * prob @ (k * k)
    return mean, second - mean * mean


def fock_probabilities(out: OutputState, basis: SpectralBasis):
    """``P[k]`` is the probability of finding ``eta = 2k``."""
    amps, _ = fock_amplitudes(out, basis)
    return np.abs(amps) ** 2


def _local_peaks(mag):
    inner = np.flatnonzero((mag[1:-1] > mag[:-2]) & (mag[1:-1] >= mag[2:])) + 1
    if len(mag) > 1 and mag[-1] > mag[-2]:
        inner = np.append(inner, len(mag) - 1)
    return inner


def estimate_fringe_frequency(us, values, *, min_periods: float = 4.0, min_points: float = 16.0,
                              dominance: float = 3.0) -> PhaseCalibration:
    """Angular frequency of the dominant fringe in uniformly sampled data.

    The mean-removed series is Fourier transformed, the largest nonzero local
    spectral peak located, and its frequency refined by least squares on
    ``a + b cos(Omega u) + c sin(Omega u)`` within one frequency bin.

    Raises
    ------
    CalibrationError
        Non-uniform grid, or fewer than ``min_periods`` periods or
        ``min_points`` samples per period at the detected frequency.
    NoDominantPeakError
        The largest peak is less than ``dominance`` times the next one.
    """
    us = np.asarray(us, dtype=float)
    y = np.asarray(values, dtype=float)
    if us.ndim != 1 or us.shape != y.shape or len(us) < 8:
        raise CalibrationError("need at least 8 matching samples")
    du = np.diff(us)
    step = du.mean()
    if step <= 0 or np.max(np.abs(du - step)) > 1e-9 * abs(step) * len(us):
        raise CalibrationError("dwell times must be uniformly spaced and increasing")
    m = len(us)
    span = m * step
    mag = np.abs(np.fft.rfft(y - y.mean()))
    mag[0] = 0.0
    peaks = _local_peaks(mag)
    if len(peaks) == 0 or mag[peaks].max() == 0.0:
        raise NoDominantPeakError("signal has no oscillating component")
    order = peaks[np.argsort(mag[peaks])[::-1]]
    top = order[0]
    ratio = mag[top] / mag[order[1]] if len(order) > 1 and mag[order[1]] > 0 else math.inf
    if ratio < dominance:
        raise NoDominantPeakError(
            f"largest fringe peak only {ratio:.2f}x the next; signal is not a single fringe")
    bin_width = 2.0 * math.pi / span
    guess = top * bin_width
    periods = guess * span / (2.0 * math.pi)
    if periods < min_periods or 2.0 * math.pi / (guess * step) < min_points:
        raise CalibrationError(
            f"{periods:.2f} periods at {2 * math.pi / (guess * step):.1f} samples per period is too coarse")

    def misfit(omega):
        design = np.column_stack([np.ones(m), np.cos(omega * us), np.sin(omega * us)])
        coef, *_ = np.linalg.lstsq(design, y, rcond=None)
        return float(np.sum((design @ coef - y) ** 2))

    lo = max(guess - bin_width, 0.5 * bin_width)
    best = minimize_scalar(misfit, bounds=(lo, guess + bin_width), method="bounded",
                           options={"xatol": 1e-10 * guess})
    return PhaseCalibration(float(best.x), float(ratio))


def nominal_fringe_frequency(config: SequenceConfig, basis_prime: SpectralBasis | None = None) -> float:
    """Expected fringe frequency before fitting.

    Free: ``2|omega - omega0|``. Quasifree: the gap between the primed
    eigenstates with the largest weight on Fock ``|0>`` and ``|1>``.
    """
    if config.kind == FREE:
        return 2.0 * abs(config.omega - config.omega0)
    c = basis_prime.c
    m0 = int(np.argmax(np.abs(c[:, 0])))
    m1 = int(np.argmax(np.abs(c[:, 1])))
    return abs(basis_prime.energies[m1] - basis_prime.energies[m0])


def calibrate(basis: SpectralBasis, config: SequenceConfig, basis_prime: SpectralBasis | None = None, *,
              periods: int = 8, points_per_period: int = 32) -> PhaseCalibration:
    """Sample ``<eta>(u)`` over several nominal periods and fit its fringe frequency."""
    nominal = nominal_fringe_frequency(config, basis_prime)
    if not nominal > 0:
        raise CalibrationError("phase stage has no fringe (zero nominal frequency)")
    m = periods * points_per_period
    us = np.arange(m) * (2.0 * math.pi / nominal / points_per_period)
    mean, _ = observable_moments(output_state(basis, config, basis_prime, us), basis)
    return estimate_fringe_frequency(us, mean)
