"""Richardson equations of the SCC pairing model and their numerical solution.

Every eigenstate of the sector with ``n`` pairs is labelled by a set of ``n``
real rapidities. The equations are the stationarity conditions of a log
potential (fixed charges ``d0`` at +1 and ``d1`` at -1, unit mutual
repulsion, a uniform field ``1/(4g)``). That potential is strictly concave
inside each ordering cell, so every cell holds exactly one solution. The
state with Fock label ``k`` has ``k`` rapidities on the -1 side of +1
(for ``g > 0``: inside (-1, 1)) and ``n - k`` beyond it.

States are obtained by continuation in ``g`` from ``g = eps``, where each
pole cluster is given by the zeros of a generalised Laguerre polynomial.
Each continuation step is corrected by damped Newton with a line search on
the log potential; a Heine-Stieltjes polynomial route is the fallback.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, lu_factor, lu_solve
from scipy.special import roots_genlaguerre

from . import kernels
from .errors import ConvergenceError, ModelError, PoleError
from .model import ModelParams, build_hamiltonian, exact_spectrum

__all__ = [
    "Rapidities",
    "BetheState",
    "BetheSpectrum",
    "richardson_residual",
    "bethe_energy",
    "solve_state",
    "solve_rapidities",
    "laguerre_seed",
    "heine_stieltjes_rapidities",
]

log = logging.getLogger(__name__)

POLE_GUARD = 1e-14
NEWTON_TOL = 1e-12
ACCEPT_TOL = 1e-10
STEP_TOL = 1e-9  # corrector tolerance on intermediate continuation points


@dataclass(frozen=True)
class Rapidities:
    """Ascending rapidities stored as ``pole + offset`` with ``pole = +-1``."""

    poles: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        p = np.ascontiguousarray(self.poles, dtype=float)
        d = np.ascontiguousarray(self.offsets, dtype=float)
        if p.shape != d.shape or p.ndim != 1:
            raise ValueError("poles and offsets must be 1-d arrays of equal length")
        if not np.all(np.abs(p) == 1.0):
            raise ValueError("poles must be +1 or -1")
        p.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "poles", p)
        object.__setattr__(self, "offsets", d)

    @classmethod
    def from_values(cls, values) -> "Rapidities":
        e = np.sort(np.asarray(values, dtype=float).ravel())
        poles = np.where(e >= 0.0, 1.0, -1.0)
        return cls(poles, e - poles)

    @property
    def values(self) -> np.ndarray:
        return self.poles + self.offsets

    def __len__(self):
        return len(self.offsets)

    def reanchored(self) -> "Rapidities":
        """Move each rapidity to its nearest pole."""
        p = self.poles.copy()
        d = self.offsets.copy()
        to_minus = (p > 0) & (d < -1.0)
        to_plus = (p < 0) & (d > 1.0)
        p[to_minus] = -1.0
        d[to_minus] += 2.0
        p[to_plus] = 1.0
        d[to_plus] -= 2.0
        return Rapidities(p, d)

    def perturbed(self, amount: float) -> "Rapidities":
        """Shift every offset by ``amount``; only used for negative testing."""
        return Rapidities(self.poles, self.offsets + amount)

    def _check_poles(self, distinct=True):
        far = np.where(self.poles > 0, 2.0 + self.offsets, 2.0 - self.offsets)
        if np.any(np.abs(self.offsets) < POLE_GUARD) or np.any(np.abs(far) < POLE_GUARD):
            raise PoleError("rapidity coincides with a pole at +-1")
        if distinct and len(self) > 1:
            gaps = np.diff(self.poles) + np.diff(self.offsets)
            if np.any(np.abs(gaps) < POLE_GUARD):
                raise PoleError("two rapidities coincide")


def _as_rapidities(rapidities) -> Rapidities:
    if isinstance(rapidities, Rapidities):
        return rapidities
    return Rapidities.from_values(rapidities)


def richardson_residual(rapidities, params: ModelParams | None = None, *, g=None, d0=None, d1=None):
    """Residual of every Richardson equation.

    ``rapidities`` is either a plain sequence of values or an anchored
    :class:`Rapidities`; the anchored form avoids cancellation in the
    distances to the poles. Couplings default to those of ``params``.
    """
    rap = _as_rapidities(rapidities)
    g, d0, d1 = _couplings(params, g, d0, d1)
    rap._check_poles()
    return kernels.richardson_residual(rap.poles, rap.offsets, g, d0, d1)


def _couplings(params, g, d0, d1):
    if params is not None:
        g = params.g if g is None else g
        d0 = params.d0 if d0 is None else d0
        d1 = params.d1 if d1 is None else d1
    if g is None or d0 is None or d1 is None:
        raise ValueError("couplings g, d0, d1 are required")
    if g == 0:
        raise ModelError("g must be nonzero")
    return float(g), float(d0), float(d1)


def bethe_energy(rapidities, params: ModelParams):
    """Energy and charge eigenvalues ``(E, r0, r1)`` of one solved state."""
    rap = _as_rapidities(rapidities)
    rap._check_poles()
    g, d0, d1 = params.g, params.d0, params.d1
    inv_minus, inv_plus = kernels.pole_inverses(rap.poles, rap.offsets)
    r0 = d0 * (1.0 - 2.0 * g * d1 - 4.0 * g * math.fsum(inv_minus))
    r1 = d1 * (1.0 + 2.0 * g * d0 + 4.0 * g * math.fsum(inv_plus))
    lam, q = params.lam, params.q
    energy = 2.0 * lam - q - 4.0 * lam * r0 + 2.0 * (q - 2.0 * lam) * r1
    return energy, r0, r1


@dataclass(frozen=True)
class BetheState:
    """One eigenstate: its rapidities, energy and charge eigenvalues.

    ``label`` is the Fock index ``k`` of the small-coupling seed the state
    was continued from; ``index`` is its position in the energy-sorted
    spectrum.
    """

    index: int
    label: int
    rapidities: Rapidities
    energy: float
    r0: float
    r1: float
    residual_norm: float

    @property
    def values(self) -> np.ndarray:
        return self.rapidities.values


@dataclass(frozen=True)
class BetheSpectrum:
    """All ``n + 1`` Bethe states of one sector, ascending in energy."""

    params: ModelParams
    states: tuple
    ed_energies: np.ndarray | None = field(default=None, repr=False)

    @property
    def energies(self) -> np.ndarray:
        return np.array([s.energy for s in self.states])

    @property
    def max_residual(self) -> float:
        return max(s.residual_norm for s in self.states)

    def energy_mismatch(self) -> float:
        """Worst relative deviation from the diagonalisation oracle."""
        if self.ed_energies is None:
            raise ValueError("spectrum was solved without the oracle cross-check")
        ed = self.ed_energies
        return float(np.max(np.abs(self.energies - ed) / np.maximum(np.abs(ed), 1.0)))


def laguerre_seed(n: int, label: int, g: float, d0: float, d1: float) -> Rapidities:
    """Small-``g`` rapidities of the state with Fock label ``label``.

    ``label`` rapidities cluster at -1 and ``n - label`` at +1; within a
    cluster ``e = pole + 2 g y`` with ``y`` the zeros of the generalised
    Laguerre polynomial of order ``2d - 1``.
    """
    if not 0 <= label <= n:
        raise ValueError(f"label must be in [0, {n}], got {label}")
    poles, offsets = [], []
    if label:
        y, _ = roots_genlaguerre(label, 2.0 * d1 - 1.0)
        poles += [-1.0] * label
        offsets += list(2.0 * g * y)
    if n - label:
        y, _ = roots_genlaguerre(n - label, 2.0 * d0 - 1.0)
        poles += [1.0] * (n - label)
        offsets += list(2.0 * g * y)
    poles = np.array(poles)
    offsets = np.array(offsets)
    order = np.argsort(poles + offsets)
    return Rapidities(poles[order], offsets[order])


def _sides(poles, offsets):
    minus_one = np.where(poles > 0, offsets, offsets - 2.0)  # e - 1
    plus_one = np.where(poles > 0, offsets + 2.0, offsets)  # e + 1
    return np.sign(minus_one), np.sign(plus_one)


def _same_cell(poles, old, new) -> bool:
    if not np.all(np.isfinite(new)):
        return False
    s_old = _sides(poles, old)
    s_new = _sides(poles, new)
    if not (np.array_equal(s_old[0], s_new[0]) and np.array_equal(s_old[1], s_new[1])):
        return False
    if len(new) > 1 and np.any(np.diff(poles) + np.diff(new) <= 0.0):
        return False
    return True


def _newton(rap: Rapidities, g, d0, d1, tol, maxiter=60):
    """Damped Newton on the Richardson system inside the current cell.

    Returns ``(rapidities, residual_norm, converged)``. The iteration stops at
    ``tol`` or when the residual stops decreasing (roundoff floor).
    """
    p = rap.poles
    d = rap.offsets
    res, jac = kernels.richardson_system(p, d, g, d0, d1)
    rnorm = float(np.max(np.abs(res)))
    stalls = 0
    for _ in range(maxiter):
        if rnorm <= tol:
            return Rapidities(p, d).reanchored(), rnorm, True
        try:
            step = lu_solve(lu_factor(jac, check_finite=False), -res, check_finite=False)
        except (LinAlgError, ValueError):
            break
        f0 = kernels.log_potential(p, d, g, d0, d1)
        slope = float(np.dot(-res / (4.0 * g), step))
        t = 1.0
        accepted = False
        while t > 1e-12:
            trial = d + t * step
            if _same_cell(p, d, trial):
                r_t, j_t = kernels.richardson_system(p, trial, g, d0, d1)
                rn_t = float(np.max(np.abs(r_t)))
                if rn_t < rnorm or kernels.log_potential(p, trial, g, d0, d1) >= f0 + 1e-4 * t * slope:
                    accepted = True
                    break
            t *= 0.5
        if not accepted:
            break
        stalls = stalls + 1 if rn_t > 0.5 * rnorm else 0
        d, res, jac, rnorm = trial, r_t, j_t, rn_t
        if stalls >= 3:
            break
    return Rapidities(p, d).reanchored(), rnorm, rnorm <= tol


def _tangent(rap: Rapidities, g, d0, d1):
    """Derivative of the rapidities along the solution branch, d e / d g."""
    res, jac = kernels.richardson_system(rap.poles, rap.offsets, g, d0, d1)
    try:
        return np.linalg.solve(jac, (1.0 - res) / g)
    except np.linalg.LinAlgError:
        return np.zeros(len(rap))


def _label_of(values, g) -> int:
    return int(np.count_nonzero(values < 1.0)) if g > 0 else int(np.count_nonzero(values < -1.0))


def heine_stieltjes_rapidities(n: int, g: float, d0: float, d1: float):
    """All root sets from the polynomial form of the Richardson equations.

    The monic polynomial with the rapidities as zeros solves
    ``(x^2-1) Q''/2 + [(d0+d1) x + d0 - d1 - (x^2-1)/(4g)] Q' + V Q = 0``
    with a linear ``V``; in the monomial basis this is an eigenproblem for
    the constant term of ``V``. Conditioning limits this to small ``n``.

    Returns a list of value arrays (unsorted by state, possibly complex for
    ill-conditioned input).
    """
    m = np.zeros((n + 1, n + 1))
    c = 1.0 / (4.0 * g)
    for j in range(n + 1):
        if j + 1 <= n:
            m[j + 1, j] = (n - j) * c
        m[j, j] = 0.5 * j * (j - 1) + (d0 + d1) * j
        if j >= 1:
            m[j - 1, j] = ((d0 - d1) + c) * j
        if j >= 2:
            m[j - 2, j] = -0.5 * j * (j - 1)
    _, vecs = np.linalg.eig(m)
    roots = []
    for col in vecs.T:
        coeffs = col[::-1]
        if abs(coeffs[0]) < 1e-300:
            continue
        roots.append(np.roots(coeffs / coeffs[0]))
    return roots


def _fallback(n, label, g, d0, d1, tol):
    log.info("polynomial fallback for label %d at g=%g", label, g)
    for roots in heine_stieltjes_rapidities(n, g, d0, d1):
        if np.max(np.abs(np.imag(roots)), initial=0.0) > 1e-6:
            continue
        values = np.sort(np.real(roots))
        if _label_of(values, g) != label:
            continue
        try:
            rap = Rapidities.from_values(values)
            rap._check_poles()
        except (PoleError, ValueError):
            continue
        rap, rnorm, _ = _newton(rap, g, d0, d1, tol, maxiter=100)
        if rnorm <= ACCEPT_TOL and _label_of(rap.values, g) == label:
            return rap, rnorm
    return None


def solve_state(n: int, label: int, g: float, d0: float = 0.25, d1: float = 0.5, *,
                eps: float = 1e-4, tol: float = NEWTON_TOL, accept: float = ACCEPT_TOL,
                steps: int = 100) -> tuple:
    """Continue the state with Fock label ``label`` from ``g = eps`` to ``g``.

    Returns ``(Rapidities, residual_norm)``.

    Raises
    ------
    ConvergenceError
        When the continuation step shrinks to nothing and the polynomial
        fallback does not recover the state either, or the final residual
        exceeds ``accept``.
    """
    if g == 0:
        raise ModelError("g must be nonzero")
    g0 = math.copysign(min(eps, abs(g)), g)
    rap = laguerre_seed(n, label, g0, d0, d1)
    rap, rnorm, ok = _newton(rap, g0, d0, d1, tol)
    if rnorm > STEP_TOL:
        rescue = _fallback(n, label, g0, d0, d1, tol)
        if rescue is None:
            raise ConvergenceError(f"state {label}: no solution at g={g0:g} (residual {rnorm:.3g})",
                                   state=label, residual=rnorm, coupling=g0)
        rap, rnorm = rescue
    gc = g0
    dg = (g - g0) / steps
    min_dg = 1e-14 * max(abs(g), abs(g0))
    while gc != g:
        gn = g if abs(g - gc) <= abs(dg) else gc + dg
        pred = rap.offsets + (gn - gc) * _tangent(rap, gc, d0, d1)
        if not _same_cell(rap.poles, rap.offsets, pred):
            pred = rap.offsets
        new, rn, _ = _newton(Rapidities(rap.poles, pred), gn, d0, d1, tol, maxiter=40)
        if rn <= STEP_TOL and _label_of(new.values, gn) == label:
            rap, rnorm, gc = new, rn, gn
            dg = math.copysign(min(abs(dg) * 1.5, abs(g - g0)), dg)
            continue
        dg *= 0.5
        if abs(dg) < min_dg:
            rescue = _fallback(n, label, gn, d0, d1, tol)
            if rescue is None:
                raise ConvergenceError(
                    f"state {label}: continuation stalled at g={gc:.6g} (residual {rn:.3g})",
                    state=label, residual=rn, coupling=gc)
            rap, rnorm = rescue
            gc = gn
            dg = (g - gc) / steps if gc != g else dg
    rap, rnorm, _ = _newton(rap, g, d0, d1, tol, maxiter=100)
    if rnorm > accept:
        rescue = _fallback(n, label, g, d0, d1, tol)
        if rescue is None:
            raise ConvergenceError(f"state {label}: final residual {rnorm:.3g} above {accept:g}",
                                   state=label, residual=rnorm, coupling=g)
        rap, rnorm = rescue
    return rap, rnorm


def solve_rapidities(params: ModelParams, *, eps: float = 1e-4, tol: float = NEWTON_TOL,
                     accept: float = ACCEPT_TOL, check: bool = True, workers: int | None = None,
                     ed_tolerance: float = 1e-8) -> BetheSpectrum:
    """Solve the Richardson equations for every eigenstate of the sector.

    With ``check`` (paired sector only) the sorted Bethe energies are compared
    with the diagonalisation oracle; the oracle never seeds the solve.
    """
    g, d0, d1, n = params.g, params.d0, params.d1, params.n

    def one(label):
        rap, rnorm = solve_state(n, label, g, d0, d1, eps=eps, tol=tol, accept=accept)
        energy, r0, r1 = bethe_energy(rap, params)
        return label, rap, rnorm, energy, r0, r1

    labels = range(n + 1)
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            solved = list(pool.map(one, labels))
    else:
        solved = [one(k) for k in labels]
    solved.sort(key=lambda item: item[3])
    states = tuple(BetheState(i, lab, rap, e, r0, r1, rn)
                   for i, (lab, rap, rn, e, r0, r1) in enumerate(solved))
    ed = None
    if check and params.paired:
        ed, _ = exact_spectrum(build_hamiltonian(params))
        spectrum = BetheSpectrum(params, states, ed)
        mismatch = spectrum.energy_mismatch()
        if mismatch > ed_tolerance:
            worst = int(np.argmax(np.abs(spectrum.energies - ed)))
            raise ConvergenceError(
                f"Bethe energies deviate from diagonalisation by {mismatch:.3g} (state {worst})",
                state=worst, residual=spectrum.max_residual, coupling=g)
        return spectrum
    return BetheSpectrum(params, states, ed)
