"""Fock <-> energy basis transform built from the rapidities.

Expanding the product state ``prod_a (L+/(1-e_a) - K+/(1+e_a)) |0>`` with
commuting ``L+`` and ``K+`` gives the Fock amplitude of ``L+^(n-k) K+^k|0>``
as the coefficient of ``x^k`` in ``prod_a (1/(1-e_a) - x/(1+e_a))``, a signed
elementary symmetric sum over ``k``-subsets. Both the coefficients and the
Fock norms span hundreds of decades at ``n ~ 50``, so everything is carried
as sign plus log magnitude and only ratios are exponentiated.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from . import kernels
from .bethe import BetheSpectrum, BetheState, _as_rapidities, bethe_energy, solve_state
from .errors import BasisQualityError, ModelError
from .model import ModelParams, build_hamiltonian, exact_spectrum, fock_norms

__all__ = [
    "SpectralBasis",
    "alpha_coefficients",
    "expansion_coefficients",
    "build_spectral_basis",
    "basis_from_diagonalisation",
    "row_error",
]

ROW_TOLERANCE = 1e-6


@dataclass(frozen=True)
class SpectralBasis:
    """Orthogonal transform ``c[s, k] = <k|psi_s>`` plus the energies ``E_s``.

    Rows are energy eigenstates in ascending energy, columns Fock indices.
    ``log_norms`` holds ``log N'_s`` of the unnormalised Bethe states (NaN
    for a basis taken from diagonalisation).
    """

    params: ModelParams
    energies: np.ndarray
    c: np.ndarray
    log_norms: np.ndarray
    ed_row_error: float | None = None

    def __post_init__(self):
        for name in ("energies", "c", "log_norms"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return len(self.energies) - 1

    def orthogonality_error(self) -> float:
        return float(np.max(np.abs(self.c @ self.c.T - np.eye(self.n + 1))))


def expansion_coefficients(rapidities):
    """Fock amplitudes of the unnormalised Bethe state as ``(sign, log|a|)``.

    Entry ``k`` is the coefficient of ``x^k`` in
    ``prod_a (1/(1-e_a) - x/(1+e_a))``.
    """
    rap = _as_rapidities(rapidities)
    rap._check_poles(distinct=False)
    inv_minus, inv_plus = kernels.pole_inverses(rap.poles, rap.offsets)
    return kernels.ansatz_log_coefficients(inv_minus, inv_plus)


def alpha_coefficients(rapidities):
    """Permutation sums ``alpha_k`` over the symmetric group, as ``(sign, log|alpha|)``.

    Each ``k``-subset of rapidities appears ``k! (n-k)!`` times among the
    permutations, so ``alpha_k`` is that multiple of the expansion
    coefficient; the recursion is O(n^2).
    """
    signs, logs = expansion_coefficients(rapidities)
    n = len(logs) - 1
    k = np.arange(n + 1, dtype=float)
    return signs, logs + gammaln(k + 1.0) + gammaln(n - k + 1.0)


def _row(state: BetheState, log_fock):
    signs, logs = expansion_coefficients(state.rapidities)
    weights = 2.0 * logs + log_fock
    log_norm = logsumexp(weights[np.isfinite(weights)])
    row = signs * np.exp(0.5 * (weights - log_norm))
    return row, log_norm


def row_error(row, reference) -> float:
    """Max-norm distance between two vectors, minimised over a global sign."""
    return float(min(np.max(np.abs(row - reference)), np.max(np.abs(row + reference))))


def build_spectral_basis(spectrum: BetheSpectrum, *, check: bool = True,
                         tolerance: float = ROW_TOLERANCE) -> SpectralBasis:
    """Normalised transform ``c_sk`` from the solved rapidities.

    With ``check`` every row is compared, up to sign, with the
    diagonalisation eigenvector of the same energy. A failing row is re-solved
    once with a tighter Newton tolerance before giving up.

    Raises
    ------
    BasisQualityError
        If a row still misses its oracle eigenvector by more than
        ``tolerance`` after the re-solve.
    """
    params = spectrum.params
    if not params.paired:
        raise ModelError("spectral bases are built for the paired sector only")
    n = params.n
    log_fock = fock_norms(n).log_values
    rows, log_norms = [], []
    for state in spectrum.states:
        row, log_norm = _row(state, log_fock)
        rows.append(row)
        log_norms.append(log_norm)
    c = np.array(rows)
    energies = spectrum.energies
    worst = None
    if check:
        _, vectors = exact_spectrum(build_hamiltonian(params))
        worst = 0.0
        for s, state in enumerate(spectrum.states):
            err = row_error(c[s], vectors[:, s])
            if err > tolerance:
                rap, _ = solve_state(n, state.label, params.g, params.d0, params.d1, tol=1e-14)
                retry = BetheState(s, state.label, rap, *bethe_energy(rap, params),
                                   residual_norm=state.residual_norm)
                row, log_norm = _row(retry, log_fock)
                err = row_error(row, vectors[:, s])
                if err > tolerance:
                    raise BasisQualityError(
                        f"row {s} (label {state.label}) misses the oracle eigenvector by {err:.3g}")
                c[s], log_norms[s] = row, log_norm
            worst = max(worst, err)
    return SpectralBasis(params, energies, c, np.array(log_norms), worst)


def basis_from_diagonalisation(params: ModelParams) -> SpectralBasis:
    """Oracle basis from the tridiagonal eigensolver, for cross-checks."""
    energies, vectors = exact_spectrum(build_hamiltonian(params))
    return SpectralBasis(params, energies, vectors.T, np.full(len(energies), np.nan))
