"""Model parameters, paired-sector Fock basis and the diagonalisation oracle.

The paired sector holds ``n = N/2`` pairs. Basis state ``|k>`` carries ``k``
pairs of +/- bosons and ``n - k`` pairs of 0-bosons and is built as
``L+^(n-k) K+^k |0>`` with ``K+ = -a_-^dag a_+^dag``. Because of that minus
sign the hopping elements of the sector Hamiltonian are negative.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln

from .errors import ModelError

__all__ = [
    "ModelParams",
    "SectorMatrix",
    "FockNormTable",
    "build_hamiltonian",
    "exact_spectrum",
    "fock_norms",
    "build_conserved_charges",
    "pair_coupling",
]


@dataclass(frozen=True)
class ModelParams:
    """Boson number, couplings and seniorities of the SCC Hamiltonian.

    ``lam`` is the collision coupling and ``q`` the microwave dressing. The
    derived quantities ``g``, ``d0`` and ``d1`` are properties, so they can
    never drift out of sync with the stored fields.
    """

    N: int
    lam: float
    q: float
    nu0: int = 0
    nu1: int = 0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ModelError(f"boson number must be an integer >= 2, got {self.N}")
        if self.nu0 not in (0, 1):
            raise ModelError(f"nu0 must be 0 or 1, got {self.nu0}")
        if int(self.nu1) != self.nu1 or self.nu1 < 0:
            raise ModelError(f"nu1 must be a nonnegative integer, got {self.nu1}")
        if (self.N - self.nu0 - self.nu1) % 2:
            raise ModelError(
                f"N - nu0 - nu1 must be even, got N={self.N}, nu0={self.nu0}, nu1={self.nu1}")
        if (self.N - self.nu0 - self.nu1) < 2:
            raise ModelError("sector must contain at least one pair")
        if not (np.isfinite(self.lam) and np.isfinite(self.q)):
            raise ModelError("couplings must be finite")

    @property
    def n(self) -> int:
        return (int(self.N) - self.nu0 - self.nu1) // 2

    @property
    def g(self) -> float:
        if self.q == 0:
            raise ModelError("g = 2*lambda/q is undefined for q = 0")
        return 2.0 * self.lam / self.q

    @property
    def d0(self) -> float:
        return (self.nu0 + 0.5) / 2.0

    @property
    def d1(self) -> float:
        return (self.nu1 + 1.0) / 2.0

    @property
    def paired(self) -> bool:
        return self.nu0 == 0 and self.nu1 == 0

    def with_q(self, q: float) -> "ModelParams":
        return ModelParams(self.N, self.lam, q, self.nu0, self.nu1)


@dataclass(frozen=True)
class SectorMatrix:
    """Symmetric tridiagonal matrix of H in the paired Fock basis."""

    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.diag, dtype=float)
        o = np.asarray(self.offdiag, dtype=float)
        if d.ndim != 1 or o.shape != (max(len(d) - 1, 0),):
            raise ValueError("offdiag must have exactly dim - 1 entries")
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(o))):
            raise ValueError("sector matrix entries must be finite")
        d.setflags(write=False)
        o.setflags(write=False)
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", o)

    @property
    def dim(self) -> int:
        return len(self.diag)

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)


@dataclass(frozen=True)
class FockNormTable:
    """Squared norms ``N_k`` of the unnormalised Fock states, as logarithms.

    All ``N_k`` are positive, so only ``log N_k`` is kept; the raw values
    overflow doubles near ``n = 85``.
    """

    log_values: np.ndarray

    @property
    def n(self) -> int:
        return len(self.log_values) - 1

    def values(self) -> np.ndarray:
        return np.exp(self.log_values)

    def ratio(self, k1: int, k2: int) -> float:
        """``N_k1 / N_k2`` without forming either norm."""
        return float(np.exp(self.log_values[k1] - self.log_values[k2]))


def _check_paired(params: ModelParams):
    if not params.paired:
        raise ModelError("only the paired sector nu0 = nu1 = 0 is supported here")


def pair_coupling(n: int) -> np.ndarray:
    """Matrix elements of ``L+K- + L-K+`` between ``|k>`` and ``|k+1>``."""
    k = np.arange(n, dtype=float)
    m = 2.0 * (n - k)
    return 0.5 * (k + 1.0) * np.sqrt(m * (m - 1.0))


def build_hamiltonian(params: ModelParams) -> SectorMatrix:
    """Tridiagonal SCC Hamiltonian of the paired sector.

    Raises
    ------
    ModelError
        For nonzero seniorities.
    """
    _check_paired(params)
    n = params.n
    lam, q = float(params.lam), float(params.q)
    k = np.arange(n + 1, dtype=float)
    diag = 2.0 * k * (4.0 * lam * (n - k) + q - lam)
    offdiag = -4.0 * lam * pair_coupling(n)
    return SectorMatrix(diag, offdiag)


def exact_spectrum(matrix: SectorMatrix):
    """Full spectrum of a sector matrix.

    Returns ascending energies and an orthogonal matrix whose *columns* are
    the matching eigenvectors.
    """
    if matrix.dim == 1:
        return matrix.diag.copy(), np.ones((1, 1))
    energies, vectors = eigh_tridiagonal(matrix.diag, matrix.offdiag)
    return energies, vectors


def fock_norms(n: int) -> FockNormTable:
    if n < 1:
        raise ModelError(f"pair count must be >= 1, got {n}")
    k = np.arange(n + 1, dtype=float)
    logs = 2.0 * (k - n) * np.log(2.0) + gammaln(2.0 * (n - k) + 1.0) + 2.0 * gammaln(k + 1.0)
    logs.setflags(write=False)
    return FockNormTable(logs)


def build_conserved_charges(params: ModelParams):
    """Dense matrices of the two commuting charges ``R0`` and ``R1``.

    Uses the rational two-level model with level parameters +1/2 and -1/2,
    so all ``X`` and ``Y`` couplings are +-1. The Hamiltonian is recovered as
    ``2*lam - q - 4*lam*R0 + 2*(q - 2*lam)*R1``.
    """
    _check_paired(params)
    g = params.g
    n = params.n
    k = np.arange(n + 1, dtype=float)
    lz = (n - k) + 0.25
    kz = k + 0.5
    hop = np.diag(pair_coupling(n), 1)
    hop = hop + hop.T
    lzkz = np.diag(lz * kz)
    r0 = np.diag(lz) + g * (hop - 2.0 * lzkz)
    r1 = np.diag(kz) + g * (-hop + 2.0 * lzkz)
    return r0, r1
