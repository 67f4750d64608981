import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sccbethe.errors import ModelError
from sccbethe.model import (ModelParams, SectorMatrix, build_conserved_charges, build_hamiltonian,
                            exact_spectrum, fock_norms)


def test_params_derived_quantities():
    p = ModelParams(4, 1.0, 2.0)
    assert p.n == 2 and p.g == 1.0 and p.d0 == 0.25 and p.d1 == 0.5 and p.paired
    s = ModelParams(5, 1.0, 2.0, nu0=1)
    assert s.n == 2 and s.d0 == 0.75


@pytest.mark.parametrize("kwargs", [dict(N=3, lam=1, q=1), dict(N=0, lam=1, q=1), dict(N=4, lam=1, q=1, nu0=2),
                                    dict(N=4, lam=float("nan"), q=1)])
def test_params_rejected(kwargs):
    with pytest.raises(ModelError):
        ModelParams(**kwargs)


def test_g_undefined_at_zero_q():
    with pytest.raises(ModelError):
        ModelParams(4, 1.0, 0.0).g


def test_hamiltonian_two_bosons():
    m = build_hamiltonian(ModelParams(2, 1.0, 2.0))
    np.testing.assert_allclose(m.diag, [0.0, 2.0])
    np.testing.assert_allclose(m.offdiag, [-2.0 * math.sqrt(2.0)])


def test_hamiltonian_without_collisions_is_number_operator():
    m = build_hamiltonian(ModelParams(4, 0.0, 3.0))
    np.testing.assert_allclose(m.diag, [0.0, 6.0, 12.0])
    np.testing.assert_allclose(m.offdiag, [0.0, 0.0])


def test_hamiltonian_four_bosons_zero_dressing():
    m = build_hamiltonian(ModelParams(4, 1.0, 0.0))
    np.testing.assert_allclose(m.diag, [0.0, 6.0, -4.0])
    np.testing.assert_allclose(m.offdiag, [-4.0 * math.sqrt(3.0), -4.0 * math.sqrt(2.0)])
    energies, _ = exact_spectrum(m)
    assert energies.sum() == pytest.approx(m.diag.sum(), abs=1e-12)


def test_hamiltonian_rejects_seniority():
    with pytest.raises(ModelError):
        build_hamiltonian(ModelParams(5, 1.0, 2.0, nu0=1))


def test_exact_spectrum_two_by_two():
    energies, vectors = exact_spectrum(build_hamiltonian(ModelParams(2, 1.0, 2.0)))
    lam, q = 1.0, 2.0
    root = math.sqrt((q - lam) ** 2 + 8 * lam ** 2)
    np.testing.assert_allclose(energies, [(q - lam) - root, (q - lam) + root])
    np.testing.assert_allclose(energies, [-2.0, 4.0])
    v = vectors[:, 1] * np.sign(vectors[0, 1])
    np.testing.assert_allclose(v, np.array([1.0, -math.sqrt(2.0)]) / math.sqrt(3.0), atol=1e-14)


def test_exact_spectrum_diagonal():
    energies, vectors = exact_spectrum(SectorMatrix([3.0, -1.0, 2.0], [0.0, 0.0]))
    np.testing.assert_allclose(energies, [-1.0, 2.0, 3.0])
    np.testing.assert_allclose(np.abs(vectors), np.eye(3)[:, [1, 2, 0]])


def test_exact_spectrum_orthogonal_at_scale():
    _, vectors = exact_spectrum(build_hamiltonian(ModelParams(400, 1.0, 4.0 / 3.0)))
    assert np.max(np.abs(vectors.T @ vectors - np.eye(len(vectors)))) <= 1e-12


def test_sector_matrix_is_read_only():
    m = build_hamiltonian(ModelParams(4, 1.0, 2.0))
    with pytest.raises(ValueError):
        m.diag[0] = 1.0
    with pytest.raises(ValueError):
        SectorMatrix([1.0, 2.0], [1.0, 2.0])


def test_fock_norms_small():
    np.testing.assert_allclose(fock_norms(1).values(), [0.5, 1.0])
    np.testing.assert_allclose(fock_norms(2).values(), [1.5, 0.5, 4.0])
    table = fock_norms(7)
    assert table.values()[-1] == pytest.approx(math.factorial(7) ** 2)
    assert table.ratio(0, 1) == pytest.approx(table.values()[0] / table.values()[1])


def test_fock_norms_finite_at_large_n():
    logs = fock_norms(1000).log_values
    assert np.all(np.isfinite(logs))
    with pytest.raises(ModelError):
        fock_norms(0)


def test_charges_two_bosons():
    r0, r1 = build_conserved_charges(ModelParams(2, 1.0, 2.0))
    np.testing.assert_allclose(np.linalg.eigvalsh(r0), [-1.0, 0.5], atol=1e-14)
    np.testing.assert_allclose(np.linalg.eigvalsh(r1), [1.25, 2.75], atol=1e-14)


def test_charges_reconstruct_hamiltonian_at_scale():
    p = ModelParams(100, 1.0, 4.0 / 3.0)
    r0, r1 = build_conserved_charges(p)
    h = build_hamiltonian(p).dense()
    rebuilt = (2 * p.lam - p.q) * np.eye(len(h)) - 4 * p.lam * r0 + 2 * (p.q - 2 * p.lam) * r1
    assert np.max(np.abs(rebuilt - h)) <= 1e-12
    with pytest.raises(ModelError):
        build_conserved_charges(ModelParams(4, 1.0, 0.0))


@settings(max_examples=100, deadline=None)
@given(lam=st.floats(-5, 5).filter(lambda x: abs(x) > 1e-3), q=st.floats(-50, 50).filter(lambda x: abs(x) > 1e-2),
       n=st.integers(1, 20))
def test_reconstruction_random_couplings(lam, q, n):
    p = ModelParams(2 * n, lam, q)
    r0, r1 = build_conserved_charges(p)
    h = build_hamiltonian(p).dense()
    rebuilt = (2 * lam - q) * np.eye(n + 1) - 4 * lam * r0 + 2 * (q - 2 * lam) * r1
    scale = max(1.0, np.max(np.abs(h)))
    assert np.max(np.abs(rebuilt - h)) <= 1e-12 * scale
    assert np.max(np.abs(r0 @ r1 - r1 @ r0)) <= 1e-12 * np.max(np.abs(r0)) * np.max(np.abs(r1)) * (n + 1)
    k = np.arange(n + 1)
    assert np.trace(h) == pytest.approx(np.sum(2 * k * (4 * lam * (n - k) + q - lam)), rel=1e-12, abs=1e-9)
