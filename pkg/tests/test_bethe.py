import math

import numpy as np
import pytest

from sccbethe.bethe import (Rapidities, bethe_energy, heine_stieltjes_rapidities, laguerre_seed, richardson_residual,
                            solve_rapidities, solve_state)
from sccbethe.errors import ConvergenceError, ModelError, PoleError
from sccbethe.model import ModelParams, build_conserved_charges, build_hamiltonian, exact_spectrum

P2 = ModelParams(2, 1.0, 2.0)


@pytest.mark.parametrize("e, expected", [(0.0, 0.0), (3.0, 0.0), (2.0, -2.0 / 3.0)])
def test_residual_one_pair(e, expected):
    assert richardson_residual([e], P2)[0] == pytest.approx(expected, abs=1e-15)


def test_residual_pole_errors():
    with pytest.raises(PoleError):
        richardson_residual([1.0], P2)
    with pytest.raises(PoleError):
        richardson_residual([-1.0], P2)
    with pytest.raises(PoleError):
        richardson_residual([0.5, 0.5], ModelParams(4, 1.0, 2.0))


def test_residual_anchored_matches_plain():
    values = np.array([-1.7, -0.4, 0.3, 1.2, 5.0])
    p = ModelParams(10, 1.0, 3.0)
    np.testing.assert_allclose(richardson_residual(Rapidities.from_values(values), p),
                               richardson_residual(values, p), rtol=1e-13)


def test_residual_general_couplings():
    # one pair with explicit couplings: 1 + 4g(d0/(1-e) - d1/(1+e))
    g, d0, d1, e = 0.3, 0.75, 1.0, 0.2
    expected = 1 + 4 * g * (d0 / (1 - e) - d1 / (1 + e))
    assert richardson_residual([e], g=g, d0=d0, d1=d1)[0] == pytest.approx(expected)


@pytest.mark.parametrize("e, energy, r0, r1", [(0.0, 4.0, -1.0, 2.75), (3.0, -2.0, 0.5, 1.25)])
def test_bethe_energy_one_pair(e, energy, r0, r1):
    got = bethe_energy([e], P2)
    assert got == pytest.approx((energy, r0, r1), abs=1e-14)


def test_solve_one_pair():
    spectrum = solve_rapidities(P2)
    values = sorted(float(s.values[0]) for s in spectrum.states)
    assert values == pytest.approx([0.0, 3.0], abs=1e-12)
    np.testing.assert_allclose(spectrum.energies, [-2.0, 4.0], atol=1e-12)


def test_small_coupling_limits():
    g = 1e-3
    # roots of e^2 - 3 g e + g - 1 = 0
    roots = sorted([(3 * g - math.sqrt(9 * g * g - 4 * g + 4)) / 2, (3 * g + math.sqrt(9 * g * g - 4 * g + 4)) / 2])
    plus, _ = solve_state(1, 0, g)
    minus, _ = solve_state(1, 1, g)
    assert plus.values[0] == pytest.approx(roots[1], abs=1e-14)
    assert minus.values[0] == pytest.approx(roots[0], abs=1e-14)
    assert plus.values[0] - 1 == pytest.approx(g, rel=5 * g)
    assert minus.values[0] + 1 == pytest.approx(2 * g, rel=5 * g)
    seed = laguerre_seed(1, 0, g, 0.25, 0.5)
    assert seed.offsets[0] == pytest.approx(g)


@pytest.mark.parametrize("N", [2, 10, 50, 100])
@pytest.mark.parametrize("q", [4.0 / 3.0, 2.0, 6.0, 60.0, 1000.0])
def test_energies_match_oracle(N, q):
    spectrum = solve_rapidities(ModelParams(N, 1.0, q))
    assert len(spectrum.states) == N // 2 + 1
    assert spectrum.max_residual <= 1e-10
    assert spectrum.energy_mismatch() <= 1e-8


@pytest.mark.parametrize("q", [-4.0 / 3.0, -60.0, 1e5, 0.5])
def test_unusual_couplings(q):
    spectrum = solve_rapidities(ModelParams(40, 1.0, q))
    assert spectrum.max_residual <= 1e-10 and spectrum.energy_mismatch() <= 1e-8


def test_negative_collision_coupling():
    spectrum = solve_rapidities(ModelParams(30, -1.0, 4.0))
    assert spectrum.energy_mismatch() <= 1e-8


def test_rapidity_sets_distinct():
    spectrum = solve_rapidities(ModelParams(40, 1.0, 6.0))
    sets = [np.sort(s.values) for s in spectrum.states]
    for i in range(len(sets)):
        for j in range(i + 1, len(sets)):
            assert np.max(np.abs(sets[i] - sets[j])) > 1e-6


def test_charges_match_matrix_eigenvalues():
    p = ModelParams(20, 1.0, 6.0)
    spectrum = solve_rapidities(p)
    r0, r1 = build_conserved_charges(p)
    _, vectors = exact_spectrum(build_hamiltonian(p))
    for s, state in enumerate(spectrum.states):
        v = vectors[:, s]
        assert v @ r0 @ v == pytest.approx(state.r0, abs=1e-8 * max(1, abs(state.r0)))
        assert v @ r1 @ v == pytest.approx(state.r1, abs=1e-8 * max(1, abs(state.r1)))
        e = 2 * p.lam - p.q - 4 * p.lam * state.r0 + 2 * (p.q - 2 * p.lam) * state.r1
        assert e == state.energy


def test_weak_collisions_give_number_spectrum():
    spectrum = solve_rapidities(ModelParams(12, 1e-7, 1.0))
    np.testing.assert_allclose(spectrum.energies, 2.0 * np.arange(7), atol=1e-5)


def test_seniority_sector_solves_without_oracle():
    p = ModelParams(21, 1.0, 3.0, nu0=1, nu1=0)
    spectrum = solve_rapidities(p)
    assert spectrum.ed_energies is None and spectrum.max_residual <= 1e-10
    with pytest.raises(ValueError):
        spectrum.energy_mismatch()


def test_polynomial_route_agrees():
    g = 0.7
    roots = heine_stieltjes_rapidities(4, g, 0.25, 0.5)
    found = sorted(sorted(np.real(r)) for r in roots)
    solved = sorted(sorted(solve_state(4, k, g)[0].values) for k in range(5))
    np.testing.assert_allclose(found, solved, atol=1e-8)


def test_parallel_matches_serial():
    p = ModelParams(60, 1.0, 4.0 / 3.0)
    a = solve_rapidities(p)
    b = solve_rapidities(p, workers=4)
    np.testing.assert_array_equal(a.energies, b.energies)


def test_zero_coupling_rejected():
    with pytest.raises(ModelError):
        solve_state(3, 0, 0.0)


def test_convergence_error_carries_context():
    err = ConvergenceError("x", state=3, residual=0.1, coupling=2.0)
    assert (err.state, err.residual, err.coupling) == (3, 0.1, 2.0)


def test_fallback_recovers_every_label():
    from sccbethe.bethe import _fallback
    for label in range(5):
        rap, rnorm = _fallback(4, label, 0.7, 0.25, 0.5, 1e-12)
        assert rnorm <= 1e-10
        ref, _ = solve_state(4, label, 0.7)
        np.testing.assert_allclose(rap.values, ref.values, atol=1e-10)
