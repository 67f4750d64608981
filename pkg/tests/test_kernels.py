import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sccbethe import _kernels_py, kernels

compiled = pytest.importorskip("sccbethe._kernels")


def anchored(draw_offsets, signs):
    poles = np.where(np.asarray(signs), 1.0, -1.0)
    values = poles + np.asarray(draw_offsets)
    order = np.argsort(values)
    return poles[order], np.asarray(draw_offsets)[order]


offsets = st.lists(st.floats(-0.95, 0.95).filter(lambda x: abs(x) > 1e-3), min_size=1, max_size=12, unique=True)


@settings(max_examples=200, deadline=None)
@given(offsets, st.data(), st.floats(-20, 20).filter(lambda x: abs(x) > 1e-3))
def test_richardson_parity(offs, data, g):
    signs = data.draw(st.lists(st.booleans(), min_size=len(offs), max_size=len(offs)))
    poles, offs = anchored(offs, signs)
    if len(offs) > 1 and np.min(np.abs(np.diff(poles + offs))) < 1e-6:
        return
    r_py, j_py = _kernels_py.richardson_system(poles, offs, g, 0.25, 0.5)
    r_c, j_c = compiled.richardson_system(poles, offs, g, 0.25, 0.5)
    scale = 1.0 + np.max(np.abs(r_py))
    np.testing.assert_allclose(r_c, r_py, rtol=1e-12, atol=1e-12 * scale)
    np.testing.assert_allclose(j_c, j_py, rtol=1e-12, atol=1e-12 * np.max(np.abs(j_py)))
    np.testing.assert_allclose(compiled.richardson_residual(poles, offs, g, 0.25, 0.5), r_c, rtol=0, atol=0)
    assert compiled.log_potential(poles, offs, g, 0.25, 0.5) == pytest.approx(
        _kernels_py.log_potential(poles, offs, g, 0.25, 0.5), rel=1e-12, abs=1e-10)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3)), min_size=1, max_size=40))
def test_ansatz_coefficient_parity(pairs):
    a = np.array([p[0] for p in pairs])
    b = np.array([p[1] for p in pairs])
    s_py, l_py = _kernels_py.ansatz_log_coefficients(a, b)
    s_c, l_c = compiled.ansatz_log_coefficients(a, b)
    np.testing.assert_array_equal(s_c, s_py)
    finite = np.isfinite(l_py)
    np.testing.assert_array_equal(finite, np.isfinite(l_c))
    np.testing.assert_allclose(l_c[finite], l_py[finite], rtol=1e-12, atol=1e-10)


def test_ansatz_coefficients_small_product():
    # (2 - 3x)(1 + x) = 2 - x - 3x^2
    signs, logs = kernels.ansatz_log_coefficients(np.array([2.0, 1.0]), np.array([3.0, -1.0]))
    np.testing.assert_allclose(signs * np.exp(logs), [2.0, -1.0, -3.0])


def test_ansatz_coefficients_survive_huge_products():
    a = np.full(400, 1e200)
    signs, logs = kernels.ansatz_log_coefficients(a, np.zeros(400))
    assert signs[0] == 1.0 and logs[0] == pytest.approx(400 * np.log(1e200))
    assert np.all(np.isneginf(logs[1:]))


def test_pole_inverses_anchor_precision():
    # e = 1 - 1e-13: the anchored form keeps full relative precision
    inv_minus, inv_plus = kernels.pole_inverses(np.array([1.0]), np.array([-1e-13]))
    assert inv_minus[0] == pytest.approx(1e13, rel=1e-15)
    assert inv_plus[0] == pytest.approx(1.0 / (2.0 - 1e-13), rel=1e-15)


def test_backend_switch():
    code = "import sccbethe.kernels as k; print(k.BACKEND)"
    env = dict(os.environ, SCCBETHE_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
    env["SCCBETHE_PURE_PYTHON"] = "0"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "compiled"
