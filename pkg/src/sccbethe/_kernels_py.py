"""Pure-numpy kernels. Reference implementation for the compiled module.

Rapidities are stored anchored to their nearest pole: ``e = pole + offset``
with ``pole`` in {-1, +1}. Distances to the poles and pairwise differences
are then formed without cancellation, which is what keeps the Richardson
residual at the 1e-12 level when rapidities crowd against +-1.
"""
import numpy as np


def pole_inverses(poles, offsets):
    """Return ``1/(1 - e)`` and ``1/(1 + e)`` for anchored rapidities."""
    up = poles > 0
    # both branches are evaluated; the discarded one may divide by zero
    with np.errstate(divide="ignore"):
        inv_minus = np.where(up, -1.0 / offsets, 1.0 / (2.0 - offsets))
        inv_plus = np.where(up, 1.0 / (2.0 + offsets), 1.0 / offsets)
    return inv_minus, inv_plus


def _pair_inverse(poles, offsets):
    diff = (poles[:, None] - poles[None, :]) + (offsets[:, None] - offsets[None, :])
    np.fill_diagonal(diff, np.inf)
    return 1.0 / diff


def richardson_residual(poles, offsets, g, d0, d1):
    inv_minus, inv_plus = pole_inverses(poles, offsets)
    inv = _pair_inverse(poles, offsets)
    return 1.0 + 4.0 * g * (d0 * inv_minus - d1 * inv_plus) - 4.0 * g * inv.sum(axis=1)


def richardson_system(poles, offsets, g, d0, d1):
    """Residual vector and Jacobian with respect to the rapidities."""
    inv_minus, inv_plus = pole_inverses(poles, offsets)
    inv = _pair_inverse(poles, offsets)
    res = 1.0 + 4.0 * g * (d0 * inv_minus - d1 * inv_plus) - 4.0 * g * inv.sum(axis=1)
    inv2 = inv * inv
    jac = -4.0 * g * inv2
    np.fill_diagonal(jac, 4.0 * g * (d0 * inv_minus**2 + d1 * inv_plus**2 + inv2.sum(axis=1)))
    return res, jac


def log_potential(poles, offsets, g, d0, d1):
    """Electrostatic potential whose gradient is ``-residual / (4 g)``."""
    n = len(offsets)
    up = poles > 0
    dist_minus = np.where(up, np.abs(offsets), np.abs(2.0 - offsets))
    dist_plus = np.where(up, np.abs(2.0 + offsets), np.abs(offsets))
    iu = np.triu_indices(n, 1)
    diff = (poles[:, None] - poles[None, :]) + (offsets[:, None] - offsets[None, :])
    pair = np.log(np.abs(diff[iu])).sum() if n > 1 else 0.0
    return (pair + d0 * np.log(dist_minus).sum() + d1 * np.log(dist_plus).sum()
            - (poles + offsets).sum() / (4.0 * g))


def ansatz_log_coefficients(a, b):
    """Coefficients of ``prod_i (a_i - x b_i)`` as sign and log-magnitude.

    The running coefficient vector is renormalised by its largest entry
    after every factor, with the scale accumulated in log space.
    """
    n = len(a)
    coef = np.zeros(n + 1)
    coef[0] = 1.0
    log_scale = 0.0
    for i in range(n):
        ai, bi = a[i], b[i]
        new = np.empty(i + 2)
        new[0] = ai * coef[0]
        new[1:i + 1] = ai * coef[1:i + 1] - bi * coef[:i]
        new[i + 1] = -bi * coef[i]
        peak = np.abs(new).max()
        if peak == 0.0:
            return np.zeros(n + 1), np.full(n + 1, -np.inf)
        log_scale += np.log(peak)
        coef[:i + 2] = new / peak
    with np.errstate(divide="ignore"):
        logs = np.log(np.abs(coef)) + log_scale
    return np.sign(coef), logs
