"""One-dimensional concave maximization shared by the betting and KL modules.

Maximizes ``lam -> sum_i w_i log(1 + lam * (v_i - m))`` over ``[lo, hi]`` by
bisection on the derivative, which is strictly decreasing in ``lam``.
Everything is vectorized over the candidate means ``m``.
"""

from __future__ import annotations

import numpy as np

MAX_ITER = 200


def maximize_sum_log(values, weights, m, lo, hi):
    """Return ``(lam_star, value, at_boundary)`` arrays, one entry per ``m``.

    ``values``/``weights`` describe the atoms (counts or probabilities);
    ``lo <= 0 <= hi`` must keep every factor ``1 + lam * (v - m)`` positive.
    """
    v = np.asarray(values, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    m = np.atleast_1d(np.asarray(m, dtype=np.float64))
    lo = np.broadcast_to(np.asarray(lo, dtype=np.float64), m.shape).copy()
    hi = np.broadcast_to(np.asarray(hi, dtype=np.float64), m.shape).copy()
    d = v[None, :] - m[:, None]

    def grad(lam):
        return (w * d / (1.0 + lam[:, None] * d)).sum(axis=1)

    g_lo = grad(lo)
    g_hi = grad(hi)
    at_lo = g_lo <= 0.0
    at_hi = (g_hi >= 0.0) & ~at_lo
    a, b = lo.copy(), hi.copy()
    interior = ~(at_lo | at_hi)
    for _ in range(MAX_ITER):
        if not interior.any():
            break
        mid = 0.5 * (a + b)
        gm = grad(mid)
        pos = gm > 0.0
        a = np.where(interior & pos, mid, a)
        b = np.where(interior & ~pos, mid, b)
        span = b - a
        done = span <= 1e-15 * np.maximum(1.0, np.abs(a))
        if (done | ~interior).all():
            break
    lam = np.where(at_lo, lo, np.where(at_hi, hi, 0.5 * (a + b)))
    # all increments zero: the objective is flat, report the origin
    flat = np.all(d == 0.0, axis=1)
    lam = np.where(flat, 0.0, lam)
    value = (w * np.log1p(lam[:, None] * d)).sum(axis=1)
    return lam, value, (at_lo | at_hi) & ~flat


def fan_lower_bound(lams, s1, s2):
    """Lower bound on ``sum log(1 + lam d)`` given ``s1 = sum d``, ``s2 = sum d^2``.

    Valid for ``|lam| < 1`` and ``|d| <= 1``: uses
    ``log(1 + u y) >= u y - 4 psi_e(u) y^2`` for ``u in [0, 1)``, ``y in [-1, 1]``.
    Shapes broadcast: ``lams`` along the last axis, ``s1``/``s2`` as column vectors.
    """
    u = np.abs(lams)
    psi4 = -np.log1p(-u) - u
    return lams * s1 - psi4 * s2
