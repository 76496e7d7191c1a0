"""Compiled per-step updates for confidence sequences over an m-grid.

Grid points whose log-wealth reaches the threshold are deactivated for good
and never touched again, so the cost of a step is proportional to the number
of points still inside the running interval.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def mixture_step(L, lam, log_w, log_wealth, active, ms, x, t, thr):
    """Advance every active grid point by one observation ``x`` at time ``t``.

    ``L[g, k]`` holds the log-wealth of the constant bet ``lam[g, k]``; the
    bet actually placed is their wealth-weighted average (zero at t = 1).
    """
    G, K = L.shape
    for g in range(G):
        if not active[g]:
            continue
        d = x - ms[g]
        if t > 1:
            mx = -np.inf
            for k in range(K):
                a = L[g, k] + log_w[k]
                if a > mx:
                    mx = a
            num = 0.0
            den = 0.0
            for k in range(K):
                e = np.exp(L[g, k] + log_w[k] - mx)
                num += e * lam[g, k]
                den += e
            bet = num / den
            if bet < lam[g, 0]:
                bet = lam[g, 0]
            elif bet > lam[g, K - 1]:
                bet = lam[g, K - 1]
            log_wealth[g] += np.log1p(bet * d)
        for k in range(K):
            L[g, k] += np.log1p(lam[g, k] * d)
        if log_wealth[g] >= thr:
            active[g] = False


@njit(cache=True)
def constant_step(bets, log_wealth, active, ms, x, thr):
    G = ms.shape[0]
    for g in range(G):
        if not active[g]:
            continue
        log_wealth[g] += np.log1p(bets[g] * (x - ms[g]))
        if log_wealth[g] >= thr:
            active[g] = False


@njit(cache=True)
def outer_hull(active, ms, log_wealth):
    """Grid hull of the active set, widened to the rejected neighbours.

    Returns ``(lower, upper, empty)``; when nothing is active the degenerate
    interval sits at the grid point of least wealth.
    """
    G = ms.shape[0]
    first = -1
    last = -1
    for g in range(G):
        if active[g]:
            if first < 0:
                first = g
            last = g
    if first < 0:
        best = 0
        for g in range(1, G):
            if log_wealth[g] < log_wealth[best]:
                best = g
        return ms[best], ms[best], True
    lo = ms[first - 1] if first > 0 else ms[0]
    hi = ms[last + 1] if last < G - 1 else ms[G - 1]
    return lo, hi, False


@njit(cache=True)
def mixture_path(xs, L, lam, log_w, log_wealth, active, ms, thr, out_lo, out_hi):
    """Run a whole stream; writes the running interval after each step."""
    run_lo = 0.0
    run_hi = 1.0
    for i in range(xs.shape[0]):
        mixture_step(L, lam, log_w, log_wealth, active, ms, xs[i], i + 1, thr)
        lo, hi, _ = outer_hull(active, ms, log_wealth)
        run_lo, run_hi = _intersect(run_lo, run_hi, lo, hi)
        out_lo[i] = run_lo
        out_hi[i] = run_hi


@njit(cache=True)
def constant_path(xs, bets, log_wealth, active, ms, thr, out_lo, out_hi):
    run_lo = 0.0
    run_hi = 1.0
    for i in range(xs.shape[0]):
        constant_step(bets, log_wealth, active, ms, xs[i], thr)
        lo, hi, _ = outer_hull(active, ms, log_wealth)
        run_lo, run_hi = _intersect(run_lo, run_hi, lo, hi)
        out_lo[i] = run_lo
        out_hi[i] = run_hi


@njit(cache=True)
def _intersect(a_lo, a_hi, b_lo, b_hi):
    lo = max(a_lo, b_lo)
    hi = min(a_hi, b_hi)
    if hi < lo:
        mid = 0.5 * (lo + hi)
        return mid, mid
    return lo, hi
