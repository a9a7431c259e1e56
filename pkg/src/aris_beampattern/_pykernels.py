"""Pure numpy implementation of the batched kernels (fallback for ``_ckernels``)."""
from __future__ import annotations

import numpy as np


def dual_roots(w2, curv, budget, tol=1e-10, max_iter=200):
    """Multiplier eps_b >= 0 of min ||y - t||^2 s.t. sum_l c_l |y_l|^2 <= P, per row.

    Solves f(eps) = sum_l c_l w_l / (1 + eps c_l)^2 = P, where ``w2`` holds
    |t_l|^2 and ``curv`` holds c_l >= 0, both of shape (B, L); ``budget`` has
    shape (B,).  Rows with f(0) <= P get eps = 0.

    The root is bracketed by [0, sqrt(sum w/c / P)] (f(e) < sum w / (e^2 c)),
    then refined with Newton steps on
    1/sqrt(f) - 1/sqrt(P), which is concave and increasing, falling back to
    bisection whenever a step leaves the bracket.
    """
    w2 = np.ascontiguousarray(w2, dtype=float)
    curv = np.ascontiguousarray(curv, dtype=float)
    budget = np.ascontiguousarray(budget, dtype=float)
    B = w2.shape[0]
    eps = np.zeros(B)
    cw = curv * w2
    f0 = cw.sum(axis=1)
    active = np.nonzero(f0 > budget)[0]
    if active.size == 0:
        return eps
    c = curv[active]
    cw = cw[active]
    P = budget[active]

    lo = np.zeros(active.size)
    with np.errstate(divide="ignore", invalid="ignore"):
        bound = np.sum(np.where(cw > 0, w2[active] / c, 0.0), axis=1)
    hi = np.sqrt(bound / P) * (1.0 + 1e-12)

    e = lo.copy()
    todo = np.ones(active.size, dtype=bool)
    inv_sqrt_p = 1.0 / np.sqrt(P)
    for _ in range(max_iter):
        den = 1.0 + e[:, None] * c
        f = np.sum(cw / den**2, axis=1)
        done = np.abs(f - P) <= tol * P
        todo &= ~done
        if not todo.any():
            break
        fp = np.sum(c * cw / den**3, axis=1)          # -f'/2
        psi = 1.0 / np.sqrt(f) - inv_sqrt_p
        dpsi = fp / f**1.5
        below = f > P
        lo = np.where(todo & below, e, lo)
        hi = np.where(todo & ~below, e, hi)
        step = e - psi / dpsi
        ok = (step > lo) & (step < hi)
        nxt = np.where(ok, step, 0.5 * (lo + hi))
        e = np.where(todo, nxt, e)
        todo &= (hi - lo) > 1e-15 * np.maximum(hi, 1e-300)
    eps[active] = e
    return eps
