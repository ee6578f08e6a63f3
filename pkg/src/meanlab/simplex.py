"""Box-bounded Nelder-Mead minimisation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

REFLECT, EXPAND, CONTRACT, SHRINK = 1.0, 2.0, 0.5, 0.5


@dataclass
class SimplexResult:
    x: np.ndarray
    fun: float
    evaluations: int
    iterations: int
    converged: bool


def nelder_mead(f, x0, lower, upper, *, step=0.1, max_iter: int = 500, xtol: float = 1e-10) -> SimplexResult:
    """Minimise ``f`` over the box ``[lower, upper]``.

    Trial points are clamped into the box. The start point is vertex 0 and
    ties keep the earlier vertex, so the returned value is never worse than
    ``f(x0)`` and a start that cannot be improved is returned unchanged.
    NaN objective values count as ``+inf``. Stops after ``max_iter``
    iterations or when the simplex diameter (max-norm) drops below ``xtol``.
    """
    lower = np.asarray(lower, dtype=np.float64)
    upper = np.asarray(upper, dtype=np.float64)
    x0 = np.clip(np.asarray(x0, dtype=np.float64), lower, upper)
    n = x0.size
    evals = 0

    def fun(x):
        nonlocal evals
        evals += 1
        y = float(f(x))
        return math.inf if math.isnan(y) else y

    f0 = fun(x0)
    if max_iter <= 0 or n == 0:
        return SimplexResult(x0, f0, evals, 0, False)

    steps = np.broadcast_to(np.asarray(step, dtype=np.float64), (n,))
    pts = [x0]
    for i in range(n):
        x = x0.copy()
        x[i] += steps[i]
        if x[i] > upper[i]:
            x[i] = x0[i] - steps[i]
        x = np.clip(x, lower, upper)
        pts.append(x)
    vals = [f0] + [fun(x) for x in pts[1:]]

    it = 0
    converged = False
    while it < max_iter:
        order = sorted(range(n + 1), key=lambda k: vals[k])
        pts = [pts[k] for k in order]
        vals = [vals[k] for k in order]
        if max(np.max(np.abs(p - pts[0])) for p in pts[1:]) < xtol:
            converged = True
            break
        it += 1
        centroid = np.mean(pts[:-1], axis=0)
        worst = pts[-1]
        xr = np.clip(centroid + REFLECT * (centroid - worst), lower, upper)
        fr = fun(xr)
        if fr < vals[0]:
            xe = np.clip(centroid + EXPAND * (xr - centroid), lower, upper)
            fe = fun(xe)
            pts[-1], vals[-1] = (xe, fe) if fe < fr else (xr, fr)
        elif fr < vals[-2]:
            pts[-1], vals[-1] = xr, fr
        else:
            if fr < vals[-1]:
                xc = np.clip(centroid + CONTRACT * (xr - centroid), lower, upper)
            else:
                xc = np.clip(centroid + CONTRACT * (worst - centroid), lower, upper)
            fc = fun(xc)
            if fc < min(fr, vals[-1]):
                pts[-1], vals[-1] = xc, fc
            else:
                best = pts[0]
                for k in range(1, n + 1):
                    pts[k] = np.clip(best + SHRINK * (pts[k] - best), lower, upper)
                    vals[k] = fun(pts[k])
    k = min(range(n + 1), key=lambda j: vals[j])
    return SimplexResult(pts[k], vals[k], evals, it, converged)
