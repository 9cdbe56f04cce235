"""Brute-force reference implementations used as independent oracles.

They work on dense float grids with numpy and share no code with the library
beyond reading a step function's jump list.
"""

from __future__ import annotations

import math

import numpy as np


def evaluate(f, xs) -> np.ndarray:
    """Left-continuous evaluation: value of the last jump strictly below x."""
    locs = np.array([float(l) for l, _ in f.jumps])
    vals = np.array([0.0] + [float(v) for _, v in f.jumps])
    return vals[np.searchsorted(locs, np.asarray(xs, dtype=float), side="left")]


def _levy_ok(f, g, w: float) -> bool:
    lo, hi = -1 / w, 1 / w
    anchors = [float(l) for l, _ in g.jumps] + [float(l) + s for l, _ in f.jumps for s in (w, -w)]
    anchors = [a for a in anchors if math.isfinite(a)]
    a_lo = min(anchors + [0.0]) - 2
    a_hi = max(anchors + [0.0]) + 2
    xs = [np.linspace(max(lo, a_lo), min(hi, a_hi), 4001)]
    offsets = np.array([1e-12, 1e-10, 1e-8, 1e-6, 1e-4, 1e-2])
    for a in anchors + [lo, hi]:
        xs.append(a + offsets)
        xs.append(a - offsets)
    x = np.concatenate(xs)
    x = x[(x > lo) & (x < hi)]
    gx = evaluate(g, x)
    return bool(np.all(evaluate(f, x - w) - w <= gx) and np.all(gx <= evaluate(f, x + w) + w))


def levy_oracle(f, g, iterations: int = 40) -> float:
    """Bisection on w with dense-grid feasibility checks in both directions."""
    lo, hi = 0.0, 1.0
    for _ in range(iterations):
        mid = (lo + hi) / 2
        if _levy_ok(f, g, mid) and _levy_ok(g, f, mid):
            hi = mid
        else:
            lo = mid
    return hi


def sup_convolution_oracle(F, G, T, xs, step: float = 1e-4, span: float = 8.0) -> np.ndarray:
    """``sup_u T(F(u), G(x - u))`` over a dense u grid, for each x."""
    u = np.arange(-0.5, span, step)
    Fu = evaluate(F, u)
    out = []
    for x in xs:
        out.append(float(np.max(T(Fu, evaluate(G, x - u)))))
    return np.array(out)


TNORM_ARRAYS = {
    "min": np.minimum,
    "prod": lambda a, b: a * b,
    "luk": lambda a, b: np.maximum(a + b - 1, 0.0),
}


def window_count(members, lam, n: int) -> int:
    """Count members in [n - lam(n) + 1, n] one index at a time."""
    lo = n - lam(n) + 1
    return sum(1 for k in range(lo, n + 1) if members(k))
