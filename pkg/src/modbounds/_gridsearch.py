"""Shared 1-D envelope search: dense grid plus local refinement.

Used for profiling bounds over an unknown Q0.  The closed-form and LP
paths both call this so their optimized-mode envelopes agree to the
refinement tolerance.
"""

import numpy as np


def maximize_on_interval(
    fn,
    lo: float,
    hi: float,
    n0: int = 64,
    refine_tol: float = 1e-6,
    max_rounds: int = 16,
    seeds=(),
):
    """Maximize ``fn`` on [lo, hi]; returns (argmax, max).

    Starts from an ``n0``-point inclusive grid (plus any seed points,
    e.g. analytic branch switches), then repeatedly re-grids the bracket
    around the incumbent until the improvement falls under
    ``refine_tol``.
    """
    if hi < lo:
        raise ValueError("empty interval")
    if hi == lo:
        return lo, fn(lo)
    xs = np.linspace(lo, hi, n0)
    extra = [s for s in seeds if lo <= s <= hi]
    if extra:
        xs = np.unique(np.concatenate([xs, np.asarray(extra, dtype=float)]))
    vals = np.array([fn(x) for x in xs])
    k = int(np.nanargmax(vals))
    best_x, best_val = xs[k], vals[k]
    left = xs[max(k - 1, 0)]
    right = xs[min(k + 1, xs.size - 1)]
    for _ in range(max_rounds):
        if right - left < 1e-12:
            break
        xs = np.linspace(left, right, 17)
        vals = np.array([fn(x) for x in xs])
        k = int(np.nanargmax(vals))
        improvement = vals[k] - best_val
        if vals[k] > best_val:
            best_x, best_val = xs[k], vals[k]
        left = xs[max(k - 1, 0)]
        right = xs[min(k + 1, xs.size - 1)]
        if improvement < refine_tol:
            break
    return float(best_x), float(best_val)
