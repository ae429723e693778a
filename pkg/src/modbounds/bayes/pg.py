"""Exact Polya-Gamma sampling via the alternating-series rejection method.

PG(1, c) is drawn as J*(1, |c|/2) / 4, where J* is the tilted Jacobi
variable.  Proposals mix a truncated inverse-Gaussian body with an
exponential tail split at t = 0.64; the alternating partial sums of the
series density decide acceptance.  Everything is vectorized over flat
arrays with boolean masks, since the Gibbs sweeps need millions of
draws.  PG(b, c) for integer b >= 2 sums b independent PG(1, c) draws.
"""

import logging

import numpy as np
from scipy.special import ndtr

log = logging.getLogger(__name__)

try:  # compiled scalar kernel; the numpy path below is the fallback
    from ._pg_numba import pg1_batch as _pg1_compiled
except ImportError:  # pragma: no cover
    _pg1_compiled = None

_T = 0.64
_RT = np.sqrt(_T)
_MAX_PROPOSALS = 200
_MAX_SERIES = 200


def _tail_probability(z):
    """P(exponential-tail branch) in the two-part proposal mixture.

    The body mass is 2 e^{-z} F_IG(t; 1/z, 1), expanded so no term
    overflows for z up to several hundred; where both masses underflow
    the body dominates, so the ratio tends to 0.
    """
    z = np.minimum(z, 500.0)
    k = np.pi**2 / 8.0 + z**2 / 2.0
    tail = np.pi / (2.0 * k) * np.exp(-k * _T)
    body = 2.0 * (
        np.exp(-z) * ndtr((z * _T - 1.0) / _RT)
        + np.exp(z) * ndtr(-(z * _T + 1.0) / _RT)
    )
    total = tail + body
    with np.errstate(invalid="ignore"):
        ratio = np.where(total > 0.0, tail / np.maximum(total, 1e-300), 0.0)
    return ratio, k


def _series_coef(n, x):
    """a_n(x), the n-th alternating-series coefficient, piecewise at t."""
    half = n + 0.5
    out = np.empty_like(x)
    left = x <= _T
    xl = x[left]
    with np.errstate(divide="ignore"):
        out[left] = (
            np.pi
            * half
            * np.power(2.0 / (np.pi * xl), 1.5)
            * np.exp(-2.0 * half**2 / xl)
        )
    xr = x[~left]
    out[~left] = np.pi * half * np.exp(-(half**2) * np.pi**2 * xr / 2.0)
    return out


def _sample_trunc_ig(z, rng):
    """Inverse-Gaussian(1/z, 1) restricted to (0, t], vectorized."""
    out = np.empty_like(z)
    todo = np.ones(z.size, dtype=bool)
    small = z < 1.0 / _T  # mean above the truncation point
    # small-z: sample the one-sided stable body and thin by the z-tilt
    idx = np.where(todo & small)[0]
    while idx.size:
        e1 = rng.standard_exponential(idx.size)
        e2 = rng.standard_exponential(idx.size)
        ok_pair = e1**2 <= 2.0 * e2 / _T
        x = _T / (1.0 + _T * e1) ** 2
        accept = ok_pair & (
            rng.uniform(size=idx.size) <= np.exp(-0.5 * z[idx] ** 2 * x)
        )
        out[idx[accept]] = x[accept]
        todo[idx[accept]] = False
        idx = idx[~accept]
    # large-z: standard transform sampler, retry while above t
    idx = np.where(todo & ~small)[0]
    while idx.size:
        mu = 1.0 / z[idx]
        nu = rng.standard_normal(idx.size)
        y = nu**2
        x = mu + 0.5 * mu**2 * y - 0.5 * mu * np.sqrt(
            4.0 * mu * y + (mu * y) ** 2
        )
        flip = rng.uniform(size=idx.size) > mu / (mu + x)
        x = np.where(flip, mu**2 / np.maximum(x, 1e-300), x)
        accept = x <= _T
        out[idx[accept]] = x[accept]
        todo[idx[accept]] = False
        idx = idx[~accept]
    return out


def _series_decide(x, rng):
    """Alternating-series accept/reject; True where x is accepted."""
    s = _series_coef(0, x)
    y = rng.uniform(size=x.size) * s
    accepted = np.zeros(x.size, dtype=bool)
    undecided = np.ones(x.size, dtype=bool)
    for n in range(1, _MAX_SERIES + 1):
        if not undecided.any():
            break
        a = _series_coef(n, x)
        if n % 2 == 1:
            s = s - a
            hit = undecided & (y <= s)
            accepted[hit] = True
            undecided &= ~hit
        else:
            s = s + a
            miss = undecided & (y > s)
            undecided &= ~miss
    # coefficients decay doubly exponentially; an undecided element means
    # the partial sums collapsed numerically, where acceptance is certain
    accepted[undecided] = True
    return accepted


def _pg_fallback(c, rng, terms=200):
    """Truncated-sum approximation used if rejection fails to settle."""
    k = np.arange(1, terms + 1)
    denom = (k - 0.5) ** 2 + (c / (2.0 * np.pi)) ** 2
    g = rng.standard_exponential(terms)
    return float((g / denom).sum() / (2.0 * np.pi**2))


def _pg1_vector(c, rng):
    """One PG(1, c_i) draw per element of c."""
    z = np.abs(np.asarray(c, dtype=float)) / 2.0
    tail_p, k = _tail_probability(z)
    out = np.empty_like(z)
    pending = np.arange(z.size)
    for _ in range(_MAX_PROPOSALS):
        if pending.size == 0:
            break
        zp = z[pending]
        use_tail = rng.uniform(size=pending.size) < tail_p[pending]
        x = np.empty(pending.size)
        n_tail = int(use_tail.sum())
        if n_tail:
            x[use_tail] = (
                _T + rng.standard_exponential(n_tail) / k[pending][use_tail]
            )
        if n_tail < pending.size:
            x[~use_tail] = _sample_trunc_ig(zp[~use_tail], rng)
        accept = _series_decide(x, rng)
        out[pending[accept]] = x[accept] / 4.0
        pending = pending[~accept]
    else:
        log.warning(
            "PG rejection did not settle for %d draws; using the "
            "truncated-sum approximation",
            pending.size,
        )
        for i in pending:
            out[i] = _pg_fallback(2.0 * z[i], rng)
    return out


def pg_draw(b: int, c, rng, size=None):
    """Sample from the Polya-Gamma distribution PG(b, c).

    ``b`` must be a positive integer (the augmentation schemes here only
    need b = 1).  With ``size=None`` and scalar ``c`` a float is
    returned; otherwise an array of shape ``size`` (or of ``c``'s shape).
    The mean is tanh(c/2)/(2c), with limit b/4 at c = 0.  Uses the
    compiled scalar kernel when numba is importable, the vectorized
    numpy path otherwise; both implement the same rejection sampler.
    """
    if int(b) != b or b < 1:
        raise ValueError("b must be a positive integer")
    b = int(b)
    scalar = np.isscalar(c) and size is None
    c_arr = np.ascontiguousarray(
        np.broadcast_to(
            np.asarray(c, dtype=float),
            size if size is not None else np.shape(c),
        ).ravel()
    )
    if c_arr.size == 0:
        return np.empty(0)
    sample = _pg1_compiled if _pg1_compiled is not None else _pg1_vector
    total = sample(c_arr, rng)
    for _ in range(b - 1):
        total = total + sample(c_arr, rng)
    if scalar:
        return float(total[0])
    shape = size if size is not None else np.shape(c)
    return total.reshape(shape)


def pg_mean(b: int, c: float) -> float:
    """E[PG(b, c)] = b tanh(c/2) / (2c), with the c -> 0 limit b/4."""
    if c == 0.0:
        return b / 4.0
    return b * np.tanh(c / 2.0) / (2.0 * c)
