"""Convergence summaries for posterior draws: R-hat and bulk ESS."""

import numpy as np

from .model import PosteriorDraws


def _per_chain(values, chain):
    """Stack per-chain series, dropping NaNs and equalizing lengths."""
    ids = np.unique(chain)
    series = []
    for c in ids:
        v = values[chain == c]
        series.append(v[~np.isnan(v)])
    length = min(s.size for s in series)
    if length < 4:
        return None
    return np.stack([s[:length] for s in series])


def rhat(matrix) -> float:
    """Potential scale reduction over whole chains.

    Defined so that zero between-chain variance gives exactly 1:
    sqrt(1 + (1 + 1/m) B / (n W)) with B the between- and W the
    within-chain variance.
    """
    matrix = np.asarray(matrix, dtype=float)
    m, n = matrix.shape
    if m < 2 or n < 2:
        return np.nan
    w = matrix.var(axis=1, ddof=1).mean()
    b = n * matrix.mean(axis=1).var(ddof=1)
    if b == 0.0:
        return 1.0
    if w == 0.0:
        return np.inf
    return float(np.sqrt(1.0 + (1.0 + 1.0 / m) * b / (n * w)))


def bulk_ess(matrix) -> float:
    """Effective sample size from chain-averaged autocorrelations.

    Uses the usual variance estimate combining within- and between-chain
    pieces and Geyer's initial monotone positive sequence to truncate
    the autocorrelation sum.
    """
    matrix = np.asarray(matrix, dtype=float)
    m, n = matrix.shape
    if n < 4:
        return np.nan
    centered = matrix - matrix.mean(axis=1, keepdims=True)
    size = 2 ** int(np.ceil(np.log2(2 * n)))
    f = np.fft.rfft(centered, size, axis=1)
    acov = np.fft.irfft(f * np.conj(f), size, axis=1)[:, :n].real / n
    acov_mean = acov.mean(axis=0)
    w = matrix.var(axis=1, ddof=1).mean()
    var_plus = w * (n - 1) / n
    if m > 1:
        var_plus += matrix.mean(axis=1).var(ddof=1)
    if var_plus <= 0.0:
        return np.nan
    rho = 1.0 - (w - acov_mean) / var_plus
    # Geyer: sum lag pairs (rho_1+rho_2), (rho_3+rho_4), ... while the
    # pair sums stay positive and non-increasing
    total = 0.0
    prev = np.inf
    for k in range(1, n - 2, 2):
        pair = rho[k] + rho[k + 1]
        if pair < 0.0:
            break
        pair = min(pair, prev)
        total += pair
        prev = pair
    tau = 1.0 + 2.0 * total
    return float(m * n / max(tau, 1e-12))


def diagnostics(draws: PosteriorDraws) -> dict:
    """Split-free R-hat and bulk ESS for the deltas and every coefficient."""
    if draws.n_chains < 2:
        raise ValueError("diagnostics need at least 2 chains")
    scalars = {
        "delta_population": draws.delta_population,
        "delta_insample": draws.delta_insample,
    }
    scalars.update(draws.coefficients)
    out_rhat, out_ess = {}, {}
    for name, values in scalars.items():
        matrix = _per_chain(values, draws.chain)
        if matrix is None:
            out_rhat[name] = np.nan
            out_ess[name] = np.nan
            continue
        out_rhat[name] = rhat(matrix)
        out_ess[name] = bulk_ess(matrix)
    return {"rhat": out_rhat, "ess": out_ess}
