"""Bootstrap endpoint variances and Imbens-Manski confidence intervals.

The interval targets the partially identified parameter, not the bounds:
its critical value solves

    Phi(c + sqrt(n) * width / max(sigma_L, sigma_U)) - Phi(-c) = 1 - alpha

so c interpolates between the one-sided and two-sided normal quantiles
as the identified set widens relative to sampling noise.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr
from scipy.stats import norm

from .data_model import records_to_arrays, tabulate_arrays
from .errors import NoRoot, TooManyFailedReplicates


@dataclass(frozen=True)
class BootstrapResult:
    sigma_lower: float
    sigma_upper: float
    replicates: np.ndarray  # shape (successes, 2)
    n_failed: int
    B: int
    seed: int


@dataclass(frozen=True)
class ImCi:
    ci_lower: float
    ci_upper: float
    alpha: float
    c_factor: float
    sigma_lower: float
    sigma_upper: float
    B: int | None = None
    seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "ci_lower": self.ci_lower,
            "ci_upper": self.ci_upper,
            "alpha": self.alpha,
            "c_factor": self.c_factor,
            "sigma_lower": self.sigma_lower,
            "sigma_upper": self.sigma_upper,
            "B": self.B,
            "seed": self.seed,
        }


def bootstrap_endpoints(
    records,
    procedure,
    B: int,
    seed: int,
    stratify: bool = False,
) -> BootstrapResult:
    """Nonparametric bootstrap of a bound procedure's endpoints.

    ``procedure`` maps a CellTable to an object with lower/upper
    attributes.  Each replicate resamples records with replacement using
    its own stream spawned from (seed, replicate), so results do not
    depend on execution order.  Replicates where the procedure raises
    (empty cells, infeasible noise) are dropped and counted; more than
    10% failures aborts.
    """
    if B < 2:
        raise ValueError("need at least 2 bootstrap replicates")
    arr = records_to_arrays(records)
    n = arr["y"].size
    t, z, d, y = arr["t"], arr["z"], arr["d"], arr["y"]
    groups = None
    if stratify:
        groups = [
            np.where((t == tv) & (z == zv))[0]
            for tv in (0, 1)
            for zv in (0, 1)
        ]
        groups = [g for g in groups if g.size]
    streams = np.random.SeedSequence(seed).spawn(B)
    endpoints = []
    failed = 0
    for b in range(B):
        rng = np.random.default_rng(streams[b])
        if groups is None:
            idx = rng.integers(0, n, n)
        else:
            idx = np.concatenate(
                [g[rng.integers(0, g.size, g.size)] for g in groups]
            )
        try:
            table = tabulate_arrays(t[idx], z[idx], d[idx], y[idx])
            interval = procedure(table)
        except Exception:
            failed += 1
            continue
        endpoints.append((interval.lower, interval.upper))
    if failed > 0.10 * B:
        raise TooManyFailedReplicates(failed, B)
    reps = np.asarray(endpoints, dtype=float)
    return BootstrapResult(
        sigma_lower=float(reps[:, 0].std(ddof=1)),
        sigma_upper=float(reps[:, 1].std(ddof=1)),
        replicates=reps,
        n_failed=failed,
        B=B,
        seed=seed,
    )


def imbens_manski_ci(
    lower: float,
    upper: float,
    sigma_lower: float,
    sigma_upper: float,
    n: int,
    alpha: float,
) -> ImCi:
    """Confidence interval with nominal coverage for the parameter itself.

    ``sigma_lower``/``sigma_upper`` are on the asymptotic (sqrt(n)) scale;
    bootstrap standard errors must be multiplied by sqrt(n) first (see
    ``im_ci_from_bootstrap``).  When both sigmas vanish the bounds are
    returned unchanged with the one-sided critical value.
    """
    if upper < lower:
        raise ValueError("upper bound below lower bound")
    if min(sigma_lower, sigma_upper) < 0:
        raise ValueError("negative standard error")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    sig_max = max(sigma_lower, sigma_upper)
    z_lo = norm.ppf(1.0 - alpha)
    z_hi = norm.ppf(1.0 - alpha / 2.0)
    if sig_max == 0.0:
        return ImCi(lower, upper, alpha, z_lo, sigma_lower, sigma_upper)

    k = np.sqrt(n) * (upper - lower) / sig_max

    def gap(c):
        return ndtr(c + k) - ndtr(-c) - (1.0 - alpha)

    lo_c, hi_c = z_lo - 1e-6, z_hi + 1e-6
    if gap(lo_c) > 0 or gap(hi_c) < 0:
        raise NoRoot(
            f"no bracket for c: width={upper - lower}, sigma={sig_max}, "
            f"n={n}, alpha={alpha}"
        )
    for _ in range(200):
        mid = 0.5 * (lo_c + hi_c)
        if hi_c - lo_c < 1e-10:
            break
        if gap(mid) < 0.0:
            lo_c = mid
        else:
            hi_c = mid
    c = 0.5 * (lo_c + hi_c)
    root_n = np.sqrt(n)
    return ImCi(
        ci_lower=lower - c * sigma_lower / root_n,
        ci_upper=upper + c * sigma_upper / root_n,
        alpha=alpha,
        c_factor=float(c),
        sigma_lower=sigma_lower,
        sigma_upper=sigma_upper,
    )


def im_ci_from_bootstrap(
    interval, boot: BootstrapResult, n: int, alpha: float = 0.05
) -> ImCi:
    """Wire bootstrap standard errors into the IM construction.

    Bootstrap SDs estimate sigma/sqrt(n), so they are scaled up by
    sqrt(n) before entering the interval formula.
    """
    ci = imbens_manski_ci(
        interval.lower,
        interval.upper,
        boot.sigma_lower * np.sqrt(n),
        boot.sigma_upper * np.sqrt(n),
        n,
        alpha,
    )
    return ImCi(
        ci_lower=ci.ci_lower,
        ci_upper=ci.ci_upper,
        alpha=ci.alpha,
        c_factor=ci.c_factor,
        sigma_lower=ci.sigma_lower,
        sigma_upper=ci.sigma_upper,
        B=boot.B,
        seed=boot.seed,
    )
