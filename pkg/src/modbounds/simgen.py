"""Synthetic data generators and the two simulation studies.

The study DGPs draw three covariates (two standard normals and a
three-level categorical dummy-coded against its first level), assign
treatment and timing as independent fair coins, draw each unit's
principal stratum from a multinomial-logistic model with stratum 000 as
reference, and draw the outcome from a logistic model saturated in
(T, Z, stratum).  Study II swaps in condition-specific covariate
coefficients of 0, 0.25, or 0.5 for either the outcome or the strata
model, holding the other side fixed.
"""

import enum
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from . import strata
from .bayes import ModelSpec, PriorConfig, gibbs_run
from .data_model import Design, ObservationRecord, StrataDistribution
from .errors import InvalidStrata

COVARIATE_NAMES = ("x1", "x2", "x3_medium", "x3_large")
_COV_KEYS = ("x1", "x2", "x3_medium", "x3_large")
STUDY_STRATA = ("111", "100", "000")

# outcome-model coefficients, saturated in (T, Z, stratum), S000 reference
STUDY1_OUTCOME = {
    "intercept": -2.00,
    "x1": 1.00,
    "x2": 0.15,
    "x3_medium": 0.24,
    "x3_large": 0.28,
    "t": 0.83,
    "z": -0.01,
    "t:z": 0.11,
    "s111": 0.41,
    "s100": 0.62,
    "t:s111": 0.01,
    "t:s100": 0.23,
    "z:s111": 0.20,
    "z:s100": -0.02,
    "t:z:s111": -0.90,
    "t:z:s100": 0.09,
}

# strata-model coefficients: columns S111, S100 (S000 fixed at zero)
STUDY1_PSI = {
    "intercept": (-2.06, -1.00),
    "x1": (2.00, 1.50),
    "x2": (0.50, 0.17),
    "x3_medium": (1.35, -0.28),
    "x3_large": (1.75, -1.01),
}

STUDY2_OUTCOME = {
    "intercept": -1.00,
    "x1": 1.00,
    "x2": 0.50,
    "x3_medium": 0.50,
    "x3_large": 0.28,
    "t": 0.83,
    "z": -0.01,
    "t:z": 0.11,
    "s111": 0.41,
    "s100": 0.62,
    "t:s111": 2.00,
    "t:s100": -0.13,
    "z:s111": 0.50,
    "z:s100": 0.10,
    "t:z:s111": 0.05,
    "t:z:s100": 0.01,
}

STUDY2_PSI = dict(STUDY1_PSI)


class Study2Condition(enum.Enum):
    WEAK_OUTCOME = ("outcome", 0.0)
    MED_OUTCOME = ("outcome", 0.25)
    STRONG_OUTCOME = ("outcome", 0.5)
    WEAK_STRATA = ("strata", 0.0)
    MED_STRATA = ("strata", 0.25)
    STRONG_STRATA = ("strata", 0.5)


def study1_coefficients() -> dict:
    """The generated-model report for the first study's DGP."""
    return {"outcome": dict(STUDY1_OUTCOME), "psi": dict(STUDY1_PSI)}


def study2_coefficients(condition: Study2Condition) -> dict:
    """Condition-specific coefficients for the second study's DGP."""
    which, value = condition.value
    outcome = dict(STUDY2_OUTCOME)
    psi = {key: tuple(v) for key, v in STUDY2_PSI.items()}
    if which == "outcome":
        for key in _COV_KEYS:
            outcome[key] = value
    else:
        for key in _COV_KEYS:
            psi[key] = (value, value)
    return {"outcome": outcome, "psi": psi}


def _outcome_eta(coef, x_cols, t, z, s_labels):
    """Linear predictor eta(t, z, s, x) under the saturated coding."""
    eta = (
        coef["intercept"]
        + coef["x1"] * x_cols[0]
        + coef["x2"] * x_cols[1]
        + coef["x3_medium"] * x_cols[2]
        + coef["x3_large"] * x_cols[3]
        + coef["t"] * t
        + coef["z"] * z
        + coef["t:z"] * t * z
    )
    for tag in ("111", "100"):
        hit = (s_labels == tag).astype(float)
        eta = eta + hit * (
            coef[f"s{tag}"]
            + coef[f"t:s{tag}"] * t
            + coef[f"z:s{tag}"] * z
            + coef[f"t:z:s{tag}"] * t * z
        )
    return eta


def _simulate_from_models(coef_outcome, coef_psi, n, seed):
    rng = np.random.default_rng(seed)
    x1 = rng.standard_normal(n)
    x2 = rng.standard_normal(n)
    x3 = rng.integers(0, 3, n)
    med = (x3 == 1).astype(float)
    lar = (x3 == 2).astype(float)
    t = rng.integers(0, 2, n)
    z = rng.integers(0, 2, n)
    xd = np.column_stack([np.ones(n), x1, x2, med, lar])
    psi_mat = np.column_stack(
        [
            [coef_psi[key][0] for key in ("intercept", *_COV_KEYS)],
            [coef_psi[key][1] for key in ("intercept", *_COV_KEYS)],
            np.zeros(5),
        ]
    )
    logits = xd @ psi_mat  # columns: S111, S100, S000
    gumbel = -np.log(-np.log(rng.uniform(size=logits.shape)))
    s_idx = np.argmax(logits + gumbel, axis=1)
    s_labels = np.array(STUDY_STRATA)[s_idx]

    digits = np.array([[int(c) for c in s] for s in STUDY_STRATA])
    d_pick = np.where(
        z == 0,
        digits[s_idx, 2],
        np.where(t == 1, digits[s_idx, 0], digits[s_idx, 1]),
    )
    eta = _outcome_eta(
        coef_outcome, (x1, x2, med, lar), t, z, s_labels
    )
    y = (rng.uniform(size=n) < expit(eta)).astype(int)
    return [
        ObservationRecord(
            y=int(y[i]),
            t=int(t[i]),
            z=int(z[i]),
            d=int(d_pick[i]),
            x=(float(x1[i]), float(x2[i]), float(med[i]), float(lar[i])),
        )
        for i in range(n)
    ]


def dgp_study1(n: int, seed: int) -> list:
    """Draw one dataset from the first study's data-generating process."""
    if n < 1:
        raise ValueError("n must be positive")
    return _simulate_from_models(STUDY1_OUTCOME, STUDY1_PSI, n, seed)


def dgp_study2(condition: Study2Condition, n: int, seed: int) -> list:
    """Draw one dataset from the second study's DGP for a condition."""
    if n < 1:
        raise ValueError("n must be positive")
    coefs = study2_coefficients(condition)
    return _simulate_from_models(coefs["outcome"], coefs["psi"], n, seed)


def dgp_custom(
    dist: StrataDistribution, n: int, seed: int, design: Design
) -> tuple:
    """Sample records from an explicit strata model.

    Returns (records, truth) where truth carries the interaction, both
    CATEs, and the ATE computed analytically from the model.
    """
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    labels = [s for s in strata.STRATA if dist.rho[s] > 0]
    probs = np.array([dist.rho[s] for s in labels])
    probs = probs / probs.sum()
    idx = rng.choice(len(labels), size=n, p=probs)
    t = rng.integers(0, 2, n)
    if design is Design.POST_ONLY:
        z = np.ones(n, dtype=int)
    elif design is Design.PRE_ONLY:
        z = np.zeros(n, dtype=int)
    else:
        z = rng.integers(0, 2, n)
    digits = np.array([[int(c) for c in s] for s in labels])
    d = np.where(
        z == 0, digits[idx, 2], np.where(t == 1, digits[idx, 0], digits[idx, 1])
    )
    mean_post = np.array(
        [[dist.mean_post(s, tv) for tv in (0, 1)] for s in labels]
    )
    mean_pre = np.array(
        [[dist.mean_pre(s, tv) for tv in (0, 1)] for s in labels]
    )
    mu = np.where(z == 1, mean_post[idx, t], mean_pre[idx, t])
    y = (rng.uniform(size=n) < mu).astype(int)
    records = [
        ObservationRecord(y=int(y[i]), t=int(t[i]), z=int(z[i]), d=int(d[i]))
        for i in range(n)
    ]
    truth = {
        "delta": dist.true_delta(),
        "tau1": dist.true_cate(1),
        "tau0": dist.true_cate(0),
        "ate": dist.true_ate(),
    }
    return records, truth


# -- study runners ------------------------------------------------------------

STUDY1_CONFIGS = {
    "none": strata.STRATA,
    "monotonicity": strata.MONOTONE_POSITIVE,
    "stability": strata.STABLE_CONTROL,
    "both": STUDY_STRATA,
}

_MCMC_DEFAULTS = {"chains": 4, "iters": 2000, "burnin": 200, "thin": 2}


@dataclass
class StudyResult:
    rows: list  # one dict per replicate (and condition)
    summary: dict


def _fit_variances(records, strata_set, covariates, seed, mcmc):
    spec = ModelSpec(
        strata_set=strata_set,
        covariates=covariates,
        prior=PriorConfig(),
        design=Design.RANDOMIZED_PLACEMENT,
    )
    draws = gibbs_run(records, spec, seed=seed, **mcmc)
    ds = draws.delta_insample
    ds = ds[~np.isnan(ds)]
    return {
        "var_p": float(np.var(draws.delta_population, ddof=1)),
        "var_s": float(np.var(ds, ddof=1)) if ds.size > 1 else np.nan,
    }


def _rep_seeds(seed, rep, count):
    ss = np.random.SeedSequence((seed, rep))
    return [int(v) for v in ss.generate_state(count)]


def _study1_rep(args):
    rep, n, seed, mcmc = args
    seeds = _rep_seeds(seed, rep, 1 + len(STUDY1_CONFIGS))
    records = dgp_study1(n, seeds[0])
    row = {"rep": rep}
    variances = {}
    for i, (name, strata_set) in enumerate(STUDY1_CONFIGS.items()):
        variances[name] = _fit_variances(
            records, strata_set, COVARIATE_NAMES, seeds[1 + i], mcmc
        )
    for name in STUDY1_CONFIGS:
        row[f"var_p_{name}"] = variances[name]["var_p"]
        row[f"var_s_{name}"] = variances[name]["var_s"]
        if name != "none":
            for kind in ("p", "s"):
                base = variances["none"][f"var_{kind}"]
                val = variances[name][f"var_{kind}"]
                row[f"reduction_{kind}_{name}"] = 100.0 * (1.0 - val / base)
    return row


def _study2_rep(args):
    rep, condition_name, n, seed, mcmc = args
    condition = Study2Condition[condition_name]
    seeds = _rep_seeds(seed, rep * 16 + list(Study2Condition).index(condition), 3)
    records = dgp_study2(condition, n, seeds[0])
    with_cov = _fit_variances(
        records, STUDY_STRATA, COVARIATE_NAMES, seeds[1], mcmc
    )
    without = _fit_variances(records, STUDY_STRATA, (), seeds[2], mcmc)
    row = {"rep": rep, "condition": condition.name}
    for kind in ("p", "s"):
        row[f"var_{kind}_with"] = with_cov[f"var_{kind}"]
        row[f"var_{kind}_without"] = without[f"var_{kind}"]
        row[f"reduction_{kind}"] = 100.0 * (
            1.0 - with_cov[f"var_{kind}"] / without[f"var_{kind}"]
        )
    return row


def _run_parallel(worker, tasks, jobs):
    if jobs <= 1:
        return [worker(task) for task in tasks]
    import multiprocessing

    with multiprocessing.get_context("fork").Pool(jobs) as pool:
        return pool.map(worker, tasks)


def run_study1(
    reps: int,
    n: int = 1000,
    seed: int = 0,
    mcmc: dict | None = None,
    jobs: int = 1,
    progress=None,
) -> StudyResult:
    """Posterior-variance reduction from assumption sets, across reps.

    Each replicate fits four strata restrictions to the same dataset and
    reports, per restriction, the percent reduction in posterior
    variance of the interaction relative to the unrestricted fit.
    """
    mcmc = dict(_MCMC_DEFAULTS, **(mcmc or {}))
    tasks = [(rep, n, seed, mcmc) for rep in range(reps)]
    if progress is None:
        rows = _run_parallel(_study1_rep, tasks, jobs)
    else:
        rows = []
        for task in tasks:
            rows.append(_study1_rep(task))
            progress(len(rows), reps)
    summary = {}
    for name in ("monotonicity", "stability", "both"):
        for kind in ("p", "s"):
            vals = np.array([row[f"reduction_{kind}_{name}"] for row in rows])
            summary[f"median_reduction_{kind}_{name}"] = float(
                np.nanmedian(vals)
            )
    return StudyResult(rows=rows, summary=summary)


def run_study2(
    reps: int,
    n: int = 1000,
    seed: int = 0,
    mcmc: dict | None = None,
    jobs: int = 1,
    progress=None,
) -> StudyResult:
    """Posterior-variance reduction from covariates, across conditions."""
    mcmc = dict(_MCMC_DEFAULTS, **(mcmc or {}))
    tasks = [
        (rep, condition.name, n, seed, mcmc)
        for condition in Study2Condition
        for rep in range(reps)
    ]
    if progress is None:
        rows = _run_parallel(_study2_rep, tasks, jobs)
    else:
        rows = []
        for task in tasks:
            rows.append(_study2_rep(task))
            progress(len(rows), len(tasks))
    summary = {}
    for condition in Study2Condition:
        for kind in ("p", "s"):
            vals = np.array(
                [
                    row[f"reduction_{kind}"]
                    for row in rows
                    if row["condition"] == condition.name
                ]
            )
            summary[f"median_reduction_{kind}_{condition.name}"] = float(
                np.nanmedian(vals)
            )
    return StudyResult(rows=rows, summary=summary)
