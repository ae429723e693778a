"""Polya-Gamma Gibbs sampler for the principal-strata outcome model.

One sweep alternates (i) a PG-augmented draw of the outcome
coefficients, (ii) PG-augmented one-vs-reference draws of the
multinomial strata coefficients, and (iii) imputation of each unit's
stratum from its categorical full conditional restricted to the strata
consistent with the observed (T, Z, D).  Without covariates the
coefficient draws collapse to conjugate Beta/Dirichlet updates.

Both the population and in-sample interaction are computed per retained
draw: the population version averages unit-level conditional contrasts
over the covariate distribution; the in-sample version imputes the
missing potential outcomes and takes the realized difference in means.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular
from scipy.special import expit, logsumexp

from .. import strata
from ..data_model import records_to_arrays
from ..errors import InitFailure, InvalidStrata
from .model import ModelSpec, PosteriorDraws
from .pg import pg_draw


def _standardize(x):
    """Center/scale columns with more than two distinct values."""
    x = np.asarray(x, dtype=float)
    out = x.copy()
    for j in range(x.shape[1]):
        col = x[:, j]
        if np.unique(col).size > 2:
            sd = col.std()
            out[:, j] = (col - col.mean()) / (sd if sd > 0 else 1.0)
    return out


@dataclass
class _Data:
    y: np.ndarray
    t: np.ndarray
    z: np.ndarray
    x: np.ndarray  # standardized, (n, p); p may be 0
    feasible: np.ndarray  # (n, k) bool
    cells_obs_base: np.ndarray  # (t*2+z)*k per unit
    pre_digit: np.ndarray  # D(0) per stratum in the spec's order


def _prepare(records, spec: ModelSpec) -> _Data:
    arr = records_to_arrays(records)
    n = arr["y"].size
    k = spec.k
    if spec.covariates:
        if arr["x"].shape[1] != len(spec.covariates):
            raise InvalidStrata(
                f"records carry {arr['x'].shape[1]} covariates, spec names "
                f"{len(spec.covariates)}"
            )
        x = _standardize(arr["x"])
    else:
        x = np.zeros((n, 0))
    feasible = np.zeros((n, k), dtype=bool)
    for j, s in enumerate(spec.strata_set):
        d_obs = np.where(
            arr["z"] == 0,
            int(s[2]),
            np.where(arr["t"] == 1, int(s[0]), int(s[1])),
        )
        feasible[:, j] = d_obs == arr["d"]
    if not feasible.any(axis=1).all():
        bad = int(np.where(~feasible.any(axis=1))[0][0])
        raise InitFailure(
            f"unit {bad} (t={arr['t'][bad]}, z={arr['z'][bad]}, "
            f"d={arr['d'][bad]}) matches no stratum in {spec.strata_set}"
        )
    pre_digit = np.array([int(s[2]) for s in spec.strata_set])
    return _Data(
        y=arr["y"].astype(float),
        t=arr["t"],
        z=arr["z"],
        x=x,
        feasible=feasible,
        cells_obs_base=(arr["t"] * 2 + arr["z"]) * k,
        pre_digit=pre_digit,
    )


def _gumbel_argmax(logw, rng):
    g = -np.log(-np.log(rng.uniform(size=logw.shape)))
    return np.argmax(logw + g, axis=1)


def _draw_gaussian(precision, rhs, rng):
    """One draw from N(precision^-1 rhs, precision^-1)."""
    chol = cho_factor(precision, lower=True)
    mean = cho_solve(chol, rhs)
    noise = solve_triangular(
        chol[0].T, rng.standard_normal(rhs.size), lower=False
    )
    return mean + noise


class _CovariateChain:
    """State and sweep logic for the covariate (logistic) path."""

    def __init__(self, data: _Data, spec: ModelSpec, rng):
        self.data, self.spec, self.rng = data, spec, rng
        n, k = data.y.size, spec.k
        p = data.x.shape[1]
        self.k, self.p = k, p
        self.tau2 = spec.prior.coef_scale**2
        self.tau2_strata = spec.prior.strata_scale() ** 2
        self.alpha = np.zeros(4 * k)
        self.beta = np.zeros(p)
        self.xd = np.hstack([np.ones((n, 1)), data.x])
        ref = spec.reference_stratum()
        self.ref_idx = spec.strata_set.index(ref)
        self.nonref = [j for j in range(k) if j != self.ref_idx]
        self.psi = np.zeros((k, 1 + p))  # reference row stays zero
        self.g = np.zeros((n, k))
        self.cells_all = data.cells_obs_base[:, None] + np.arange(k)[None, :]
        logw = np.where(data.feasible, 0.0, -np.inf)
        self.s_idx = _gumbel_argmax(logw, rng)

    def sweep(self):
        data, rng, k, p = self.data, self.rng, self.k, self.p
        n = data.y.size
        x = data.x
        cell = data.cells_obs_base + self.s_idx
        eta = self.alpha[cell] + (x @ self.beta if p else 0.0)
        omega = pg_draw(1, eta, rng)
        kappa = data.y - 0.5

        dim = 4 * k + p
        precision = np.zeros((dim, dim))
        a_diag = np.bincount(cell, weights=omega, minlength=4 * k)
        precision[: 4 * k, : 4 * k] = np.diag(a_diag)
        rhs = np.empty(dim)
        rhs[: 4 * k] = np.bincount(cell, weights=kappa, minlength=4 * k)
        if p:
            b_block = np.empty((4 * k, p))
            for j in range(p):
                b_block[:, j] = np.bincount(
                    cell, weights=omega * x[:, j], minlength=4 * k
                )
            precision[: 4 * k, 4 * k :] = b_block
            precision[4 * k :, : 4 * k] = b_block.T
            precision[4 * k :, 4 * k :] = x.T @ (omega[:, None] * x)
            rhs[4 * k :] = x.T @ kappa
        precision[np.diag_indices(dim)] += 1.0 / self.tau2
        draw = _draw_gaussian(precision, rhs, rng)
        self.alpha, self.beta = draw[: 4 * k], draw[4 * k :]

        # strata model: one-vs-reference logistic updates
        if k > 1:
            self.g = self.xd @ self.psi.T
            for j in self.nonref:
                others = [m for m in range(k) if m != j]
                offset = logsumexp(self.g[:, others], axis=1)
                eta_j = self.g[:, j] - offset
                omega_j = pg_draw(1, eta_j, rng)
                prec_j = self.xd.T @ (omega_j[:, None] * self.xd) + np.eye(
                    1 + p
                ) / self.tau2_strata
                zk = (self.s_idx == j).astype(float)
                rhs_j = self.xd.T @ (zk - 0.5 + omega_j * offset)
                self.psi[j] = _draw_gaussian(prec_j, rhs_j, rng)
                self.g[:, j] = self.xd @ self.psi[j]

        # impute strata from the categorical full conditional
        logits = self.alpha[self.cells_all] + (
            (x @ self.beta)[:, None] if p else 0.0
        )
        loglik = np.where(
            data.y[:, None] == 1.0,
            -np.logaddexp(0.0, -logits),
            -np.logaddexp(0.0, logits),
        )
        logrho = self.g - logsumexp(self.g, axis=1, keepdims=True)
        logw = np.where(data.feasible, loglik + logrho, -np.inf)
        self.s_idx = _gumbel_argmax(logw, rng)

    def record(self):
        data, k, p = self.data, self.k, self.p
        n = data.y.size
        xb = (data.x @ self.beta)[:, None] if p else np.zeros((n, 1))
        # cell layout is (t*2+z)*k + j: post-test arms are 3k.. and 1k..
        mu1 = expit(self.alpha[3 * k : 4 * k][None, :] + xb)
        mu0 = expit(self.alpha[1 * k : 2 * k][None, :] + xb)
        rho_is = np.exp(
            self.g - logsumexp(self.g, axis=1, keepdims=True)
        )
        pre1 = data.pre_digit == 1
        diff = mu1 - mu0
        # the population draw follows the per-unit strata-weighted contrast
        # exactly; each stratum term enters with its own probability weight
        num1 = (diff * rho_is)[:, pre1].sum(axis=1)
        num0 = (diff * rho_is)[:, ~pre1].sum(axis=1)
        delta_p = float(np.mean(num1 - num0))
        delta_s = _insample_delta(
            data, self.s_idx, mu1, mu0, self.rng
        )
        return delta_p, delta_s

    def coefficient_row(self):
        out = {}
        names = _alpha_names(self.spec)
        for name, value in zip(names, self.alpha):
            out[name] = value
        for name, value in zip(self.spec.covariates, self.beta):
            out[f"beta[{name}]"] = value
        for j in self.nonref:
            s = self.spec.strata_set[j]
            cols = ("intercept",) + tuple(self.spec.covariates)
            for cname, value in zip(cols, self.psi[j]):
                out[f"psi[{s}][{cname}]"] = value
        return out


def _alpha_names(spec):
    return [
        f"alpha[t={t},z={z}|{s}]" for t, z, s in _alpha_cell_order(spec)
    ]


def _alpha_cell_order(spec):
    """Cell layout: index (t*2+z)*k + j, matching _Data.cells_obs_base."""
    return [
        (t, z, s)
        for t in (0, 1)
        for z in (0, 1)
        for s in spec.strata_set
    ]


class _ConjugateChain:
    """No-covariate path: Beta/Dirichlet conjugate updates."""

    def __init__(self, data: _Data, spec: ModelSpec, rng):
        self.data, self.spec, self.rng = data, spec, rng
        k = spec.k
        self.k = k
        self.a_beta, self.a_dir = spec.prior.hypers(k)
        self.mu = np.full((4, k), 0.5)  # [(t*2+z), stratum]
        self.rho = np.full(k, 1.0 / k)
        logw = np.where(data.feasible, 0.0, -np.inf)
        self.s_idx = _gumbel_argmax(logw, rng)
        self.tz = data.t * 2 + data.z

    def sweep(self):
        data, rng, k = self.data, self.rng, self.k
        # conjugate coefficient updates given the imputed strata
        combo = self.tz * k + self.s_idx
        totals = np.bincount(combo, minlength=4 * k).astype(float)
        ones = np.bincount(combo, weights=data.y, minlength=4 * k)
        self.mu = rng.beta(
            self.a_beta + ones, self.a_beta + totals - ones
        ).reshape(4, k)
        counts = np.bincount(self.s_idx, minlength=k)
        self.rho = rng.dirichlet(self.a_dir + counts)

        mu_unit = np.clip(self.mu[self.tz], 1e-300, 1.0 - 1e-16)  # (n, k)
        logw = (
            np.log(self.rho)[None, :]
            + np.where(
                data.y[:, None] == 1.0,
                np.log(mu_unit),
                np.log1p(-mu_unit),
            )
        )
        logw = np.where(data.feasible, logw, -np.inf)
        self.s_idx = _gumbel_argmax(logw, rng)

    def record(self):
        data, k = self.data, self.k
        n = data.y.size
        pre1 = data.pre_digit == 1
        diff = self.mu[3] - self.mu[1]  # (t=1,z=1) minus (t=0,z=1)
        delta_p = float(
            (diff[pre1] * self.rho[pre1]).sum()
            - (diff[~pre1] * self.rho[~pre1]).sum()
        )
        mu1 = np.broadcast_to(self.mu[3], (n, k))
        mu0 = np.broadcast_to(self.mu[1], (n, k))
        delta_s = _insample_delta(data, self.s_idx, mu1, mu0, self.rng)
        return delta_p, delta_s

    def coefficient_row(self):
        out = {}
        for (t, z, s), value in zip(
            _alpha_cell_order(self.spec), self.mu.ravel()
        ):
            out[f"mu[t={t},z={z}|{s}]"] = value
        for s, value in zip(self.spec.strata_set, self.rho):
            out[f"rho[{s}]"] = value
        return out


def _insample_delta(data, s_idx, mu1, mu0, rng):
    """Realized interaction with missing potential outcomes imputed."""
    n = data.y.size
    rows = np.arange(n)
    u1 = rng.uniform(size=n)
    u0 = rng.uniform(size=n)
    y1 = np.where(
        (data.z == 1) & (data.t == 1),
        data.y,
        (u1 < mu1[rows, s_idx]).astype(float),
    )
    y0 = np.where(
        (data.z == 1) & (data.t == 0),
        data.y,
        (u0 < mu0[rows, s_idx]).astype(float),
    )
    d0 = data.pre_digit[s_idx]
    n1 = int(d0.sum())
    if n1 == 0 or n1 == n:
        return np.nan
    diff = y1 - y0
    return float(diff[d0 == 1].mean() - diff[d0 == 0].mean())


def _run_chain_numpy(data, spec, rng, iters, burnin, thin):
    state = (
        _CovariateChain(data, spec, rng)
        if spec.covariates
        else _ConjugateChain(data, spec, rng)
    )
    rows = []
    for it in range(iters):
        state.sweep()
        if it >= burnin and (it - burnin) % thin == 0:
            dp, ds = state.record()
            rows.append(
                (it, dp, ds, state.coefficient_row(), state.s_idx.copy())
            )
    return rows


def _run_chain_numba(data, spec, rng, iters, burnin, thin):
    from . import _kernels

    n = data.y.size
    k = spec.k
    p = data.x.shape[1]
    r_max = len(range(burnin, iters, thin))
    out_dp = np.empty(r_max)
    out_ds = np.empty(r_max)
    out_sidx = np.empty((r_max, n), dtype=np.int64)
    iter_ids = list(range(burnin, iters, thin))
    pre_digit = data.pre_digit.astype(np.int64)
    if spec.covariates:
        ref_idx = spec.strata_set.index(spec.reference_stratum())
        out_alpha = np.empty((r_max, 4 * k))
        out_beta = np.empty((r_max, p))
        out_psi = np.empty((r_max, k, 1 + p))
        _kernels.chain_covariate(
            data.y,
            data.t.astype(np.int64),
            data.z.astype(np.int64),
            np.ascontiguousarray(data.x),
            data.feasible,
            pre_digit,
            data.cells_obs_base.astype(np.int64),
            ref_idx,
            spec.prior.coef_scale**2,
            spec.prior.strata_scale() ** 2,
            iters,
            burnin,
            thin,
            rng,
            out_dp,
            out_ds,
            out_alpha,
            out_beta,
            out_psi,
            out_sidx,
        )
        names = _alpha_names(spec)
        rows = []
        nonref = [
            j for j in range(k) if j != ref_idx
        ]
        for r in range(r_max):
            coeff = dict(zip(names, out_alpha[r]))
            for j, cname in enumerate(spec.covariates):
                coeff[f"beta[{cname}]"] = out_beta[r, j]
            cols = ("intercept",) + tuple(spec.covariates)
            for j in nonref:
                s = spec.strata_set[j]
                for ci, cname in enumerate(cols):
                    coeff[f"psi[{s}][{cname}]"] = out_psi[r, j, ci]
            rows.append(
                (iter_ids[r], out_dp[r], out_ds[r], coeff, out_sidx[r])
            )
        return rows
    a_beta, a_dir = spec.prior.hypers(k)
    out_mu = np.empty((r_max, 4, k))
    out_rho = np.empty((r_max, k))
    _kernels.chain_conjugate(
        data.y,
        data.t.astype(np.int64),
        data.z.astype(np.int64),
        (data.t * 2 + data.z).astype(np.int64),
        data.feasible,
        pre_digit,
        a_beta,
        a_dir,
        iters,
        burnin,
        thin,
        rng,
        out_dp,
        out_ds,
        out_mu,
        out_rho,
        out_sidx,
    )
    cell_order = _alpha_cell_order(spec)
    rows = []
    for r in range(r_max):
        coeff = {}
        for (t, z, s), value in zip(cell_order, out_mu[r].ravel()):
            coeff[f"mu[t={t},z={z}|{s}]"] = value
        for s, value in zip(spec.strata_set, out_rho[r]):
            coeff[f"rho[{s}]"] = value
        rows.append((iter_ids[r], out_dp[r], out_ds[r], coeff, out_sidx[r]))
    return rows


def _numba_available():
    try:
        from . import _kernels  # noqa: F401
    except ImportError:
        return False
    return True


def gibbs_run(
    records,
    spec: ModelSpec,
    chains: int = 4,
    iters: int = 2000,
    burnin: int = 200,
    thin: int = 2,
    seed: int = 0,
    engine: str = "auto",
) -> PosteriorDraws:
    """Run the Gibbs sampler and collect post-burnin, thinned draws.

    Chains use independent streams seeded by (seed, chain), so the
    result is bit-identical however chains are scheduled.  Defaults
    mirror the reference run configuration (4 chains of 2000 iterations,
    200 burn-in, thinning 2).  ``engine`` picks the compiled per-chain
    loop ("numba", the default when available) or the pure-numpy
    reference implementation ("numpy"); the two agree in distribution
    but consume random numbers differently.
    """
    if iters <= burnin:
        raise ValueError("iters must exceed burnin")
    if engine not in ("auto", "numba", "numpy"):
        raise ValueError(f"unknown engine {engine!r}")
    if engine == "auto":
        engine = "numba" if _numba_available() else "numpy"
    data = _prepare(records, spec)
    runner = _run_chain_numba if engine == "numba" else _run_chain_numpy
    delta_p, delta_s, chain_col, iter_col = [], [], [], []
    coeff_rows = []
    strata_rows = []
    for chain_id in range(chains):
        rng = np.random.default_rng(np.random.SeedSequence((seed, chain_id)))
        for it, dp, ds, coeff, s_idx in runner(
            data, spec, rng, iters, burnin, thin
        ):
            delta_p.append(dp)
            delta_s.append(ds)
            chain_col.append(chain_id)
            iter_col.append(it)
            coeff_rows.append(coeff)
            strata_rows.append(np.asarray(s_idx, dtype=np.int8))
    coefficients = {
        name: np.array([row[name] for row in coeff_rows])
        for name in (coeff_rows[0] if coeff_rows else {})
    }
    return PosteriorDraws(
        delta_population=np.asarray(delta_p),
        delta_insample=np.asarray(delta_s),
        chain=np.asarray(chain_col, dtype=int),
        iteration=np.asarray(iter_col, dtype=int),
        coefficients=coefficients,
        imputed_strata=np.asarray(strata_rows, dtype=np.int8),
        strata_set=spec.strata_set,
        seed=seed,
        n_units=data.y.size,
    )


def prior_predictive(spec: ModelSpec, draws: int, seed: int) -> np.ndarray:
    """Interaction values implied by the prior alone (no data).

    Uses the conjugate parameterization: strata probabilities from the
    symmetric Dirichlet, stratum-arm outcome probabilities from
    Beta(a, a), and the population interaction formula per draw.
    """
    rng = np.random.default_rng(seed)
    k = spec.k
    a_beta, a_dir = spec.prior.hypers(k)
    pre1 = np.array([int(s[2]) for s in spec.strata_set]) == 1
    out = np.empty(draws)
    todo = np.arange(draws)
    while todo.size:
        m = todo.size
        rho = rng.dirichlet(np.full(k, a_dir), size=m)
        mu1 = rng.beta(a_beta, a_beta, size=(m, k))
        mu0 = rng.beta(a_beta, a_beta, size=(m, k))
        diff = mu1 - mu0
        den1 = rho[:, pre1].sum(axis=1)
        den0 = rho[:, ~pre1].sum(axis=1)
        # tiny hyperparameters can underflow a whole side of the simplex
        # to exactly zero, where the conditional contrast is undefined
        ok = (den1 > 0.0) & (den0 > 0.0)
        num1 = (diff * rho)[:, pre1].sum(axis=1)
        num0 = (diff * rho)[:, ~pre1].sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            vals = num1 / den1 - num0 / den0
        out[todo[ok]] = vals[ok]
        todo = todo[~ok]
    return out
