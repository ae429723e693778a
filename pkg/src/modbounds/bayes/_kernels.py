"""Compiled per-chain Gibbs loops.

Mirrors the pure-numpy chain classes in ``gibbs.py`` step for step (PG
augmentation, Gaussian coefficient draws, one-vs-reference strata
updates, categorical imputation, delta recording); only the RNG
consumption pattern differs, so the two engines agree in distribution
but not draw-for-draw.  All state lives in preallocated arrays; the
caller's Generator is threaded through every stochastic step.
"""

import math

import numpy as np
from numba import njit

from ._pg_numba import _pg1_scalar


@njit(cache=True)
def _gauss_draw(precision, rhs, gen):
    """Draw from N(precision^-1 rhs, precision^-1) via one Cholesky."""
    dim = rhs.size
    chol = np.linalg.cholesky(precision)
    u = np.empty(dim)
    for i in range(dim):
        acc = rhs[i]
        for j in range(i):
            acc -= chol[i, j] * u[j]
        u[i] = acc / chol[i, i]
    for i in range(dim):
        u[i] += gen.standard_normal()
    out = np.empty(dim)
    for i in range(dim - 1, -1, -1):
        acc = u[i]
        for j in range(i + 1, dim):
            acc -= chol[j, i] * out[j]
        out[i] = acc / chol[i, i]
    return out


@njit(cache=True)
def _log_sigmoid(v):
    if v >= 0.0:
        return -math.log1p(math.exp(-v))
    return v - math.log1p(math.exp(v))


@njit(cache=True)
def _sigmoid(v):
    if v >= 0.0:
        return 1.0 / (1.0 + math.exp(-v))
    e = math.exp(v)
    return e / (1.0 + e)


@njit(cache=True)
def _init_strata(feasible, gen):
    n, k = feasible.shape
    s_idx = np.empty(n, dtype=np.int64)
    for i in range(n):
        count = 0
        for m in range(k):
            if feasible[i, m]:
                count += 1
        pick = int(gen.uniform(0.0, 1.0) * count)
        if pick >= count:
            pick = count - 1
        seen = 0
        for m in range(k):
            if feasible[i, m]:
                if seen == pick:
                    s_idx[i] = m
                    break
                seen += 1
    return s_idx


@njit(cache=True)
def _record_insample(y, tt, zz, s_idx, mu1_row, mu0_row, xb, pre_digit, gen):
    """Realized interaction with missing potential outcomes imputed."""
    n = y.size
    s1 = 0.0
    s0 = 0.0
    c1 = 0
    c0 = 0
    for i in range(n):
        m = s_idx[i]
        mu1 = _sigmoid(mu1_row[m] + xb[i])
        mu0 = _sigmoid(mu0_row[m] + xb[i])
        u1 = gen.uniform(0.0, 1.0)
        u0 = gen.uniform(0.0, 1.0)
        if zz[i] == 1 and tt[i] == 1:
            y1 = y[i]
        else:
            y1 = 1.0 if u1 < mu1 else 0.0
        if zz[i] == 1 and tt[i] == 0:
            y0 = y[i]
        else:
            y0 = 1.0 if u0 < mu0 else 0.0
        if pre_digit[m] == 1:
            s1 += y1 - y0
            c1 += 1
        else:
            s0 += y1 - y0
            c0 += 1
    if c1 == 0 or c0 == 0:
        return np.nan
    return s1 / c1 - s0 / c0


@njit(cache=True)
def chain_covariate(
    y,
    tt,
    zz,
    x,
    feasible,
    pre_digit,
    cells_base,
    ref_idx,
    tau2,
    tau2_strata,
    iters,
    burnin,
    thin,
    gen,
    out_dp,
    out_ds,
    out_alpha,
    out_beta,
    out_psi,
    out_sidx,
):
    n, p = x.shape
    k = feasible.shape[1]
    dim = 4 * k + p
    alpha = np.zeros(4 * k)
    beta = np.zeros(p)
    psi = np.zeros((k, 1 + p))
    g = np.zeros((n, k))
    xb = np.zeros(n)
    s_idx = _init_strata(feasible, gen)
    precision = np.zeros((dim, dim))
    rhs = np.zeros(dim)
    prec_s = np.zeros((1 + p, 1 + p))
    rhs_s = np.zeros(1 + p)
    r = 0
    for it in range(iters):
        # outcome coefficients: PG augmentation then one Gaussian draw
        for i in range(n):
            acc = 0.0
            for j in range(p):
                acc += x[i, j] * beta[j]
            xb[i] = acc
        precision[:] = 0.0
        rhs[:] = 0.0
        for i in range(n):
            c = cells_base[i] + s_idx[i]
            w = _pg1_scalar(alpha[c] + xb[i], gen)
            kap = y[i] - 0.5
            precision[c, c] += w
            rhs[c] += kap
            for j in range(p):
                xv = x[i, j]
                precision[c, 4 * k + j] += w * xv
                rhs[4 * k + j] += kap * xv
                for j2 in range(j, p):
                    precision[4 * k + j, 4 * k + j2] += w * xv * x[i, j2]
        for j in range(p):
            for j2 in range(j + 1, p):
                precision[4 * k + j2, 4 * k + j] = precision[
                    4 * k + j, 4 * k + j2
                ]
            for c in range(4 * k):
                precision[4 * k + j, c] = precision[c, 4 * k + j]
        for idx in range(dim):
            precision[idx, idx] += 1.0 / tau2
        draw = _gauss_draw(precision, rhs, gen)
        for idx in range(4 * k):
            alpha[idx] = draw[idx]
        for j in range(p):
            beta[j] = draw[4 * k + j]
        for i in range(n):
            acc = 0.0
            for j in range(p):
                acc += x[i, j] * beta[j]
            xb[i] = acc

        # strata coefficients: one-vs-reference logistic updates
        for i in range(n):
            for m in range(k):
                acc = psi[m, 0]
                for j in range(p):
                    acc += psi[m, 1 + j] * x[i, j]
                g[i, m] = acc
        for m in range(k):
            if m == ref_idx or k == 1:
                continue
            prec_s[:] = 0.0
            rhs_s[:] = 0.0
            for i in range(n):
                mx = -np.inf
                for mm in range(k):
                    if mm != m and g[i, mm] > mx:
                        mx = g[i, mm]
                ssum = 0.0
                for mm in range(k):
                    if mm != m:
                        ssum += math.exp(g[i, mm] - mx)
                off = mx + math.log(ssum)
                w = _pg1_scalar(g[i, m] - off, gen)
                zk = 1.0 if s_idx[i] == m else 0.0
                resid = zk - 0.5 + w * off
                prec_s[0, 0] += w
                rhs_s[0] += resid
                for j in range(p):
                    xv = x[i, j]
                    prec_s[0, 1 + j] += w * xv
                    rhs_s[1 + j] += resid * xv
                    for j2 in range(j, p):
                        prec_s[1 + j, 1 + j2] += w * xv * x[i, j2]
            for j in range(1 + p):
                for j2 in range(j + 1, 1 + p):
                    prec_s[j2, j] = prec_s[j, j2]
                prec_s[j, j] += 1.0 / tau2_strata
            psi_m = _gauss_draw(prec_s, rhs_s, gen)
            for j in range(1 + p):
                psi[m, j] = psi_m[j]
            for i in range(n):
                acc = psi_m[0]
                for j in range(p):
                    acc += psi_m[1 + j] * x[i, j]
                g[i, m] = acc

        # impute strata from the categorical full conditional
        for i in range(n):
            mx = -np.inf
            for m in range(k):
                if g[i, m] > mx:
                    mx = g[i, m]
            ssum = 0.0
            for m in range(k):
                ssum += math.exp(g[i, m] - mx)
            lse = mx + math.log(ssum)
            best = -np.inf
            chosen = s_idx[i]
            for m in range(k):
                if not feasible[i, m]:
                    continue
                logit = alpha[cells_base[i] + m] + xb[i]
                if y[i] == 1.0:
                    ll = _log_sigmoid(logit)
                else:
                    ll = _log_sigmoid(-logit)
                gum = -math.log(-math.log(gen.uniform(0.0, 1.0)))
                tot = ll + g[i, m] - lse + gum
                if tot > best:
                    best = tot
                    chosen = m
            s_idx[i] = chosen

        if it >= burnin and (it - burnin) % thin == 0:
            dp = 0.0
            for i in range(n):
                mx = -np.inf
                for m in range(k):
                    if g[i, m] > mx:
                        mx = g[i, m]
                ssum = 0.0
                for m in range(k):
                    ssum += math.exp(g[i, m] - mx)
                num1 = 0.0
                num0 = 0.0
                for m in range(k):
                    rho = math.exp(g[i, m] - mx) / ssum
                    dif = _sigmoid(alpha[3 * k + m] + xb[i]) - _sigmoid(
                        alpha[k + m] + xb[i]
                    )
                    if pre_digit[m] == 1:
                        num1 += dif * rho
                    else:
                        num0 += dif * rho
                dp += num1 - num0
            out_dp[r] = dp / n
            out_ds[r] = _record_insample(
                y,
                tt,
                zz,
                s_idx,
                alpha[3 * k : 4 * k],
                alpha[k : 2 * k],
                xb,
                pre_digit,
                gen,
            )
            for idx in range(4 * k):
                out_alpha[r, idx] = alpha[idx]
            for j in range(p):
                out_beta[r, j] = beta[j]
            for m in range(k):
                for j in range(1 + p):
                    out_psi[r, m, j] = psi[m, j]
            for i in range(n):
                out_sidx[r, i] = s_idx[i]
            r += 1
    return r


@njit(cache=True)
def chain_conjugate(
    y,
    tt,
    zz,
    tz,
    feasible,
    pre_digit,
    a_beta,
    a_dir,
    iters,
    burnin,
    thin,
    gen,
    out_dp,
    out_ds,
    out_mu,
    out_rho,
    out_sidx,
):
    n = y.size
    k = feasible.shape[1]
    mu = np.full((4, k), 0.5)
    rho = np.full(k, 1.0 / k)
    s_idx = _init_strata(feasible, gen)
    zeros_xb = np.zeros(n)
    r = 0
    for it in range(iters):
        # conjugate updates given the imputed strata
        totals = np.zeros((4, k))
        ones = np.zeros((4, k))
        counts = np.zeros(k)
        for i in range(n):
            totals[tz[i], s_idx[i]] += 1.0
            ones[tz[i], s_idx[i]] += y[i]
            counts[s_idx[i]] += 1.0
        for c in range(4):
            for m in range(k):
                mu[c, m] = gen.beta(
                    a_beta + ones[c, m], a_beta + totals[c, m] - ones[c, m]
                )
        total = 0.0
        for m in range(k):
            rho[m] = gen.standard_gamma(a_dir + counts[m])
            total += rho[m]
        for m in range(k):
            rho[m] /= total

        for i in range(n):
            best = -np.inf
            chosen = s_idx[i]
            for m in range(k):
                if not feasible[i, m]:
                    continue
                pm = mu[tz[i], m]
                if y[i] == 1.0:
                    ll = math.log(pm) if pm > 0.0 else -np.inf
                else:
                    ll = math.log1p(-pm) if pm < 1.0 else -np.inf
                gum = -math.log(-math.log(gen.uniform(0.0, 1.0)))
                tot = ll + math.log(rho[m]) + gum
                if tot > best:
                    best = tot
                    chosen = m
            s_idx[i] = chosen

        if it >= burnin and (it - burnin) % thin == 0:
            num1 = 0.0
            num0 = 0.0
            for m in range(k):
                dif = mu[3, m] - mu[1, m]
                if pre_digit[m] == 1:
                    num1 += dif * rho[m]
                else:
                    num0 += dif * rho[m]
            out_dp[r] = num1 - num0
            logit1 = np.empty(k)
            logit0 = np.empty(k)
            for m in range(k):
                p1 = min(max(mu[3, m], 1e-12), 1.0 - 1e-12)
                p0 = min(max(mu[1, m], 1e-12), 1.0 - 1e-12)
                logit1[m] = math.log(p1 / (1.0 - p1))
                logit0[m] = math.log(p0 / (1.0 - p0))
            out_ds[r] = _record_insample(
                y, tt, zz, s_idx, logit1, logit0, zeros_xb, pre_digit, gen
            )
            for c in range(4):
                for m in range(k):
                    out_mu[r, c, m] = mu[c, m]
            for m in range(k):
                out_rho[r, m] = rho[m]
            for i in range(n):
                out_sidx[r, i] = s_idx[i]
            r += 1
    return r
