"""Cell probabilities, plug-in estimators, and the naive-bias decomposition."""

from dataclasses import dataclass

import numpy as np

from . import strata
from .data_model import CellProbabilities, CellTable, Design, StrataDistribution
from .errors import DegenerateStratum, EmptyCell


@dataclass(frozen=True)
class NaiveEstimates:
    """Difference-in-proportions estimators, by arm and moderator level.

    Fields are None when the design lacks the arm they need.
    ``moderator_ate`` is the post-arm contrast Q11 - Q01; the control-arm
    pre/post contrast Q01 - Q00 (a stability diagnostic) is reported when
    both arms exist.
    """

    tau_pre: tuple | None
    tau_post: tuple | None
    delta_pre: float | None
    delta_post: float | None
    ate_post: float | None
    moderator_ate: float | None
    stability_diagnostic: float | None

    def to_dict(self) -> dict:
        return {
            "tau_pre": list(self.tau_pre) if self.tau_pre else None,
            "tau_post": list(self.tau_post) if self.tau_post else None,
            "delta_pre": self.delta_pre,
            "delta_post": self.delta_post,
            "ate_post": self.ate_post,
            "moderator_ate": self.moderator_ate,
            "stability_diagnostic": self.stability_diagnostic,
        }


def _design_z_arms(design: Design) -> tuple:
    return {
        Design.POST_ONLY: (1,),
        Design.PRE_ONLY: (0,),
        Design.RANDOMIZED_PLACEMENT: (0, 1),
    }[design]


def cell_probabilities(table: CellTable) -> CellProbabilities:
    """Empirical proportions for every cell the design observes.

    Raises EmptyCell naming the first conditional probability whose
    denominator is zero, rather than propagating NaN into the bounds.
    """
    n = table.n
    p_tzd = np.full((2, 2, 2), np.nan)
    q_tz = np.full((2, 2), np.nan)
    p_t = np.full(2, np.nan)
    sizes = n.sum(axis=3)  # counts per (t, z, d)
    for z in _design_z_arms(table.design):
        for t in (0, 1):
            arm = n[t, z].sum()
            if arm == 0:
                raise EmptyCell(t, z)
            q_tz[t, z] = n[t, z, 1].sum() / arm
            if z == 1:
                p_t[t] = n[t, z, :, 1].sum() / arm
            for d in (0, 1):
                cell = n[t, z, d].sum()
                if cell == 0:
                    raise EmptyCell(t, z, d)
                p_tzd[t, z, d] = n[t, z, d, 1] / cell
    q0 = None
    if table.design is not Design.POST_ONLY:
        pre = n[:, 0].sum()
        q0 = n[:, 0, 1].sum() / pre
    return CellProbabilities(
        p_tzd=p_tzd,
        q_tz=q_tz,
        p_t=p_t,
        q0=q0,
        cell_sizes=sizes,
        design=table.design,
    )


def naive_estimates(probs: CellProbabilities) -> NaiveEstimates:
    """Plug-in CATE and interaction estimates per arm."""
    p = probs.p_tzd
    has_post = probs.design is not Design.PRE_ONLY
    has_pre = probs.design is not Design.POST_ONLY
    tau_post = delta_post = ate_post = moderator_ate = None
    tau_pre = delta_pre = stability = None
    if has_post:
        tau_post = (p[1, 1, 0] - p[0, 1, 0], p[1, 1, 1] - p[0, 1, 1])
        delta_post = tau_post[1] - tau_post[0]
        ate_post = float(probs.p_t[1] - probs.p_t[0])
        moderator_ate = float(probs.q_tz[1, 1] - probs.q_tz[0, 1])
    if has_pre:
        tau_pre = (p[1, 0, 0] - p[0, 0, 0], p[1, 0, 1] - p[0, 0, 1])
        delta_pre = tau_pre[1] - tau_pre[0]
    if has_post and has_pre:
        stability = float(probs.q_tz[0, 1] - probs.q_tz[0, 0])
    return NaiveEstimates(
        tau_pre=tau_pre,
        tau_post=tau_post,
        delta_pre=delta_pre,
        delta_post=delta_post,
        ate_post=ate_post,
        moderator_ate=moderator_ate,
        stability_diagnostic=stability,
    )


@dataclass(frozen=True)
class BiasDecomposition:
    bias: float
    tau_post_1: float
    tau_1: float
    terms: tuple


def bias_decomposition(dist: StrataDistribution) -> BiasDecomposition:
    """Bias of the naive post-test CATE estimator for tau(1).

    Evaluates the six-term expression relating tau_post(1) to tau(1)
    under a fully specified strata model, and also returns both
    quantities separately so the identity bias = tau_post(1) - tau(1)
    can be checked directly.
    """
    qs = dist.q_values()
    q11, q01, q0 = qs["q11"], qs["q01"], qs["q0"]
    for name, q in (("Q0", q0), ("Q11", q11), ("Q01", q01)):
        if not 0.0 < q < 1.0:
            raise DegenerateStratum(f"{name}={q} is degenerate")
    rho = dist.rho

    def mu(s, t):
        # zero-mass strata contribute nothing and need no outcome means
        return dist.mean_post(s, t) if rho[s] > 0 else 0.0

    terms = (
        (mu("111", 1) * rho["111"] + mu("101", 1) * rho["101"])
        * (q0 - q11)
        / (q0 * q11),
        -(mu("111", 0) * rho["111"] + mu("011", 0) * rho["011"])
        * (q0 - q01)
        / (q0 * q01),
        -(mu("011", 1) * rho["011"] + mu("001", 1) * rho["001"]) / q0,
        (mu("110", 1) * rho["110"] + mu("100", 1) * rho["100"]) / q11,
        (mu("101", 0) * rho["101"] + mu("001", 0) * rho["001"]) / q0,
        -(mu("110", 0) * rho["110"] + mu("010", 0) * rho["010"]) / q01,
    )
    bias = float(sum(terms))

    # tau_post(1) from the same model, for the consistency identity
    top_t = sum(
        mu(s, 1) * rho[s] for s in strata.STRATA if s[0] == "1"
    )
    top_c = sum(
        mu(s, 0) * rho[s] for s in strata.STRATA if s[1] == "1"
    )
    tau_post_1 = top_t / q11 - top_c / q01
    tau_1 = dist.true_cate(1)
    return BiasDecomposition(
        bias=bias, tau_post_1=float(tau_post_1), tau_1=float(tau_1), terms=terms
    )
