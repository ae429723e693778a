"""Bayesian principal-strata model with Polya-Gamma Gibbs sampling."""

from .diagnostics import bulk_ess, diagnostics, rhat
from .gibbs import gibbs_run, prior_predictive
from .model import ModelSpec, PosteriorDraws, PriorConfig
from .pg import pg_draw, pg_mean

__all__ = [
    "ModelSpec",
    "PosteriorDraws",
    "PriorConfig",
    "bulk_ess",
    "diagnostics",
    "gibbs_run",
    "pg_draw",
    "pg_mean",
    "prior_predictive",
    "rhat",
]
