"""Model specification, prior presets, and posterior-draw containers."""

from dataclasses import dataclass, field

import numpy as np

from .. import strata
from ..data_model import AssumptionSet, Design
from ..errors import InvalidStrata

PRESETS = ("default", "uniform", "extreme")


@dataclass(frozen=True)
class PriorConfig:
    """Prior hyperparameters for both sampler paths.

    The conjugate (no-covariate) path places Beta(a, a) priors on the
    stratum-arm outcome probabilities and a symmetric Dirichlet(a) on
    the strata probabilities; ``preset`` picks a: "default" scales the
    Jeffreys 1/2 by the number of strata, "uniform" uses 1, and
    "extreme" uses 1/16.  The covariate path uses zero-mean Normal
    coefficients: scale ``coef_scale`` on the outcome model and
    ``strata_coef_scale`` on the strata model (kept tighter by default
    so weakly identified strata keep nontrivial imputation weight).
    """

    preset: str = "default"
    beta_hyper: float | None = None
    dirichlet_hyper: float | None = None
    coef_scale: float = 3.0
    strata_coef_scale: float | None = 1.5

    def __post_init__(self):
        if self.preset not in PRESETS:
            raise ValueError(f"unknown prior preset {self.preset!r}")
        for name in ("beta_hyper", "dirichlet_hyper"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be positive")
        if self.coef_scale <= 0:
            raise ValueError("coef_scale must be positive")
        if self.strata_coef_scale is not None and self.strata_coef_scale <= 0:
            raise ValueError("strata_coef_scale must be positive")

    def strata_scale(self) -> float:
        return (
            self.strata_coef_scale
            if self.strata_coef_scale is not None
            else self.coef_scale
        )

    def hypers(self, n_strata: int) -> tuple:
        base = {
            "default": 0.5 / n_strata,
            "uniform": 1.0,
            "extreme": 1.0 / 16.0,
        }[self.preset]
        a_beta = self.beta_hyper if self.beta_hyper is not None else base
        a_dir = (
            self.dirichlet_hyper if self.dirichlet_hyper is not None else base
        )
        return a_beta, a_dir


@dataclass(frozen=True)
class ModelSpec:
    """Which strata the sampler may impute, and with what priors."""

    strata_set: tuple
    covariates: tuple = ()
    prior: PriorConfig = field(default_factory=PriorConfig)
    design: Design = Design.RANDOMIZED_PLACEMENT

    def __post_init__(self):
        ordered = tuple(s for s in strata.STRATA if s in set(self.strata_set))
        if not ordered:
            raise InvalidStrata("empty strata set")
        unknown = set(self.strata_set) - set(strata.STRATA)
        if unknown:
            raise InvalidStrata(f"unknown strata: {sorted(unknown)}")
        for d in (0, 1):
            if not set(ordered) & set(strata.S_STAR[d]):
                raise InvalidStrata(
                    f"strata set has no stratum with D(0)={d}; the "
                    "interaction is undefined"
                )
        object.__setattr__(self, "strata_set", ordered)
        object.__setattr__(self, "covariates", tuple(self.covariates))

    @classmethod
    def from_assumptions(
        cls,
        assumptions: AssumptionSet,
        covariates=(),
        prior: PriorConfig = PriorConfig(),
        design: Design = Design.RANDOMIZED_PLACEMENT,
    ) -> "ModelSpec":
        return cls(
            strata_set=assumptions.allowed_strata(),
            covariates=covariates,
            prior=prior,
            design=design,
        )

    @property
    def k(self) -> int:
        return len(self.strata_set)

    def reference_stratum(self) -> str:
        return "000" if "000" in self.strata_set else self.strata_set[-1]


@dataclass
class PosteriorDraws:
    """Post-burnin, thinned Gibbs output across all chains."""

    delta_population: np.ndarray
    delta_insample: np.ndarray
    chain: np.ndarray
    iteration: np.ndarray
    coefficients: dict
    imputed_strata: np.ndarray  # (draws, units) indices into strata_set
    strata_set: tuple
    seed: int
    n_units: int

    @property
    def n_draws(self) -> int:
        return self.delta_population.size

    @property
    def n_chains(self) -> int:
        return int(self.chain.max()) + 1 if self.chain.size else 0

    def summary(self) -> dict:
        dp, ds = self.delta_population, self.delta_insample
        lo, hi = np.percentile(dp, [2.5, 97.5])
        return {
            "posterior_mean": float(np.mean(dp)),
            "posterior_sd": float(np.std(dp, ddof=1)),
            "ci95": [float(lo), float(hi)],
            "posterior_mean_insample": float(np.nanmean(ds)),
            "posterior_sd_insample": float(np.nanstd(ds, ddof=1)),
            "n_draws": int(self.n_draws),
            "seed": self.seed,
        }
