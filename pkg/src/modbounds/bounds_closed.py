"""Closed-form sharp bounds on the treatment-moderator interaction.

Four families: randomization-only bounds for the interaction and for
single CATEs, bounds under monotone post-test effects, bounds adding a
stable moderator under control, and the attention-check attenuation
interval.  Each matches the package's LP solution under the same
constraints; the LP serves as the test oracle.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from ._gridsearch import maximize_on_interval
from .data_model import (
    AssumptionSet,
    CellProbabilities,
    Monotonicity,
)
from .errors import (
    DegenerateQ,
    DomainError,
    InfeasibleData,
    InfeasibleQ0,
    MonotonicityViolatedWarning,
)

_CLAMP_TOL = 1e-8  # sampling-noise feasibility violations tolerated
_Q_EPS = 1e-6


@dataclass(frozen=True)
class Q0Known:
    value: float


@dataclass(frozen=True)
class Q0Optimized:
    pass


@dataclass(frozen=True)
class Q0Profiled:
    grid: tuple


@dataclass(frozen=True)
class BoundInterval:
    """A sharp identification interval plus how it was obtained."""

    lower: float
    upper: float
    assumptions: AssumptionSet
    target: str  # "delta" | "cate(d)" | "cate_attentive"
    q0_mode: object = field(default_factory=Q0Optimized)
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.lower > self.upper + 1e-12:
            raise ValueError(
                f"lower {self.lower} exceeds upper {self.upper}"
            )

    @property
    def width(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float, tol: float = 1e-12) -> bool:
        return self.lower - tol <= value <= self.upper + tol

    def excludes_zero(self) -> bool:
        return self.lower > 0.0 or self.upper < 0.0

    def to_dict(self) -> dict:
        mode = self.q0_mode
        if isinstance(mode, Q0Known):
            q0_mode = {"mode": "known", "value": mode.value}
        elif isinstance(mode, Q0Profiled):
            q0_mode = {"mode": "profiled", "grid_size": len(mode.grid)}
        else:
            q0_mode = {"mode": "optimized"}
        return {
            "target": self.target,
            "lower": self.lower,
            "upper": self.upper,
            "assumptions": self.assumptions.to_dict(),
            "q0_mode": q0_mode,
            "diagnostics": dict(self.diagnostics),
        }


def _check_unit(name, value):
    if not 0.0 <= value <= 1.0:
        raise DomainError(f"{name}={value} outside [0, 1]")


def _delta_endpoints_rand(p1, p0, q0):
    lower = max(
        -2.0,
        -(1.0 - p1 + p0) / q0,
        -(1.0 + p1 - p0) / (1.0 - q0),
        -p0 / q0 - p1 / (1.0 - q0),
        -(1.0 - p1) / q0 - (1.0 - p0) / (1.0 - q0),
    )
    upper = min(
        2.0,
        (1.0 + p1 - p0) / q0,
        (1.0 - p1 + p0) / (1.0 - q0),
        (1.0 - p0) / q0 + (1.0 - p1) / (1.0 - q0),
        p1 / q0 + p0 / (1.0 - q0),
    )
    return lower, upper


def randomization_bounds_delta(
    p1: float, p0: float, q0: float | None
) -> BoundInterval:
    """Interaction bounds from treatment randomization alone.

    With ``q0=None`` the true moderator probability is unknown (post-test
    design) and the envelope over Q0 in (0, 1) is returned.
    """
    _check_unit("P1", p1)
    _check_unit("P0", p0)
    assumptions = AssumptionSet()
    if q0 is not None:
        if not 0.0 < q0 < 1.0:
            raise DomainError(f"Q0={q0} must lie strictly inside (0, 1)")
        lower, upper = _delta_endpoints_rand(p1, p0, q0)
        return BoundInterval(
            lower, upper, assumptions, "delta", Q0Known(q0)
        )
    _, upper = maximize_on_interval(
        lambda q: _delta_endpoints_rand(p1, p0, q)[1], _Q_EPS, 1 - _Q_EPS
    )
    _, neg_lower = maximize_on_interval(
        lambda q: -_delta_endpoints_rand(p1, p0, q)[0], _Q_EPS, 1 - _Q_EPS
    )
    return BoundInterval(
        -neg_lower, upper, assumptions, "delta", Q0Optimized()
    )


def randomization_bounds_cate(
    p1: float, p0: float, q0: float, d: int
) -> BoundInterval:
    """Randomization-only bounds for the CATE at moderator level d.

    The d=0 case follows from the d=1 formula by swapping Q0 for 1-Q0.
    """
    _check_unit("P1", p1)
    _check_unit("P0", p0)
    _check_unit("Q0", q0)
    share = q0 if d == 1 else 1.0 - q0
    if share == 0.0:
        raise DomainError(f"no mass at moderator level {d} (share 0)")
    if share == 1.0:
        value = p1 - p0
        return BoundInterval(
            value, value, AssumptionSet(), f"cate({d})", Q0Known(q0)
        )
    lower = max(
        -1.0,
        (p1 - p0 - (1.0 - share)) / share,
        -p0 / share,
        -(1.0 - p1) / share,
    )
    upper = min(
        1.0,
        (p1 - p0 + (1.0 - share)) / share,
        p1 / share,
        (1.0 - p0) / share,
    )
    return BoundInterval(
        lower, upper, AssumptionSet(), f"cate({d})", Q0Known(q0)
    )


def _relabel_probs(probs: CellProbabilities) -> CellProbabilities:
    """Swap the moderator coding d -> 1-d everywhere."""
    return CellProbabilities(
        p_tzd=probs.p_tzd[:, :, ::-1].copy(),
        q_tz=1.0 - probs.q_tz,
        p_t=probs.p_t.copy(),
        q0=None if probs.q0 is None else 1.0 - probs.q0,
        cell_sizes=probs.cell_sizes[:, :, ::-1].copy(),
        design=probs.design,
    )


def _mono_endpoints(p111, p011, p110, p010, q11, q01, q0):
    lead = (
        p111 * q11 / q0
        - p011 * q01 / q0
        - p110 * (1.0 - q11) / (1.0 - q0)
        + p010 * (1.0 - q01) / (1.0 - q0)
    )
    denom = q0 * (1.0 - q0)
    lower = lead + (
        max(p011 * q01 - q0, 0.0) - min(p111 * q11, q11 - q0)
    ) / denom
    upper = lead + (
        min(0.0, q0 - p111 * q11) + min(p011 * q01, q01 - q0)
    ) / denom
    return max(lower, -2.0), min(upper, 2.0)


def monotonicity_bounds(probs: CellProbabilities, q0_mode) -> BoundInterval:
    """Prop-2-style interaction bounds under a monotone post-test effect.

    ``q0_mode`` is Q0Known(value) or Q0Optimized(); the optimized mode
    profiles the closed forms over the feasible range (0, min(Q11, Q01)],
    seeding the grid with the analytic branch-switch points.
    """
    direction = Monotonicity.POSITIVE
    if isinstance(q0_mode, Monotonicity):
        raise TypeError("pass a Q0Known/Q0Optimized mode")
    return _monotonicity_bounds_dir(probs, q0_mode, direction)


def monotonicity_bounds_negative(
    probs: CellProbabilities, q0_mode
) -> BoundInterval:
    """Negative-direction monotonicity via relabeling d -> 1-d.

    Relabeling flips the sign of the interaction, so the interval is the
    positive-direction interval of the relabeled data, negated.
    """
    inner = _monotonicity_bounds_dir(
        _relabel_probs(probs), q0_mode_flip(q0_mode), Monotonicity.POSITIVE
    )
    assumptions = AssumptionSet(moderator_monotonicity=Monotonicity.NEGATIVE)
    return BoundInterval(
        lower=-inner.upper,
        upper=-inner.lower,
        assumptions=assumptions,
        target="delta",
        q0_mode=q0_mode,
        diagnostics=inner.diagnostics,
    )


def q0_mode_flip(q0_mode):
    if isinstance(q0_mode, Q0Known):
        return Q0Known(1.0 - q0_mode.value)
    return q0_mode


def _monotonicity_bounds_dir(probs, q0_mode, direction):
    p = probs.p_tzd
    q = probs.q_tz
    p111, p011 = p[1, 1, 1], p[0, 1, 1]
    p110, p010 = p[1, 1, 0], p[0, 1, 0]
    q11, q01 = q[1, 1], q[0, 1]
    q_cap = min(q11, q01)
    assumptions = AssumptionSet(moderator_monotonicity=direction)

    if (
        probs.design.value == "randomized_placement"
        and probs.q0 is not None
        and q11 < probs.q0 - 1e-6
    ):
        warnings.warn(
            f"observed Q11={q11:.4f} < Q0={probs.q0:.4f}: data contradict "
            "positive moderator monotonicity",
            MonotonicityViolatedWarning,
        )

    if isinstance(q0_mode, Q0Known):
        q0 = q0_mode.value
        if q0 > q_cap + _CLAMP_TOL:
            raise InfeasibleQ0(
                f"Q0={q0} exceeds min(Q11, Q01)={q_cap:.6g} under monotonicity"
            )
        q0 = min(q0, q_cap)
        if not 0.0 < q0 < 1.0:
            raise DegenerateQ(f"Q0={q0} is degenerate")
        lower, upper = _mono_endpoints(p111, p011, p110, p010, q11, q01, q0)
        return BoundInterval(
            lower, upper, assumptions, "delta", Q0Known(q0_mode.value)
        )

    hi = min(q_cap, 1.0 - _Q_EPS)
    if hi < _Q_EPS:
        raise DegenerateQ("feasible Q0 range collapses to 0")
    seeds = (
        p111 * q11,
        (1.0 - p011) * q01,
        p011 * q01,
        q11 - p111 * q11,
        q01,
    )
    _, upper = maximize_on_interval(
        lambda q0: _mono_endpoints(p111, p011, p110, p010, q11, q01, q0)[1],
        _Q_EPS,
        hi,
        seeds=seeds,
    )
    _, neg_lower = maximize_on_interval(
        lambda q0: -_mono_endpoints(p111, p011, p110, p010, q11, q01, q0)[0],
        _Q_EPS,
        hi,
        seeds=seeds,
    )
    return BoundInterval(
        -neg_lower, upper, assumptions, "delta", Q0Optimized()
    )


def stability_bounds(probs: CellProbabilities) -> BoundInterval:
    """Bounds under monotonicity plus a stable moderator under control.

    Stability pins Q0 = Q01, collapsing the free parameter; the width
    can never exceed (Q11-Q01)/(Q01(1-Q01)), which is reported as a
    diagnostic alongside the observed treatment effect on the moderator.
    """
    p = probs.p_tzd
    q = probs.q_tz
    p111, p011 = p[1, 1, 1], p[0, 1, 1]
    p110, p010 = p[1, 1, 0], p[0, 1, 0]
    q11, q01 = q[1, 1], q[0, 1]
    if q11 < q01:
        if q01 - q11 > _CLAMP_TOL:
            raise InfeasibleData(
                f"Q11={q11:.6g} < Q01={q01:.6g}: positive monotonicity plus "
                "stability require Q11 >= Q01"
            )
        q11 = q01  # clamp sampling noise
    if not 0.0 < q01 < 1.0:
        raise DegenerateQ(f"Q01={q01} is degenerate")

    assumptions = AssumptionSet(
        moderator_monotonicity=Monotonicity.POSITIVE,
        stable_moderator_control=True,
    )
    lead = (
        p111 * q11 / q01
        - p011
        - p110 * (1.0 - q11) / (1.0 - q01)
        + p010
    )
    spread = (q11 - q01) / (q01 * (1.0 - q01))
    if q11 == q01:
        lower = upper = lead
    else:
        lower = lead - min(1.0, p111 * q11 / (q11 - q01)) * spread
        upper = lead - max(0.0, (p111 * q11 - q01) / (q11 - q01)) * spread
    lower, upper = max(lower, -2.0), min(upper, 2.0)
    return BoundInterval(
        lower,
        upper,
        assumptions,
        "delta",
        Q0Known(q01),
        diagnostics={
            "max_width": spread,
            "moderator_effect": q11 - q01,
        },
    )


def attention_bounds(
    p1: float, p0: float, q01: float, q11: float
) -> BoundInterval:
    """Attenuation interval for the CATE among attentive respondents.

    The post-arm ITT difference is one endpoint; dividing it by the
    largest observed pass rate gives the other.  Endpoints are ordered
    after computing and clipped to the CATE range [-1, 1].
    """
    for name, v in (("P1", p1), ("P0", p0), ("Q01", q01), ("Q11", q11)):
        _check_unit(name, v)
    m = max(q01, q11)
    if m == 0.0:
        raise DomainError("both pass rates are zero")
    itt = p1 - p0
    scaled = itt / m
    lower, upper = min(itt, scaled), max(itt, scaled)
    lower, upper = max(lower, -1.0), min(upper, 1.0)
    assumptions = AssumptionSet(
        attention_monotonicity=True, inattentive_exclusion=True
    )
    return BoundInterval(
        lower,
        upper,
        assumptions,
        "cate_attentive",
        Q0Optimized(),
        diagnostics={"itt": itt, "max_pass_rate": m},
    )


def pretest_trivial_bounds(target: str = "delta") -> tuple:
    """The vacuous ranges the pre-test design alone implies."""
    return (-2.0, 2.0) if target == "delta" else (-1.0, 1.0)
