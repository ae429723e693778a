"""Sensitivity curves and regions over the gamma/theta budgets.

gamma caps the share of units whose moderator answer differs between
pre- and post-test measurement; theta caps the share primed by pre-test
measurement within each true moderator level.  Every point is a fresh
LP solve, so widths are exactly monotone in each budget.
"""

import dataclasses
from dataclasses import dataclass

import numpy as np

from .data_model import AssumptionSet, CellProbabilities, Design
from .errors import InfeasibleBudget, InfeasibleData
from .lp_core import DELTA, StrataLpSpec, Target, strata_bounds

_FEAS_TOL = 1e-9


@dataclass(frozen=True)
class SensitivityCurve:
    points: tuple  # of (gamma, BoundInterval)
    crossing: float | None  # gamma where the lower bound crosses 0

    def rows(self) -> list:
        out = []
        for gamma, interval in self.points:
            out.append(
                {
                    "gamma": gamma,
                    "theta": None,
                    "lower": interval.lower,
                    "upper": interval.upper,
                    "informative": interval.excludes_zero(),
                }
            )
        return out


@dataclass(frozen=True)
class SensitivityRegion:
    gammas: tuple
    thetas: tuple
    intervals: tuple  # intervals[i][j] is BoundInterval or None (infeasible)
    informative_mask: np.ndarray

    def rows(self) -> list:
        out = []
        for i, gamma in enumerate(self.gammas):
            for j, theta in enumerate(self.thetas):
                interval = self.intervals[i][j]
                out.append(
                    {
                        "gamma": gamma,
                        "theta": theta,
                        "lower": None if interval is None else interval.lower,
                        "upper": None if interval is None else interval.upper,
                        "informative": bool(self.informative_mask[i, j]),
                    }
                )
        return out


def gamma_feasibility_minimum(probs: CellProbabilities) -> float:
    """Smallest gamma consistent with the observed moments.

    |Q11 - Q01| for post-test data; the placement design also pins Q0,
    which can force additional movers (computed by a small LP).
    """
    from .lp_core import minimum_gamma

    return float(minimum_gamma(probs.design, probs))


def default_gamma_grid(
    probs: CellProbabilities, n: int = 50, gamma_max: float = 1.0
) -> np.ndarray:
    """Log-spaced grid from the feasibility minimum up to gamma_max."""
    gmin = gamma_feasibility_minimum(probs)
    if gamma_max <= gmin:
        return np.array([gmin])
    start = max(gmin, 1e-3)
    grid = np.geomspace(start, gamma_max, n - 1 if gmin < start else n)
    if gmin < start:
        grid = np.concatenate([[gmin], grid])
    return np.unique(grid)


def _with_budgets(assumptions, gamma=None, theta=None):
    changes = {}
    if gamma is not None:
        changes["gamma"] = float(gamma)
    if theta is not None:
        changes["theta"] = float(theta)
    return dataclasses.replace(assumptions, **changes)


def _bound_at(probs, assumptions, target, gamma=None, theta=None):
    spec = StrataLpSpec(
        design=probs.design,
        probs=probs,
        assumptions=_with_budgets(assumptions, gamma, theta),
        target=target,
    )
    return strata_bounds(spec)


def gamma_curve(
    probs: CellProbabilities,
    assumptions: AssumptionSet,
    grid,
    target: Target = DELTA,
) -> SensitivityCurve:
    """Bound intervals along a gamma grid, with the zero crossing located.

    Grid values below |Q11 - Q01| are infeasible and rejected up front.
    The crossing is the gamma where the lower bound hits zero, refined by
    bisection between the bracketing grid points.
    """
    grid = np.sort(np.asarray(grid, dtype=float))
    gmin = gamma_feasibility_minimum(probs)
    if grid[0] < gmin - _FEAS_TOL:
        raise InfeasibleBudget(
            f"grid starts at {grid[0]}, below the feasibility "
            f"minimum |Q11-Q01|={gmin:.6g}"
        )
    points = []
    for gamma in grid:
        points.append(
            (float(gamma), _bound_at(probs, assumptions, target, gamma=gamma))
        )

    crossing = None
    lowers = [iv.lower for _, iv in points]
    for i in range(len(points) - 1):
        if lowers[i] > 0.0 >= lowers[i + 1]:
            lo_g, hi_g = points[i][0], points[i + 1][0]
            for _ in range(40):
                if hi_g - lo_g < 1e-8:
                    break
                mid = 0.5 * (lo_g + hi_g)
                val = _bound_at(
                    probs, assumptions, target, gamma=mid
                ).lower
                if val > 0.0:
                    lo_g = mid
                else:
                    hi_g = mid
            crossing = 0.5 * (lo_g + hi_g)
            break
    return SensitivityCurve(points=tuple(points), crossing=crossing)


def gamma_theta_region(
    probs: CellProbabilities,
    assumptions: AssumptionSet,
    gammas,
    thetas,
    target: Target = DELTA,
) -> SensitivityRegion:
    """Bound intervals over a (gamma, theta) grid for the placement design.

    Cells whose budgets are infeasible are recorded as empty rather than
    aborting the whole region.
    """
    if probs.design is not Design.RANDOMIZED_PLACEMENT:
        raise InfeasibleBudget(
            "the gamma-theta region requires the randomized placement design"
        )
    gammas = tuple(float(g) for g in np.sort(np.asarray(gammas, dtype=float)))
    thetas = tuple(float(v) for v in np.sort(np.asarray(thetas, dtype=float)))
    intervals = []
    mask = np.zeros((len(gammas), len(thetas)), dtype=bool)
    for i, gamma in enumerate(gammas):
        row = []
        for j, theta in enumerate(thetas):
            try:
                interval = _bound_at(
                    probs, assumptions, target, gamma=gamma, theta=theta
                )
            except (InfeasibleBudget, InfeasibleData):
                row.append(None)
                continue
            row.append(interval)
            mask[i, j] = interval.excludes_zero()
        intervals.append(tuple(row))
    return SensitivityRegion(
        gammas=gammas,
        thetas=thetas,
        intervals=tuple(intervals),
        informative_mask=mask,
    )
