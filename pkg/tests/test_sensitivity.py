import numpy as np
import pytest
from conftest import interior_qs, random_mu_distribution, random_psi_distribution

from modbounds import strata
from modbounds.bounds_closed import stability_bounds
from modbounds.data_model import (
    AssumptionSet,
    Design,
    MONO_STABLE,
    Monotonicity,
)
from modbounds.errors import InfeasibleBudget
from modbounds.lp_core import StrataLpSpec, strata_bounds
from modbounds.sensitivity import (
    default_gamma_grid,
    gamma_curve,
    gamma_feasibility_minimum,
    gamma_theta_region,
)
from modbounds.simgen import dgp_custom
from modbounds.data_model import StrataDistribution, tabulate
from modbounds.estimation import cell_probabilities


def three_strata_probs(rng):
    while True:
        dist = random_mu_distribution(rng, ["111", "100", "000"])
        if interior_qs(dist):
            return dist, dist.implied_probabilities(Design.POST_ONLY)


class TestGammaCurve:
    def test_slack_budget_equals_no_budget(self, rng):
        dist, probs = three_strata_probs(rng)
        curve = gamma_curve(probs, MONO_STABLE, [1.0])
        no_budget = strata_bounds(
            StrataLpSpec(
                design=Design.POST_ONLY, probs=probs, assumptions=MONO_STABLE
            )
        )
        point = curve.points[0][1]
        assert point.lower == pytest.approx(no_budget.lower, abs=1e-7)
        assert point.upper == pytest.approx(no_budget.upper, abs=1e-7)

    def test_minimum_gamma_is_narrowest(self, rng):
        dist, probs = three_strata_probs(rng)
        gmin = gamma_feasibility_minimum(probs)
        grid = sorted({gmin, min(gmin + 0.1, 1.0), min(gmin + 0.3, 1.0), 1.0})
        curve = gamma_curve(probs, MONO_STABLE, grid)
        widths = [iv.width for _, iv in curve.points]
        assert widths[0] == min(widths)
        assert all(b >= a - 1e-9 for a, b in zip(widths, widths[1:]))

    def test_infeasible_grid_rejected(self, rng):
        dist, probs = three_strata_probs(rng)
        gmin = gamma_feasibility_minimum(probs)
        if gmin < 0.01:
            pytest.skip("mover share too small to undercut")
        with pytest.raises(InfeasibleBudget):
            gamma_curve(probs, MONO_STABLE, [gmin / 2.0])

    def test_curve_with_true_mover_share(self, rng):
        # a DGP with ~12% movers: the interval at gamma=0.12 contains the
        # true interaction; the interval at gamma=0.02 need not (and the
        # bounds at the larger budget are wider)
        rho = {"111": 0.30, "101": 0.06, "110": 0.06, "000": 0.58}
        mu = {
            s: {t: {z: float(v) for z, v in zip((0, 1), pair)} for t, pair in
                per_t.items()}
            for s, per_t in {
                "111": {0: (0.2, 0.2), 1: (0.9, 0.9)},
                "101": {0: (0.7, 0.7), 1: (0.1, 0.1)},
                "110": {0: (0.6, 0.6), 1: (0.2, 0.2)},
                "000": {0: (0.4, 0.4), 1: (0.5, 0.5)},
            }.items()
        }
        dist = StrataDistribution(
            rho={**{s: 0.0 for s in strata.STRATA}, **rho}, mu=mu
        )
        probs = dist.implied_probabilities(Design.POST_ONLY)
        true_delta = dist.true_delta()
        gmin = gamma_feasibility_minimum(probs)
        assert gmin <= 0.12 + 1e-9
        curve = gamma_curve(
            probs, AssumptionSet(), sorted({max(gmin, 0.02), 0.12, 0.5})
        )
        by_gamma = {g: iv for g, iv in curve.points}
        assert by_gamma[0.12].contains(true_delta, tol=1e-7)
        assert by_gamma[0.5].width >= by_gamma[0.12].width - 1e-9

    def test_crossing_located_by_bisection(self):
        # under the gamma budget alone, a model with a clearly positive
        # interaction and a small mover share starts informative at the
        # feasibility minimum and loses the sign as gamma grows
        rho = {"111": 0.35, "100": 0.05, "000": 0.60}
        mu = {
            "111": {0: {0: 0.20, 1: 0.20}, 1: {0: 0.85, 1: 0.85}},
            "100": {0: {0: 0.40, 1: 0.40}, 1: {0: 0.50, 1: 0.50}},
            "000": {0: {0: 0.45, 1: 0.45}, 1: {0: 0.50, 1: 0.50}},
        }
        dist = StrataDistribution(
            rho={**{s: 0.0 for s in strata.STRATA}, **rho}, mu=mu
        )
        probs = dist.implied_probabilities(Design.RANDOMIZED_PLACEMENT)
        gmin = gamma_feasibility_minimum(probs)
        grid = np.linspace(gmin, 1.0, 8)
        curve = gamma_curve(probs, AssumptionSet(), grid)
        lowers = [iv.lower for _, iv in curve.points]
        assert lowers[0] > 0.0 and lowers[-1] <= 0.0
        assert curve.crossing is not None
        below = gamma_curve(
            probs, AssumptionSet(), [max(gmin, curve.crossing - 1e-4)]
        ).points[0][1]
        above = gamma_curve(
            probs, AssumptionSet(), [min(1.0, curve.crossing + 1e-4)]
        ).points[0][1]
        assert below.lower > -1e-6
        assert above.lower <= 1e-6


class TestDefaultGrid:
    def test_starts_at_feasibility_minimum(self, rng):
        dist, probs = three_strata_probs(rng)
        grid = default_gamma_grid(probs, n=50, gamma_max=1.0)
        assert grid[0] == pytest.approx(gamma_feasibility_minimum(probs))
        assert grid[-1] == pytest.approx(1.0)
        assert len(grid) <= 50


class TestGammaThetaRegion:
    def test_theta_zero_column_identifies(self, rng):
        dist = random_psi_distribution(rng, list(strata.STRATA), diagonal=True)
        probs = dist.implied_probabilities(Design.RANDOMIZED_PLACEMENT)
        region = gamma_theta_region(
            probs, AssumptionSet(), gammas=[1.0], thetas=[0.0, 1.0]
        )
        interval = region.intervals[0][0]
        assert interval is not None
        assert interval.width == pytest.approx(0.0, abs=1e-7)

    def test_gamma_zero_row_when_moderator_unaffected(self, rng):
        dist = random_psi_distribution(rng, ["111", "000"])
        probs = dist.implied_probabilities(Design.RANDOMIZED_PLACEMENT)
        region = gamma_theta_region(
            probs, AssumptionSet(), gammas=[0.0], thetas=[0.2, 1.0]
        )
        for j in range(2):
            interval = region.intervals[0][j]
            assert interval is not None
            assert interval.contains(dist.true_delta(), tol=1e-7)

    def test_infeasible_cells_recorded_not_fatal(self, rng):
        while True:
            dist = random_psi_distribution(rng, list(strata.STRATA))
            if not interior_qs(dist):
                continue
            gmin = gamma_feasibility_minimum(
                dist.implied_probabilities(Design.RANDOMIZED_PLACEMENT)
            )
            if gmin > 0.05:
                break
        probs = dist.implied_probabilities(Design.RANDOMIZED_PLACEMENT)
        region = gamma_theta_region(
            probs, AssumptionSet(), gammas=[gmin / 2, 1.0], thetas=[1.0]
        )
        assert region.intervals[0][0] is None
        assert not region.informative_mask[0, 0]
        assert region.intervals[1][0] is not None

    def test_mask_monotone_over_grid(self, rng):
        # informative at (gamma, theta) implies informative at smaller budgets
        rho = {"111": 0.35, "100": 0.05, "000": 0.60}
        mu = {
            "111": {0: {0: 0.2, 1: 0.2}, 1: {0: 0.85, 1: 0.85}},
            "100": {0: {0: 0.4, 1: 0.4}, 1: {0: 0.5, 1: 0.5}},
            "000": {0: {0: 0.45, 1: 0.45}, 1: {0: 0.5, 1: 0.5}},
        }
        dist = StrataDistribution(
            rho={**{s: 0.0 for s in strata.STRATA}, **rho}, mu=mu
        )
        probs = dist.implied_probabilities(Design.RANDOMIZED_PLACEMENT)
        gmin = gamma_feasibility_minimum(probs)
        region = gamma_theta_region(
            probs,
            AssumptionSet(),
            gammas=np.linspace(gmin, 0.6, 5),
            thetas=np.linspace(0.0, 0.6, 5),
        )
        mask = region.informative_mask
        assert mask.any()
        for i in range(mask.shape[0]):
            for j in range(mask.shape[1]):
                if mask[i, j]:
                    feasible_smaller = [
                        mask[i2, j2]
                        for i2 in range(i + 1)
                        for j2 in range(j + 1)
                        if region.intervals[i2][j2] is not None
                    ]
                    assert all(feasible_smaller)

    def test_requires_placement_design(self, rng):
        dist, probs = three_strata_probs(rng)
        with pytest.raises(InfeasibleBudget):
            gamma_theta_region(
                probs, AssumptionSet(), gammas=[0.5], thetas=[0.5]
            )


class TestWidthMonotonicity:
    def test_width_monotone_in_each_budget(self, rng):
        dist = random_psi_distribution(np.random.default_rng(17), list(strata.STRATA))
        probs = dist.implied_probabilities(Design.RANDOMIZED_PLACEMENT)
        gmin = gamma_feasibility_minimum(probs)
        region = gamma_theta_region(
            probs,
            AssumptionSet(),
            gammas=np.linspace(gmin, 1.0, 4),
            thetas=np.linspace(0.0, 1.0, 4),
        )
        for i in range(4):
            widths = [
                region.intervals[i][j].width
                for j in range(4)
                if region.intervals[i][j] is not None
            ]
            assert all(b >= a - 1e-8 for a, b in zip(widths, widths[1:]))
        for j in range(4):
            widths = [
                region.intervals[i][j].width
                for i in range(4)
                if region.intervals[i][j] is not None
            ]
            assert all(b >= a - 1e-8 for a, b in zip(widths, widths[1:]))
