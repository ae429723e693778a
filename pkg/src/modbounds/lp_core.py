"""Dense simplex solver and strata linear programs.

The solver is a two-phase tableau simplex with Bland's rule: problem
sizes here never exceed ~80 structural variables, so determinism and
guaranteed termination matter more than speed.  The builders translate
assumption sets, designs, and sensitivity budgets into linear programs
over principal-strata parameters; ``strata_bounds`` wraps them with the
outer search over strata probabilities.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from . import strata
from ._gridsearch import maximize_on_interval
from .data_model import (
    AssumptionSet,
    CellProbabilities,
    Design,
    Monotonicity,
    StrataDistribution,
)
from .errors import (
    DegenerateStratum,
    InconsistentRho,
    InfeasibleBudget,
    InfeasibleData,
)

_FEAS_TOL = 1e-9
_PIVOT_TOL = 1e-11
_Q_EPS = 1e-6  # keeps 1/Q0 objective coefficients bounded


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class Sense(enum.Enum):
    MAX = "max"
    MIN = "min"


@dataclass
class LinearProgram:
    """max/min  objective @ x  s.t.  eq_matrix @ x = eq_rhs,  box lo<=x<=hi."""

    objective: np.ndarray
    eq_matrix: np.ndarray
    eq_rhs: np.ndarray
    box: np.ndarray  # shape (n, 2); upper bound may be +inf
    sense: Sense = Sense.MAX

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        self.eq_matrix = np.asarray(self.eq_matrix, dtype=float).reshape(
            -1, self.objective.size
        )
        self.eq_rhs = np.asarray(self.eq_rhs, dtype=float)
        self.box = np.asarray(self.box, dtype=float)
        if self.box.shape != (self.objective.size, 2):
            raise ValueError("box must have one [lo, hi] pair per variable")
        if (self.box[:, 0] > self.box[:, 1] + 1e-15).any():
            raise ValueError("box has lo > hi")


@dataclass
class LpResult:
    value: float
    solution: np.ndarray
    status: LpStatus


def _bland_pivot(tableau, cost, basis, tol):
    """One simplex sweep with Bland's rule; returns status string."""
    m = tableau.shape[0]
    for _ in range(20000):
        entering = -1
        for j in range(tableau.shape[1] - 1):
            if cost[j] < -tol:
                entering = j
                break
        if entering < 0:
            return "optimal"
        col = tableau[:, entering]
        best_ratio, leaving = np.inf, -1
        for i in range(m):
            if col[i] > tol:
                ratio = tableau[i, -1] / col[i]
                if ratio < best_ratio - 1e-15 or (
                    abs(ratio - best_ratio) <= 1e-15
                    and (leaving < 0 or basis[i] < basis[leaving])
                ):
                    best_ratio, leaving = ratio, i
        if leaving < 0:
            return "unbounded"
        pivot = tableau[leaving, entering]
        tableau[leaving] /= pivot
        for i in range(m):
            if i != leaving and abs(tableau[i, entering]) > 1e-14:
                tableau[i] -= tableau[i, entering] * tableau[leaving]
        cost -= cost[entering] * tableau[leaving]
        basis[leaving] = entering
    raise RuntimeError("simplex exceeded iteration cap")


def simplex_solve(lp: LinearProgram) -> LpResult:
    """Solve a small dense LP; never raises on infeasible/unbounded input."""
    n = lp.objective.size
    lo, hi = lp.box[:, 0], lp.box[:, 1]
    if not np.isfinite(lo).all():
        raise ValueError("all lower bounds must be finite")
    span = hi - lo
    bounded = np.where(np.isfinite(span))[0]

    # shift to x' = x - lo >= 0; add a slack row per finite upper bound
    a_rows = [lp.eq_matrix]
    b_rows = [lp.eq_rhs - lp.eq_matrix @ lo]
    n_slack = bounded.size
    if lp.eq_matrix.shape[0]:
        a_rows[0] = np.hstack(
            [lp.eq_matrix, np.zeros((lp.eq_matrix.shape[0], n_slack))]
        )
    ub_block = np.zeros((n_slack, n + n_slack))
    for r, j in enumerate(bounded):
        ub_block[r, j] = 1.0
        ub_block[r, n + r] = 1.0
    a_rows.append(ub_block)
    b_rows.append(span[bounded])
    A = np.vstack([blk for blk in a_rows if blk.size])
    b = np.concatenate(b_rows)

    c = np.concatenate([lp.objective, np.zeros(n_slack)])
    if lp.sense is Sense.MAX:
        c = -c

    m, total = A.shape
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    # phase 1: minimize the sum of artificial variables
    tableau = np.hstack([A, np.eye(m), b[:, None]])
    basis = list(range(total, total + m))
    cost = np.zeros(total + m + 1)
    cost[total : total + m] = 1.0
    for i in range(m):
        cost -= tableau[i]
    status = _bland_pivot(tableau, cost, basis, _PIVOT_TOL)
    if status != "optimal" or -cost[-1] > 1e-8:
        return LpResult(np.nan, np.full(n, np.nan), LpStatus.INFEASIBLE)

    # drive remaining artificials out of the basis (or drop redundant rows)
    keep = []
    for i in range(m):
        if basis[i] < total:
            keep.append(i)
            continue
        row = tableau[i, :total]
        j = next((k for k in range(total) if abs(row[k]) > 1e-9), None)
        if j is None:
            continue  # redundant constraint
        pivot = tableau[i, j]
        tableau[i] /= pivot
        for r in range(m):
            if r != i and abs(tableau[r, j]) > 1e-14:
                tableau[r] -= tableau[r, j] * tableau[i]
        basis[i] = j
        keep.append(i)
    tableau = np.hstack([tableau[keep][:, :total], tableau[keep][:, -1:]])
    basis = [basis[i] for i in keep]

    # phase 2 with the real objective
    cost = np.concatenate([c, [0.0]])
    for i, var in enumerate(basis):
        if abs(cost[var]) > 0:
            cost -= cost[var] * tableau[i]
    status = _bland_pivot(tableau, cost, basis, _PIVOT_TOL)
    if status == "unbounded":
        return LpResult(np.nan, np.full(n, np.nan), LpStatus.UNBOUNDED)

    x_shift = np.zeros(total)
    for i, var in enumerate(basis):
        x_shift[var] = tableau[i, -1]
    x = lo + x_shift[:n]
    value = float(lp.objective @ x)
    return LpResult(value, x, LpStatus.OPTIMAL)


# -- strata LP builders ------------------------------------------------------


class LpVariables(enum.Enum):
    MU_PER_STRATUM = "mu_per_stratum"
    JOINT_MASS_W = "joint_mass_w"


@dataclass(frozen=True)
class Target:
    kind: str  # "delta" | "cate" | "cate_attentive"
    d: int | None = None

    def label(self) -> str:
        if self.kind == "delta":
            return "delta"
        if self.kind == "cate_attentive":
            return "cate_attentive"
        return f"cate({self.d})"


DELTA = Target("delta")
CATE1 = Target("cate", 1)
CATE0 = Target("cate", 0)
CATE_ATTENTIVE = Target("cate_attentive", 1)


@dataclass
class StrataLpSpec:
    """What to bound, from which probabilities, under which assumptions."""

    design: Design
    probs: CellProbabilities
    assumptions: AssumptionSet = field(default_factory=AssumptionSet)
    rho_outer: StrataDistribution | None = None
    variables: LpVariables | None = None
    target: Target = DELTA
    strata_override: tuple | None = None  # explicit allowed-strata set

    def __post_init__(self):
        if self.variables is None:
            joint = (
                self.design is Design.RANDOMIZED_PLACEMENT
                or self.assumptions.theta is not None
            )
            self.variables = (
                LpVariables.JOINT_MASS_W if joint else LpVariables.MU_PER_STRATUM
            )

    def allowed(self) -> tuple:
        if self.strata_override is not None:
            return tuple(
                s for s in strata.STRATA if s in set(self.strata_override)
            )
        return self.assumptions.allowed_strata()


def _target_weights(target: Target, q0: float) -> np.ndarray:
    """Per-stratum weight of mu_s(1)-mu_s(0) in the target estimand."""
    if not _Q_EPS / 2 <= q0 <= 1 - _Q_EPS / 2:
        if (target.kind == "delta") or True:
            # conditional estimands lose meaning at degenerate Q0
            raise DegenerateStratum(f"Q0={q0} is degenerate")
    w = np.zeros(strata.N_STRATA)
    pre1 = strata.D_PRE == 1
    if target.kind == "delta":
        w[pre1] = 1.0 / q0
        w[~pre1] = -1.0 / (1.0 - q0)
    elif target.d == 1:
        w[pre1] = 1.0 / q0
    else:
        w[~pre1] = 1.0 / (1.0 - q0)
    return w


def _post_moment_rows(probs: CellProbabilities):
    """(strata mask, arm t, rhs) for the four post-arm moment equations."""
    p, q = probs.p_tzd, probs.q_tz
    rows = []
    for t in (0, 1):
        obs = strata.D_POST_TREATED if t == 1 else strata.D_POST_CONTROL
        for d in (0, 1):
            share = q[t, 1] if d == 1 else 1.0 - q[t, 1]
            rows.append(((obs == d), t, p[t, 1, d] * share))
    return rows


def _check_rho_consistency(rho: StrataDistribution, probs, allowed):
    qs = rho.q_values()
    if abs(qs["q11"] - probs.q_tz[1, 1]) > 1e-7 or abs(
        qs["q01"] - probs.q_tz[0, 1]
    ) > 1e-7:
        raise InconsistentRho(
            "fixed strata probabilities contradict the observed Q moments"
        )
    off = [s for s in strata.STRATA if s not in allowed and rho.rho[s] > 1e-12]
    if off:
        raise InconsistentRho(f"mass on excluded strata: {off}")


def build_post_test_lp(
    spec: StrataLpSpec, rho: StrataDistribution
) -> LinearProgram:
    """Fixed-rho LP over the 16 stratum-arm means mu_s(t), box [0, 1]."""
    allowed = spec.allowed()
    _check_rho_consistency(rho, spec.probs, allowed)
    rv = rho.rho_vector()
    q0 = rho.q_values()["q0"]

    def col(s_idx, t):
        return s_idx * 2 + t

    n = strata.N_STRATA * 2
    rows, rhs = [], []
    for mask, t, value in _post_moment_rows(spec.probs):
        row = np.zeros(n)
        for i in np.where(mask)[0]:
            row[col(i, t)] = rv[i]
        rows.append(row)
        rhs.append(value)
    if spec.assumptions.inattentive_exclusion:
        row = np.zeros(n)
        i000 = strata.STRATUM_INDEX["000"]
        row[col(i000, 1)] = 1.0
        row[col(i000, 0)] = -1.0
        rows.append(row)
        rhs.append(0.0)

    weights = _target_weights(spec.target, q0)
    objective = np.zeros(n)
    for i in range(strata.N_STRATA):
        objective[col(i, 1)] = weights[i] * rv[i]
        objective[col(i, 0)] = -weights[i] * rv[i]
    box = np.tile([0.0, 1.0], (n, 1))
    return LinearProgram(objective, np.array(rows), np.array(rhs), box)


def _w_col(s_idx, t, y1, y0):
    return ((s_idx * 2 + t) * 2 + y1) * 2 + y0


def build_placement_lp(
    spec: StrataLpSpec, rho: StrataDistribution
) -> LinearProgram:
    """Fixed-rho LP over joint masses w_{y1 y0 s}(t) = psi_{y1 y0 s}(t) rho_s.

    Moment constraints cover both arms: the post-arm (Y, D) cells and the
    pre-arm outcome proportions with denominators cleared.  The theta
    budget bounds the off-diagonal (primed) mass within each true
    moderator level; priming monotonicity zeroes one off-diagonal.
    """
    allowed = spec.allowed()
    _check_rho_consistency(rho, spec.probs, allowed)
    rv = rho.rho_vector()
    q0 = rho.q_values()["q0"]
    n_w = strata.N_STRATA * 2 * 4
    rows, rhs = [], []

    # per-(s, t) normalization: sum_{y1,y0} w = rho_s
    for i in range(strata.N_STRATA):
        for t in (0, 1):
            row = np.zeros(n_w)
            for y1 in (0, 1):
                for y0 in (0, 1):
                    row[_w_col(i, t, y1, y0)] = 1.0
            rows.append(row)
            rhs.append(rv[i])
    # post-arm cells
    for mask, t, value in _post_moment_rows(spec.probs):
        row = np.zeros(n_w)
        for i in np.where(mask)[0]:
            for y0 in (0, 1):
                row[_w_col(i, t, 1, y0)] = 1.0
        rows.append(row)
        rhs.append(value)
    # pre-arm outcome proportions, denominators cleared
    p = spec.probs.p_tzd
    for t in (0, 1):
        for d in (0, 1):
            members = [strata.STRATUM_INDEX[s] for s in strata.S_STAR[d]]
            mass = sum(rv[i] for i in members)
            row = np.zeros(n_w)
            for i in members:
                for y1 in (0, 1):
                    row[_w_col(i, t, y1, 1)] = 1.0
            rows.append(row)
            rhs.append(p[t, 0, d] * mass)
    if spec.assumptions.inattentive_exclusion:
        row = np.zeros(n_w)
        i000 = strata.STRATUM_INDEX["000"]
        for y0 in (0, 1):
            row[_w_col(i000, 1, 1, y0)] = 1.0
            row[_w_col(i000, 0, 1, y0)] = -1.0
        rows.append(row)
        rhs.append(0.0)

    theta = spec.assumptions.theta
    n_extra = 0
    theta_rows = []
    if theta is not None:
        for t in (0, 1):
            for d in (0, 1):
                members = [strata.STRATUM_INDEX[s] for s in strata.S_STAR[d]]
                mass = sum(rv[i] for i in members)
                row = np.zeros(n_w)
                for i in members:
                    row[_w_col(i, t, 1, 0)] = 1.0
                    row[_w_col(i, t, 0, 1)] = 1.0
                theta_rows.append((row, theta * mass))
        n_extra = len(theta_rows)

    n = n_w + n_extra
    matrix = np.zeros((len(rows) + n_extra, n))
    full_rhs = np.zeros(len(rows) + n_extra)
    for r, (row, value) in enumerate(zip(rows, rhs)):
        matrix[r, :n_w] = row
        full_rhs[r] = value
    for k, (row, value) in enumerate(theta_rows):
        r = len(rows) + k
        matrix[r, :n_w] = row
        matrix[r, n_w + k] = 1.0  # slack: constraint is <=
        full_rhs[r] = value

    weights = _target_weights(spec.target, q0)
    objective = np.zeros(n)
    for i in range(strata.N_STRATA):
        for y0 in (0, 1):
            objective[_w_col(i, 1, 1, y0)] += weights[i]
            objective[_w_col(i, 0, 1, y0)] -= weights[i]

    box = np.tile([0.0, np.inf], (n, 1))
    prime = spec.assumptions.priming_monotonicity
    for i in range(strata.N_STRATA):
        for t in (0, 1):
            if prime is Monotonicity.POSITIVE:
                box[_w_col(i, t, 1, 0), 1] = 0.0  # pre >= post: no (1, 0) mass
            elif prime is Monotonicity.NEGATIVE:
                box[_w_col(i, t, 0, 1), 1] = 0.0
    return LinearProgram(objective, matrix, full_rhs, box)


# -- joint (mass, rho) LPs for the outer optimization ------------------------


def _rho_moment_rows(spec: StrataLpSpec, n_total, rho_offset, q0):
    """Simplex, Q11, Q01, Q0, and gamma rows over the rho block."""
    q = spec.probs.q_tz
    rows, rhs, ineq = [], [], []
    for mask, value in (
        (np.ones(strata.N_STRATA, dtype=bool), 1.0),
        (strata.D_POST_TREATED == 1, q[1, 1]),
        (strata.D_POST_CONTROL == 1, q[0, 1]),
        (strata.D_PRE == 1, q0),
    ):
        row = np.zeros(n_total)
        row[rho_offset + np.where(mask)[0]] = 1.0
        rows.append(row)
        rhs.append(value)
    gamma = spec.assumptions.gamma
    if gamma is not None:
        row = np.zeros(n_total)
        movers = [
            i
            for i, s in enumerate(strata.STRATA)
            if s not in strata.UNAFFECTED
        ]
        row[rho_offset + np.array(movers)] = 1.0
        ineq.append((row, gamma))
    return rows, rhs, ineq


def _excluded_boxes(spec: StrataLpSpec, box, rho_offset):
    allowed = set(spec.allowed())
    for i, s in enumerate(strata.STRATA):
        if s not in allowed:
            box[rho_offset + i, 1] = 0.0


def _assemble(objective, eq_rows, eq_rhs, ineq, box):
    """Append one slack variable per inequality row (a'x <= b)."""
    n = objective.size
    k = len(ineq)
    if k == 0:
        return LinearProgram(
            objective, np.array(eq_rows), np.array(eq_rhs), box
        )
    matrix = np.zeros((len(eq_rows) + k, n + k))
    rhs = np.zeros(len(eq_rows) + k)
    for r, (row, value) in enumerate(zip(eq_rows, eq_rhs)):
        matrix[r, :n] = row
        rhs[r] = value
    for j, (row, value) in enumerate(ineq):
        r = len(eq_rows) + j
        matrix[r, :n] = row
        matrix[r, n + j] = 1.0
        rhs[r] = value
    big_obj = np.concatenate([objective, np.zeros(k)])
    big_box = np.vstack([box, np.tile([0.0, np.inf], (k, 1))])
    return LinearProgram(big_obj, matrix, rhs, big_box)


def _post_joint_lp(spec: StrataLpSpec, q0: float, sense: Sense):
    """Joint LP over (nu, rho) at a fixed Q0, where nu_s(t) = mu_s(t) rho_s."""
    n_nu = strata.N_STRATA * 2
    n = n_nu + strata.N_STRATA
    rho_off = n_nu

    def nu_col(s_idx, t):
        return s_idx * 2 + t

    eq_rows, eq_rhs = [], []
    for mask, t, value in _post_moment_rows(spec.probs):
        row = np.zeros(n)
        row[[nu_col(i, t) for i in np.where(mask)[0]]] = 1.0
        eq_rows.append(row)
        eq_rhs.append(value)
    if spec.assumptions.inattentive_exclusion:
        row = np.zeros(n)
        i000 = strata.STRATUM_INDEX["000"]
        row[nu_col(i000, 1)] = 1.0
        row[nu_col(i000, 0)] = -1.0
        eq_rows.append(row)
        eq_rhs.append(0.0)
    rr, rv, ineq = _rho_moment_rows(spec, n, rho_off, q0)
    eq_rows += rr
    eq_rhs += rv
    # nu_s(t) <= rho_s
    for i in range(strata.N_STRATA):
        for t in (0, 1):
            row = np.zeros(n)
            row[nu_col(i, t)] = 1.0
            row[rho_off + i] = -1.0
            ineq.append((row, 0.0))

    weights = _target_weights(spec.target, q0)
    objective = np.zeros(n)
    for i in range(strata.N_STRATA):
        objective[nu_col(i, 1)] = weights[i]
        objective[nu_col(i, 0)] = -weights[i]
    box = np.tile([0.0, np.inf], (n, 1))
    _excluded_boxes(spec, box, rho_off)
    lp = _assemble(objective, eq_rows, eq_rhs, ineq, box)
    lp.sense = sense
    return lp


def _placement_joint_lp(spec: StrataLpSpec, sense: Sense):
    """Joint LP over (w, rho) for the randomized placement design."""
    q0 = spec.probs.require_q0()
    n_w = strata.N_STRATA * 2 * 4
    n = n_w + strata.N_STRATA
    rho_off = n_w
    eq_rows, eq_rhs = [], []

    for i in range(strata.N_STRATA):
        for t in (0, 1):
            row = np.zeros(n)
            for y1 in (0, 1):
                for y0 in (0, 1):
                    row[_w_col(i, t, y1, y0)] = 1.0
            row[rho_off + i] = -1.0
            eq_rows.append(row)
            eq_rhs.append(0.0)
    for mask, t, value in _post_moment_rows(spec.probs):
        row = np.zeros(n)
        for i in np.where(mask)[0]:
            for y0 in (0, 1):
                row[_w_col(i, t, 1, y0)] = 1.0
        eq_rows.append(row)
        eq_rhs.append(value)
    p = spec.probs.p_tzd
    for t in (0, 1):
        for d in (0, 1):
            members = [strata.STRATUM_INDEX[s] for s in strata.S_STAR[d]]
            row = np.zeros(n)
            for i in members:
                for y1 in (0, 1):
                    row[_w_col(i, t, y1, 1)] = 1.0
                row[rho_off + i] -= p[t, 0, d]
            eq_rows.append(row)
            eq_rhs.append(0.0)
    if spec.assumptions.inattentive_exclusion:
        row = np.zeros(n)
        i000 = strata.STRATUM_INDEX["000"]
        for y0 in (0, 1):
            row[_w_col(i000, 1, 1, y0)] = 1.0
            row[_w_col(i000, 0, 1, y0)] = -1.0
        eq_rows.append(row)
        eq_rhs.append(0.0)

    rr, rv, ineq = _rho_moment_rows(spec, n, rho_off, q0)
    eq_rows += rr
    eq_rhs += rv
    theta = spec.assumptions.theta
    if theta is not None:
        for t in (0, 1):
            for d in (0, 1):
                members = [strata.STRATUM_INDEX[s] for s in strata.S_STAR[d]]
                row = np.zeros(n)
                for i in members:
                    row[_w_col(i, t, 1, 0)] = 1.0
                    row[_w_col(i, t, 0, 1)] = 1.0
                    row[rho_off + i] -= theta
                ineq.append((row, 0.0))

    weights = _target_weights(spec.target, q0)
    objective = np.zeros(n)
    for i in range(strata.N_STRATA):
        for y0 in (0, 1):
            objective[_w_col(i, 1, 1, y0)] += weights[i]
            objective[_w_col(i, 0, 1, y0)] -= weights[i]
    box = np.tile([0.0, np.inf], (n, 1))
    prime = spec.assumptions.priming_monotonicity
    for i in range(strata.N_STRATA):
        for t in (0, 1):
            if prime is Monotonicity.POSITIVE:
                box[_w_col(i, t, 1, 0), 1] = 0.0
            elif prime is Monotonicity.NEGATIVE:
                box[_w_col(i, t, 0, 1), 1] = 0.0
    _excluded_boxes(spec, box, rho_off)
    lp = _assemble(objective, eq_rows, eq_rhs, ineq, box)
    lp.sense = sense
    return lp


def _q0_feasible_range(spec: StrataLpSpec) -> tuple:
    """Min/max of Q0 over rho satisfying moments, exclusions, and gamma."""
    n = strata.N_STRATA
    rr = []
    rhs = []
    q = spec.probs.q_tz
    for mask, value in (
        (np.ones(n, dtype=bool), 1.0),
        (strata.D_POST_TREATED == 1, q[1, 1]),
        (strata.D_POST_CONTROL == 1, q[0, 1]),
    ):
        row = np.zeros(n)
        row[np.where(mask)[0]] = 1.0
        rr.append(row)
        rhs.append(value)
    ineq = []
    if spec.assumptions.gamma is not None:
        row = np.zeros(n)
        movers = [
            i
            for i, s in enumerate(strata.STRATA)
            if s not in strata.UNAFFECTED
        ]
        row[movers] = 1.0
        ineq.append((row, spec.assumptions.gamma))
    objective = (strata.D_PRE == 1).astype(float)
    box = np.tile([0.0, np.inf], (n, 1))
    allowed = set(spec.allowed())
    for i, s in enumerate(strata.STRATA):
        if s not in allowed:
            box[i, 1] = 0.0
    out = []
    for sense in (Sense.MIN, Sense.MAX):
        lp = _assemble(objective.copy(), rr, rhs, list(ineq), box.copy())
        lp.sense = sense
        res = simplex_solve(lp)
        if res.status is not LpStatus.OPTIMAL:
            return None
        out.append(res.value)
    return out[0], out[1]


def minimum_gamma(
    design: Design, probs: CellProbabilities, allowed=None
) -> float:
    """Smallest feasible mover share given the observed moments.

    For the post-test design this is |Q11 - Q01|.  The placement design
    observes Q0 as well, which can force more movers; the minimum is
    then the LP value of the smallest total mass off the unaffected
    strata.
    """
    base = float(abs(probs.q_tz[1, 1] - probs.q_tz[0, 1]))
    if design is not Design.RANDOMIZED_PLACEMENT or probs.q0 is None:
        return base
    n = strata.N_STRATA
    rows, rhs = [], []
    q = probs.q_tz
    for mask, value in (
        (np.ones(n, dtype=bool), 1.0),
        (strata.D_POST_TREATED == 1, q[1, 1]),
        (strata.D_POST_CONTROL == 1, q[0, 1]),
        (strata.D_PRE == 1, probs.q0),
    ):
        row = np.zeros(n)
        row[np.where(mask)[0]] = 1.0
        rows.append(row)
        rhs.append(value)
    objective = np.array(
        [0.0 if s in strata.UNAFFECTED else 1.0 for s in strata.STRATA]
    )
    box = np.tile([0.0, np.inf], (n, 1))
    if allowed is not None:
        allowed = set(allowed)
        for i, s in enumerate(strata.STRATA):
            if s not in allowed:
                box[i, 1] = 0.0
    lp = LinearProgram(objective, np.array(rows), np.array(rhs), box, Sense.MIN)
    res = simplex_solve(lp)
    if res.status is not LpStatus.OPTIMAL:
        raise InfeasibleData("observed moments admit no strata model")
    return max(base, res.value)


def _reconcile_placement_q0(spec: StrataLpSpec) -> StrataLpSpec:
    """Project the observed pre-arm moderator share into the range the
    exclusion restrictions allow.

    Strata exclusions tie Q0 to the post-arm moments (exactly under
    stability, by an inequality under monotonicity), so the empirical
    pre-arm share is almost surely slightly inconsistent with them.
    Using the projected value keeps the moment system solvable; a large
    projection means the data genuinely contradict the assumptions.
    """
    import copy
    import warnings

    from .errors import MonotonicityViolatedWarning

    q0 = spec.probs.require_q0()
    rng = _q0_feasible_range(spec)
    if rng is None:
        raise InfeasibleData("observed moments admit no strata model")
    q0_eff = float(np.clip(q0, rng[0], rng[1]))
    if q0_eff == q0:
        return spec
    if abs(q0_eff - q0) > 0.02:
        warnings.warn(
            f"pre-arm moderator share {q0:.4f} projected to {q0_eff:.4f} to "
            "satisfy the strata exclusions; the data may contradict them",
            MonotonicityViolatedWarning,
        )
    probs = spec.probs
    new_probs = CellProbabilities(
        p_tzd=probs.p_tzd,
        q_tz=probs.q_tz,
        p_t=probs.p_t,
        q0=q0_eff,
        cell_sizes=probs.cell_sizes,
        design=probs.design,
    )
    new_spec = copy.copy(spec)
    new_spec.probs = new_probs
    return new_spec


def _check_gamma_feasible(spec: StrataLpSpec):
    gamma = spec.assumptions.gamma
    if gamma is None:
        return
    q = spec.probs.q_tz
    minimum = abs(q[1, 1] - q[0, 1])
    if gamma < minimum - _FEAS_TOL:
        raise InfeasibleBudget(
            f"gamma={gamma} below feasibility minimum |Q11-Q01|={minimum:.6g}"
        )


def strata_bounds(spec: StrataLpSpec):
    """Sharp-bound interval for the spec's target via linear programming.

    With ``rho_outer`` fixed this solves the inner LP directly.  For the
    post-test design with unknown Q0 it profiles the joint (mass, rho)
    LP over an adaptively refined Q0 grid and returns the envelope; the
    placement design identifies Q0 from the pre-test arm, so a single
    joint LP per direction suffices.
    """
    from .bounds_closed import BoundInterval, Q0Known, Q0Optimized

    _check_gamma_feasible(spec)
    if spec.design is Design.PRE_ONLY:
        raise InfeasibleData("pre-test-only data do not bound the target")

    if spec.rho_outer is not None:
        builder = (
            build_placement_lp
            if spec.variables is LpVariables.JOINT_MASS_W
            else build_post_test_lp
        )
        lp = builder(spec, spec.rho_outer)
        vals = []
        for sense in (Sense.MIN, Sense.MAX):
            lp.sense = sense
            res = simplex_solve(lp)
            if res.status is not LpStatus.OPTIMAL:
                raise InfeasibleData(
                    f"inner LP {res.status.value} for fixed rho"
                )
            vals.append(res.value)
        q0 = spec.rho_outer.q_values()["q0"]
        return BoundInterval(
            lower=vals[0],
            upper=vals[1],
            assumptions=spec.assumptions,
            target=spec.target.label(),
            q0_mode=Q0Known(q0),
        )

    if spec.design is Design.RANDOMIZED_PLACEMENT:
        spec = _reconcile_placement_q0(spec)
        vals = []
        for sense in (Sense.MIN, Sense.MAX):
            res = simplex_solve(_placement_joint_lp(spec, sense))
            if res.status is not LpStatus.OPTIMAL:
                raise (
                    InfeasibleBudget("budget constraints admit no strata model")
                    if (
                        spec.assumptions.gamma is not None
                        or spec.assumptions.theta is not None
                    )
                    else InfeasibleData(
                        "observed probabilities admit no strata model"
                    )
                )
            vals.append(res.value)
        return BoundInterval(
            lower=vals[0],
            upper=vals[1],
            assumptions=spec.assumptions,
            target=spec.target.label(),
            q0_mode=Q0Known(spec.probs.require_q0()),
        )

    # post-test design: a supplied Q0 is honored, otherwise profile over
    # the feasible Q0 range
    def value_at(q0, sense):
        res = simplex_solve(_post_joint_lp(spec, q0, sense))
        if res.status is not LpStatus.OPTIMAL:
            return -np.inf  # infeasible grid point: never the envelope
        return res.value if sense is Sense.MAX else -res.value

    if spec.probs.q0 is not None:
        q0 = spec.probs.q0
        upper = value_at(q0, Sense.MAX)
        neg_lower = value_at(q0, Sense.MIN)
        if not np.isfinite(upper) or not np.isfinite(neg_lower):
            raise InfeasibleData(
                "observed probabilities admit no strata model at this Q0"
            )
        return BoundInterval(
            lower=-neg_lower,
            upper=upper,
            assumptions=spec.assumptions,
            target=spec.target.label(),
            q0_mode=Q0Known(q0),
        )

    rng = _q0_feasible_range(spec)
    if rng is None:
        raise InfeasibleData("observed probabilities admit no strata model")
    lo = max(rng[0], _Q_EPS)
    hi = min(rng[1], 1.0 - _Q_EPS)
    if lo > hi:
        raise InfeasibleData("feasible Q0 range is degenerate")

    _, upper = maximize_on_interval(lambda q: value_at(q, Sense.MAX), lo, hi)
    _, neg_lower = maximize_on_interval(
        lambda q: value_at(q, Sense.MIN), lo, hi
    )
    if not np.isfinite(upper) or not np.isfinite(neg_lower):
        raise InfeasibleData("no feasible Q0 grid point")
    return BoundInterval(
        lower=-neg_lower,
        upper=upper,
        assumptions=spec.assumptions,
        target=spec.target.label(),
        q0_mode=Q0Optimized(),
    )
