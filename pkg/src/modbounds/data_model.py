"""Domain types, CSV ingestion, and cross-tabulation.

Everything downstream works from a ``CellTable`` of counts over the 16
(T, Z, D, Y) cells, so this module is the only place that touches raw
unit records.
"""

import csv
import enum
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from . import strata
from .errors import (
    DegenerateStratum,
    EmptyCell,
    EmptyData,
    InvalidStrata,
    MissingColumn,
    NonBinaryValue,
    RaggedCovariates,
)


class Design(enum.Enum):
    POST_ONLY = "post_only"
    PRE_ONLY = "pre_only"
    RANDOMIZED_PLACEMENT = "randomized_placement"


class Monotonicity(enum.Enum):
    NONE = "none"
    POSITIVE = "positive"
    NEGATIVE = "negative"


@dataclass(frozen=True)
class ObservationRecord:
    """One survey respondent: binary outcome, treatment, timing, moderator."""

    y: int
    t: int
    z: int
    d: int
    x: tuple = ()

    def __post_init__(self):
        for name in ("y", "t", "z", "d"):
            if getattr(self, name) not in (0, 1):
                raise NonBinaryValue(None, name, getattr(self, name))


@dataclass(frozen=True)
class ColumnSchema:
    """Column mapping for CSV ingestion.

    ``labels`` optionally maps raw cell strings to 0/1 before validation
    (e.g. {"treated": 1, "control": 0}); the core otherwise accepts only
    literal 0/1.
    """

    y: str = "y"
    t: str = "t"
    z: str = "z"
    d: str = "d"
    x: tuple = ()
    labels: dict = field(default_factory=dict)


@dataclass(frozen=True)
class AssumptionSet:
    """Identification assumptions and sensitivity budgets in force."""

    moderator_monotonicity: Monotonicity = Monotonicity.NONE
    stable_moderator_control: bool = False
    priming_monotonicity: Monotonicity = Monotonicity.NONE
    attention_monotonicity: bool = False
    inattentive_exclusion: bool = False
    gamma: float | None = None
    theta: float | None = None

    def __post_init__(self):
        if self.stable_moderator_control and (
            self.moderator_monotonicity is Monotonicity.NONE
        ):
            raise ValueError(
                "stable_moderator_control requires a moderator "
                "monotonicity direction"
            )
        if (
            self.attention_monotonicity or self.inattentive_exclusion
        ) and self.moderator_monotonicity is Monotonicity.POSITIVE:
            raise ValueError(
                "attention-check assumptions conflict with positive "
                "moderator monotonicity"
            )
        for name in ("gamma", "theta"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")

    def allowed_strata(self) -> tuple:
        return strata.allowed_strata(self)

    def to_dict(self) -> dict:
        return {
            "moderator_monotonicity": self.moderator_monotonicity.value,
            "stable_moderator_control": self.stable_moderator_control,
            "priming_monotonicity": self.priming_monotonicity.value,
            "attention_monotonicity": self.attention_monotonicity,
            "inattentive_exclusion": self.inattentive_exclusion,
            "gamma": self.gamma,
            "theta": self.theta,
        }


RAND = AssumptionSet()
MONO = AssumptionSet(moderator_monotonicity=Monotonicity.POSITIVE)
MONO_STABLE = AssumptionSet(
    moderator_monotonicity=Monotonicity.POSITIVE, stable_moderator_control=True
)
ATTENTION = AssumptionSet(
    attention_monotonicity=True, inattentive_exclusion=True
)


@dataclass(frozen=True)
class CellTable:
    """Counts over the 16 (t, z, d, y) cells plus the inferred design."""

    n: np.ndarray  # shape (2, 2, 2, 2), indexed [t, z, d, y]
    design: Design

    def __post_init__(self):
        arr = np.asarray(self.n, dtype=np.int64)
        if arr.shape != (2, 2, 2, 2) or (arr < 0).any():
            raise ValueError("cell table must be nonnegative with shape 2^4")
        object.__setattr__(self, "n", arr)
        if self.design is Design.POST_ONLY and arr[:, 0].sum() > 0:
            raise ValueError("post-only design cannot contain Z=0 records")
        if self.design is Design.PRE_ONLY and arr[:, 1].sum() > 0:
            raise ValueError("pre-only design cannot contain Z=1 records")

    @property
    def total(self) -> int:
        return int(self.n.sum())

    def arm_size(self, t: int, z: int) -> int:
        return int(self.n[t, z].sum())

    def digest(self) -> str:
        """Stable hash of counts + design, for embedding in outputs."""
        payload = json.dumps(
            {"design": self.design.value, "counts": self.n.ravel().tolist()},
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class CellProbabilities:
    """Estimated conditional probabilities feeding every bound.

    ``p_tzd[t, z, d]`` is P(Y=1 | T=t, Z=z, D=d); ``q_tz[t, z]`` is
    P(D=1 | T=t, Z=z); ``p_t[t]`` is P(Y=1 | T=t, Z=1).  Cells that do
    not exist under the design hold NaN.  ``q0`` is P(D=1 | Z=0), only
    available when a pre-test arm exists.
    """

    p_tzd: np.ndarray
    q_tz: np.ndarray
    p_t: np.ndarray
    q0: float | None
    cell_sizes: np.ndarray  # counts per (t, z, d)
    design: Design

    def __post_init__(self):
        for name in ("p_tzd", "q_tz", "p_t"):
            a = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, a)
            finite = a[np.isfinite(a)]
            if ((finite < -1e-12) | (finite > 1 + 1e-12)).any():
                raise ValueError(f"{name} contains values outside [0, 1]")

    def require_q0(self) -> float:
        if self.q0 is None:
            raise EmptyCell(t=None, z=0)
        return self.q0


@dataclass(frozen=True)
class StrataDistribution:
    """A full principal-strata specification used by oracles and DGPs.

    ``rho`` maps stratum label -> probability.  Outcome behaviour comes
    from either ``mu`` (stratum means, ``mu[s][t][z]``) or ``psi`` (joint
    pre/post outcome probabilities, ``psi[s][t][y1][y0]``).
    """

    rho: dict
    mu: dict | None = None
    psi: dict | None = None

    def __post_init__(self):
        rho = {s: float(self.rho.get(s, 0.0)) for s in strata.STRATA}
        if any(v < -1e-12 for v in rho.values()):
            raise InvalidStrata("negative stratum probability")
        total = sum(rho.values())
        if abs(total - 1.0) > 1e-9:
            raise InvalidStrata(f"stratum probabilities sum to {total}")
        object.__setattr__(self, "rho", rho)
        if self.mu is not None:
            for s, per_t in self.mu.items():
                for t, per_z in per_t.items():
                    for z, v in per_z.items():
                        if not 0.0 <= v <= 1.0:
                            raise InvalidStrata(
                                f"mu[{s}][{t}][{z}]={v} outside [0, 1]"
                            )
        if self.psi is not None:
            for s, per_t in self.psi.items():
                for t, table in per_t.items():
                    tot = sum(
                        table[y1][y0] for y1 in (0, 1) for y0 in (0, 1)
                    )
                    if abs(tot - 1.0) > 1e-9:
                        raise InvalidStrata(
                            f"psi[{s}][{t}] sums to {tot}, expected 1"
                        )
                    if any(
                        table[y1][y0] < -1e-12
                        for y1 in (0, 1)
                        for y0 in (0, 1)
                    ):
                        raise InvalidStrata("negative psi mass")

    # -- derived quantities -------------------------------------------------

    def rho_vector(self) -> np.ndarray:
        return np.array([self.rho[s] for s in strata.STRATA])

    def mean_post(self, s: str, t: int) -> float:
        """mu_s(t, 1): mean post-test potential outcome in stratum s."""
        if self.psi is not None:
            tab = self.psi[s][t]
            return tab[1][0] + tab[1][1]
        if self.mu is None:
            raise InvalidStrata("neither mu nor psi supplied")
        return self.mu[s][t][1]

    def mean_pre(self, s: str, t: int) -> float:
        """mu_s(t, 0): mean pre-test potential outcome in stratum s."""
        if self.psi is not None:
            tab = self.psi[s][t]
            return tab[0][1] + tab[1][1]
        if self.mu is None:
            raise InvalidStrata("neither mu nor psi supplied")
        return self.mu[s][t][0]

    def q_values(self) -> dict:
        """Implied Q11, Q01, Q0 from the strata probabilities."""
        rho = self.rho_vector()
        return {
            "q11": float(rho @ strata.D_POST_TREATED),
            "q01": float(rho @ strata.D_POST_CONTROL),
            "q0": float(rho @ strata.D_PRE),
        }

    def true_cate(self, d: int) -> float:
        """tau(d) implied by the strata model."""
        members = [s for s in strata.S_STAR[d] if self.rho[s] > 0]
        mass = sum(self.rho[s] for s in members)
        if mass <= 0:
            raise DegenerateStratum(f"no mass on strata with D(0)={d}")
        return (
            sum(
                (self.mean_post(s, 1) - self.mean_post(s, 0)) * self.rho[s]
                for s in members
            )
            / mass
        )

    def true_delta(self) -> float:
        return self.true_cate(1) - self.true_cate(0)

    def true_ate(self) -> float:
        return sum(
            (self.mean_post(s, 1) - self.mean_post(s, 0)) * self.rho[s]
            for s in strata.STRATA
            if self.rho[s] > 0
        )

    def implied_probabilities(self, design: Design) -> CellProbabilities:
        """Population CellProbabilities this strata model generates."""
        p_tzd = np.full((2, 2, 2), np.nan)
        q_tz = np.full((2, 2), np.nan)
        p_t = np.full(2, np.nan)
        qs = self.q_values()
        zs = {
            Design.POST_ONLY: (1,),
            Design.PRE_ONLY: (0,),
            Design.RANDOMIZED_PLACEMENT: (0, 1),
        }[design]
        for z in zs:
            for t in (0, 1):
                q_tz[t, z] = (
                    qs["q0"]
                    if z == 0
                    else (qs["q11"] if t == 1 else qs["q01"])
                )
                mean = (
                    self.mean_post if z == 1 else self.mean_pre
                )
                if z == 1:
                    p_t[t] = sum(
                        mean(s, t) * self.rho[s]
                        for s in strata.STRATA
                        if self.rho[s] > 0
                    )
                for d in (0, 1):
                    cell = [
                        s
                        for s in strata.STRATA
                        if strata.d_observed(s, t, z) == d
                        and self.rho[s] > 0
                    ]
                    mass = sum(self.rho[s] for s in cell)
                    if mass > 0:
                        p_tzd[t, z, d] = (
                            sum(mean(s, t) * self.rho[s] for s in cell) / mass
                        )
        q0 = qs["q0"] if design is not Design.POST_ONLY else None
        return CellProbabilities(
            p_tzd=p_tzd,
            q_tz=q_tz,
            p_t=p_t,
            q0=q0,
            cell_sizes=np.zeros((2, 2, 2), dtype=np.int64),
            design=design,
        )


# -- operations --------------------------------------------------------------


def _parse_binary(raw: str, row: int, column: str, labels: dict) -> int:
    value = labels.get(raw, raw)
    if value in (0, 1):
        return value
    text = str(value).strip()
    if text in ("0", "1"):
        return int(text)
    raise NonBinaryValue(row, column, raw)


def ingest_csv(path, schema: ColumnSchema = ColumnSchema()) -> list:
    """Read unit records from a CSV file with a header row.

    Returns one ObservationRecord per data row; covariates are parsed as
    floats in the order declared by ``schema.x``.
    """
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        for column in (schema.y, schema.t, schema.z, schema.d, *schema.x):
            if column not in header:
                raise MissingColumn(column)
        records = []
        for i, row in enumerate(reader, start=1):
            vals = {}
            for name, column in (
                ("y", schema.y),
                ("t", schema.t),
                ("z", schema.z),
                ("d", schema.d),
            ):
                vals[name] = _parse_binary(row[column], i, name, schema.labels)
            try:
                x = tuple(float(row[c]) for c in schema.x)
            except (TypeError, ValueError):
                raise RaggedCovariates(i, len(schema.x), "unparseable")
            records.append(ObservationRecord(x=x, **vals))
    if records:
        dim = len(records[0].x)
        for i, rec in enumerate(records, start=1):
            if len(rec.x) != dim:
                raise RaggedCovariates(i, dim, len(rec.x))
    return records


def infer_design(z_values) -> Design:
    z_values = np.asarray(z_values)
    has_pre = (z_values == 0).any()
    has_post = (z_values == 1).any()
    if has_pre and has_post:
        return Design.RANDOMIZED_PLACEMENT
    return Design.POST_ONLY if has_post else Design.PRE_ONLY


def tabulate(records) -> CellTable:
    """Cross-tabulate records into the 16 (t, z, d, y) cells."""
    if not len(records):
        raise EmptyData()
    arr = records_to_arrays(records)
    return tabulate_arrays(arr["t"], arr["z"], arr["d"], arr["y"])


def records_to_arrays(records) -> dict:
    y = np.fromiter((r.y for r in records), dtype=np.int64, count=len(records))
    t = np.fromiter((r.t for r in records), dtype=np.int64, count=len(records))
    z = np.fromiter((r.z for r in records), dtype=np.int64, count=len(records))
    d = np.fromiter((r.d for r in records), dtype=np.int64, count=len(records))
    x = np.array([r.x for r in records], dtype=float)
    if x.size == 0:
        x = x.reshape(len(records), 0)
    return {"y": y, "t": t, "z": z, "d": d, "x": x}


def tabulate_arrays(t, z, d, y) -> CellTable:
    """Array-based tabulation used by the bootstrap hot path."""
    if len(t) == 0:
        raise EmptyData()
    code = ((np.asarray(t) * 2 + np.asarray(z)) * 2 + np.asarray(d)) * 2 + (
        np.asarray(y)
    )
    counts = np.bincount(code, minlength=16).reshape(2, 2, 2, 2)
    return CellTable(n=counts, design=infer_design(z))
