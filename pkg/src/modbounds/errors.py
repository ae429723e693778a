"""Exception hierarchy shared across the package.

Data errors (bad input files, empty cells) and model errors (infeasible
budgets, degenerate denominators) are kept distinct so the CLI can map
them onto its exit codes.
"""


class ModboundsError(Exception):
    """Base class for all package errors."""


class DataError(ModboundsError):
    """Problems with user-supplied data."""


class MissingColumn(DataError):
    def __init__(self, column):
        self.column = column
        super().__init__(f"required column missing: {column!r}")


class NonBinaryValue(DataError):
    def __init__(self, row, column, value):
        self.row = row
        self.column = column
        self.value = value
        super().__init__(
            f"non-binary value {value!r} in column {column!r} on row {row}"
        )


class RaggedCovariates(DataError):
    def __init__(self, row, expected, got):
        self.row = row
        super().__init__(
            f"row {row} has {got} covariates, expected {expected}"
        )


class EmptyData(DataError):
    def __init__(self, message="no records supplied"):
        super().__init__(message)


class EmptyCell(DataError):
    """A conditional probability has an empty denominator cell."""

    def __init__(self, t, z, d=None):
        self.t, self.z, self.d = t, z, d
        where = f"T={t}, Z={z}" + ("" if d is None else f", D={d}")
        super().__init__(f"empty cell: no observations with {where}")


class ModelError(ModboundsError):
    """Problems in bound/posterior computation."""


class DomainError(ModelError):
    """An input probability lies outside its admissible range."""


class DegenerateStratum(ModelError):
    """An implied denominator (Q0, Q11 or Q01) is 0 or 1."""


class InfeasibleQ0(ModelError):
    """Known Q0 is outside the range allowed by the assumptions."""


class InfeasibleData(ModelError):
    """Observed probabilities contradict the maintained assumptions."""


class DegenerateQ(ModelError):
    """A moderator probability needed as a denominator is 0 or 1."""


class InfeasibleBudget(ModelError):
    """A sensitivity budget is below its feasibility minimum."""


class InconsistentRho(ModelError):
    """Fixed strata probabilities contradict the observed moments."""


class InvalidStrata(ModelError):
    """A strata distribution fails its own invariants."""


class TooManyFailedReplicates(ModelError):
    def __init__(self, failed, total):
        self.failed = failed
        self.total = total
        super().__init__(
            f"{failed}/{total} bootstrap replicates failed (>10% tolerated)"
        )


class NoRoot(ModelError):
    """Bisection failed to bracket a root."""


class InitFailure(ModelError):
    """No principal stratum is feasible for some unit."""


class MonotonicityViolatedWarning(UserWarning):
    """Data strongly contradict the assumed monotonicity direction."""
