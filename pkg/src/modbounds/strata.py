"""Principal-stratum bookkeeping.

A stratum label is a three-character string ``"abc"`` recording the
potential moderator values (D(1,1), D(0,1), D(0)) for a unit.  All
modules index strata in the fixed order of ``STRATA``.
"""

import numpy as np

# canonical order used for every rho/mu array in the package
STRATA = ("111", "011", "101", "001", "110", "010", "100", "000")
STRATUM_INDEX = {s: i for i, s in enumerate(STRATA)}
N_STRATA = len(STRATA)

# digit lookups as arrays over the canonical order
D_POST_TREATED = np.array([int(s[0]) for s in STRATA])   # D(1,1)
D_POST_CONTROL = np.array([int(s[1]) for s in STRATA])   # D(0,1)
D_PRE = np.array([int(s[2]) for s in STRATA])            # D(0)

# strata whose true (pre-test) moderator equals d
S_STAR = {
    1: tuple(s for s in STRATA if s[2] == "1"),
    0: tuple(s for s in STRATA if s[2] == "0"),
}


def d_observed(stratum: str, t: int, z: int) -> int:
    """Moderator value observed for a unit of this stratum in arm (t, z)."""
    if z == 0:
        return int(stratum[2])
    return int(stratum[0]) if t == 1 else int(stratum[1])


def consistent_strata(t: int, z: int, d: int) -> tuple:
    """Strata a unit with observed (T=t, Z=z, D=d) could belong to."""
    return tuple(s for s in STRATA if d_observed(s, t, z) == d)


MONOTONE_POSITIVE = tuple(
    s for s in STRATA if int(s[0]) >= int(s[2]) and int(s[1]) >= int(s[2])
)  # ('111', '110', '010', '100', '000')
MONOTONE_NEGATIVE = tuple(
    s for s in STRATA if int(s[0]) <= int(s[2]) and int(s[1]) <= int(s[2])
)  # ('111', '011', '101', '001', '000')
STABLE_CONTROL = tuple(s for s in STRATA if s[1] == s[2])
# ('111', '011', '100', '000')
UNAFFECTED = ("111", "000")


def allowed_strata(assumptions) -> tuple:
    """Strata surviving the exclusion restrictions of an AssumptionSet."""
    from .data_model import Monotonicity

    allowed = set(STRATA)
    if assumptions.moderator_monotonicity is Monotonicity.POSITIVE:
        allowed &= set(MONOTONE_POSITIVE)
    elif assumptions.moderator_monotonicity is Monotonicity.NEGATIVE:
        allowed &= set(MONOTONE_NEGATIVE)
    if assumptions.stable_moderator_control:
        allowed &= set(STABLE_CONTROL)
    if assumptions.attention_monotonicity:
        allowed &= set(MONOTONE_NEGATIVE)
    return tuple(s for s in STRATA if s in allowed)
