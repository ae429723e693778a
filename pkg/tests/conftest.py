import numpy as np
import pytest

from modbounds import strata
from modbounds.data_model import CellProbabilities, Design, StrataDistribution


def make_post_probs(p111, p011, p110, p010, q11, q01, q0=None):
    """CellProbabilities for a post-test design from its six numbers."""
    p = np.full((2, 2, 2), np.nan)
    q = np.full((2, 2), np.nan)
    p[1, 1, 1], p[0, 1, 1] = p111, p011
    p[1, 1, 0], p[0, 1, 0] = p110, p010
    q[1, 1], q[0, 1] = q11, q01
    p_t = np.array(
        [p011 * q01 + p010 * (1 - q01), p111 * q11 + p110 * (1 - q11)]
    )
    return CellProbabilities(
        p_tzd=p,
        q_tz=q,
        p_t=p_t,
        q0=q0,
        cell_sizes=np.zeros((2, 2, 2), dtype=np.int64),
        design=Design.POST_ONLY,
    )


def random_mu_distribution(rng, allowed):
    """Random strata model with stratum means, supported on ``allowed``."""
    weights = rng.dirichlet(np.ones(len(allowed)))
    rho = {
        s: (weights[list(allowed).index(s)] if s in allowed else 0.0)
        for s in strata.STRATA
    }
    mu = {
        s: {t: {z: float(rng.uniform()) for z in (0, 1)} for t in (0, 1)}
        for s in strata.STRATA
    }
    return StrataDistribution(rho=rho, mu=mu)


def random_psi_distribution(rng, allowed, diagonal=False, prime_positive=False):
    """Random strata model with joint pre/post outcome tables."""
    weights = rng.dirichlet(np.ones(len(allowed)))
    rho = {
        s: (weights[list(allowed).index(s)] if s in allowed else 0.0)
        for s in strata.STRATA
    }
    psi = {}
    for s in strata.STRATA:
        psi[s] = {}
        for t in (0, 1):
            if diagonal:
                p1 = float(rng.uniform())
                table = {1: {1: p1, 0: 0.0}, 0: {1: 0.0, 0: 1.0 - p1}}
            elif prime_positive:
                m = rng.dirichlet(np.ones(3))
                table = {
                    1: {1: float(m[0]), 0: 0.0},
                    0: {1: float(m[1]), 0: float(m[2])},
                }
            else:
                m = rng.dirichlet(np.ones(4))
                table = {
                    1: {1: float(m[0]), 0: float(m[1])},
                    0: {1: float(m[2]), 0: float(m[3])},
                }
            psi[s][t] = table
    return StrataDistribution(rho=rho, psi=psi)


def interior_qs(dist, margin=0.03):
    qs = dist.q_values()
    return all(margin < v < 1.0 - margin for v in qs.values())


@pytest.fixture
def rng():
    return np.random.default_rng(20240801)
