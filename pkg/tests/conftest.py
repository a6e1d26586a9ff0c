import numpy as np
import pytest

from rhomix.majorization import sample_majorized, sort_descending


@pytest.fixture
def rng():
    return np.random.default_rng(20021102)


def random_probability(n, rng, zeros=0):
    v = rng.dirichlet(np.ones(n))
    if zeros:
        v[rng.choice(n, size=min(zeros, n - 1), replace=False)] = 0.0
        v /= v.sum()
    return v


def random_majorized_pair(rng, n_max=8):
    """(p, q) sorted descending, equal length, p majorized by q."""
    n = int(rng.integers(1, n_max + 1))
    q = random_probability(n, rng, zeros=int(rng.integers(0, n)) if n > 1 else 0)
    p = sample_majorized(q, int(rng.integers(2**32)))
    return sort_descending(p)[0], sort_descending(q)[0]
