import itertools
import math

import numpy as np
import pytest

from threebox.boxbasis import ModeTriple, enumerate_states
from threebox.d3d import build_salcs


def brute_force_triples(max_energy_sum):
    nmax = math.isqrt(max_energy_sum)
    return [
        t for t in itertools.product(range(1, nmax + 1), repeat=3)
        if sum(n * n for n in t) <= max_energy_sum
    ]


@pytest.fixture(scope="session")
def salcs27():
    return [s for m in enumerate_states(27) for s in build_salcs(m)]


def embed(salcs, triples):
    """Columns of SALC coefficients over an explicit list of product states."""
    index = {ModeTriple(*t): i for i, t in enumerate(triples)}
    out = np.zeros((len(triples), len(salcs)))
    for j, s in enumerate(salcs):
        for t, c in s.coefficients.items():
            out[index[t], j] = c
    return out
