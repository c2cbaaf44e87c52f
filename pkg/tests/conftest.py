import numpy as np
import pytest

from mchit import family, from_matrix


@pytest.fixture
def c2():
    """q(0,1) = 1, q(1,0) = 2; pi = (2/3, 1/3)."""
    return from_matrix([[-1.0, 1.0], [2.0, -2.0]])


@pytest.fixture
def cycle3():
    return family("cycle", 3)


@pytest.fixture
def cycle4():
    return family("cycle", 4)


@pytest.fixture
def biased3():
    return family("biased-cycle", 3)


def random_chains(count=12, sizes=range(3, 9)):
    out = []
    for i in range(count):
        n = list(sizes)[i % len(sizes)]
        mode = "continuous" if i % 2 == 0 else "discrete"
        out.append(family("random", n, mode=mode, seed=100 + i))
    return out


def brute_hitting(chain, A):
    """Expected hitting times by the plain full-matrix system (independent of
    the complement-block solver): h = 0 on A, (G h)(x) = -1 off A."""
    n = chain.n
    G = chain.matrix if chain.continuous else chain.matrix - np.eye(n)
    M = G.copy()
    b = -np.ones(n)
    for a in A:
        M[a] = 0.0
        M[a, a] = 1.0
        b[a] = 0.0
    return np.linalg.solve(M, b)
