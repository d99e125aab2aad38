import numpy as np
import pytest

from twistedhgp.protocol import DenseProtocol, plan_all, plan_fountain
from twistedhgp.skeleton import triple_code


def rep(L):
    """Cyclic repetition code: check i touches bits i and i+1."""
    H = np.zeros((L, L), dtype=np.uint8)
    for i in range(L):
        H[i, i] = H[i, (i + 1) % L] = 1
    return H


@pytest.fixture(scope="session")
def rep_code():
    cache = {}

    def get(L, adjacency="min-index"):
        if (L, adjacency) not in cache:
            cache[L, adjacency] = triple_code(rep(L), rep(L), adjacency)
        return cache[L, adjacency]

    return get


@pytest.fixture(scope="session")
def tc2(rep_code):
    return rep_code(2)


@pytest.fixture(scope="session")
def tc3(rep_code):
    return rep_code(3)


@pytest.fixture(scope="session")
def fountain_engine(tc2):
    return DenseProtocol(tc2, plan_fountain(tc2))


@pytest.fixture(scope="session")
def plus_engine(tc2):
    return DenseProtocol(tc2, plan_all(tc2))
