import numpy as np
import pytest

from iwasawa_k1 import corpus
from iwasawa_k1.algebra import AlgebraContext
from iwasawa_k1.group import FiniteQuotient, semidirect_cyclic
from iwasawa_k1.logmap import LogContext


def desk_group():
    """p = 3, H = Z/9, gamma: h -> 4h, e = 1."""
    return semidirect_cyclic(3, 9, 4, 1, label="desk")


@pytest.fixture(scope="session")
def desk():
    return AlgebraContext(FiniteQuotient(desk_group(), 1))


@pytest.fixture(scope="session")
def desk_lc(desk):
    return LogContext(desk, 5)


@pytest.fixture(scope="session")
def desk_ring(desk_lc):
    return desk_lc.ring()


@pytest.fixture(scope="session")
def corpus_contexts():
    return {name: AlgebraContext(FiniteQuotient(corpus.load(name), 1)) for name in corpus.NAMES}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
