import functools

import numpy as np
import pytest

from cellnet.network import builtin_network, complete_monoid
from cellnet.pipeline import analyze


@functools.lru_cache(maxsize=None)
def cached_analysis(name: str, seed: int, order: int = 3, branches: bool = True):
    return analyze(name, seed, order=order, branches=branches)


@pytest.fixture(scope="session")
def monoids():
    return {k: complete_monoid(builtin_network(k).spec) for k in "ABC"}


@pytest.fixture(scope="session")
def specs():
    return {k: builtin_network(k).spec for k in "ABC"}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
