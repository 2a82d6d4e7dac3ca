from __future__ import annotations

import numpy as np
import pytest

from tvreg import cache
from tvreg.core import ScalarField, interval, lshape, rectangle
from tvreg.runtime import metrics


@pytest.fixture(autouse=True)
def _isolated_runtime(monkeypatch):
    monkeypatch.delenv("TVREG_THREADS", raising=False)
    monkeypatch.delenv("TVREG_ORACLE_CACHE_MAX", raising=False)
    metrics.reset()
    cache.clear_all()
    yield
    cache.clear_all()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def line():
    return interval(64)


@pytest.fixture
def square():
    return rectangle(16, 16)


@pytest.fixture
def ell():
    return lshape(16)


@pytest.fixture
def step_1d(line):
    return ScalarField.from_function(line, lambda x: np.where(x >= 0.5, 1.0, 0.0))


@pytest.fixture
def trig_1d(line):
    return ScalarField.from_function(line, lambda x: np.cos(np.pi * x))
