import itertools
import math

import numpy as np
import pytest

from recdev import walk_model
from recdev.walk_model import Kind, Side, StepLaw

BUILTIN_NAMES = [
    "ssrw_right",
    "ssrw_left",
    "skewed_right",
    "skewed_left",
    "stable:0.6:0.5:right",
    "stable:0.6:0.5:left",
]


@pytest.fixture(scope="session")
def builtin_laws():
    return [walk_model.builtin_law(n) for n in BUILTIN_NAMES]


@pytest.fixture(scope="session")
def ssrw_right():
    return walk_model.builtin_law("ssrw_right")


@pytest.fixture(scope="session")
def ssrw_left():
    return walk_model.builtin_law("ssrw_left")


@pytest.fixture(scope="session")
def skewed_right():
    return walk_model.builtin_law("skewed_right")


@pytest.fixture(scope="session")
def stable_right():
    return walk_model.builtin_law("stable:0.6:0.5:right")


def step_support(law: StepLaw):
    """(step, probability) pairs with positive probability; finite laws only."""
    assert law.kind is Kind.FINITE
    sign = 1 if law.side is Side.RIGHT else -1
    pairs = [(sign, law.q)]
    for m, prob in enumerate(law.p):
        if prob > 0.0:
            pairs.append((-sign * m, prob))
    return pairs


def record_count(steps) -> int:
    s, peak, count = 0, 0, 0
    for step in steps:
        s += step
        if s >= peak:
            count += 1
            peak = s
    return count


def brute_force_record_pmf(law: StepLaw, n: int) -> np.ndarray:
    """Exact record-count pmf by exhaustive enumeration of step sequences."""
    pairs = step_support(law)
    pmf = np.zeros(n + 1)
    for combo in itertools.product(pairs, repeat=n):
        prob = math.prod(p for _, p in combo)
        pmf[record_count([v for v, _ in combo])] += prob
    return pmf
