"""
Shared fixtures for the Hardy inequality laboratory tests
"""

import pytest

import catalog
from grammar import parse_profile
from models import Family, HomogeneousSetting, InequalityParams

# compactly supported away from 0, all nonnegative except the last two
CORPUS_TEXTS = [
    "(bump 1 2)",
    "(bump 1/4 1/2)",
    "(bump 1/2 3)",
    "(bump 1/2 2)",
    "(window 1 4)",
    "(mul (pow r -1) (bump 1/2 3))",
    "(add (bump 1 2) (mul 1/2 (bump 3/2 5)))",
    "(mul (pow r 2) (bump 2 5))",
    "(sub (bump 1/2 2) (mul 1/2 (bump 1 3)))",
    "(mul (add 1 (log r)) (bump 1/3 3))",
]


@pytest.fixture(scope="session")
def corpus():
    return [parse_profile(text) for text in CORPUS_TEXTS]


@pytest.fixture(scope="session")
def bump12():
    return parse_profile("(bump 1 2)")


@pytest.fixture(scope="session")
def g3():
    return HomogeneousSetting(Q=3)


@pytest.fixture(scope="session")
def g4():
    return HomogeneousSetting(Q=4)


def make(family, Q, sigma=1.0, **params):
    """Admissible instance from keyword parameters."""
    return catalog.make_instance(Family(family), InequalityParams(**params), HomogeneousSetting(Q=Q, sigma=sigma))


# one admissible instance per family
FAMILY_EXAMPLES = {
    Family.EXTENDED_CKN: dict(Q=3, p=2, q=2, r=2, delta=0.5, a=1, b=0),
    Family.EXTENDED_CKN_CRITICAL: dict(Q=4, p=2, q=2, r=2, delta=1, a=-1, b=-2),
    Family.EULER_HARDY: dict(Q=3, p=2, alpha=0),
    Family.EULER_HARDY_CRITICAL: dict(Q=4, p=2, alpha=2),
    Family.ANISOTROPIC_CKN: dict(Q=4, p=2, a=0, b=0),
    Family.REMAINDER_HARDY: dict(Q=4, p=2, alpha=0, b=0),
    Family.STABILITY_HARDY: dict(Q=4, p=2, alpha=0, R_grid=(0.5, 1.5, 3.0)),
    Family.CRITICAL_LOG_HARDY: dict(Q=3, gamma=2, p=2, R=1),
    Family.UNCERTAINTY_A: dict(Q=3, gamma=2, p=4, q=4, R=1),
    Family.UNCERTAINTY_B: dict(Q=3, gamma=2, p=3, q=1.5, R=1),
    Family.SUPERWEIGHT: dict(Q=5, p=2, m=1, a=1, b=1, alpha=2, beta=1),
    Family.SUPERWEIGHT_HIGHER_ORDER: dict(Q=9, p=2, m=1, k=2, a=1, b=1, alpha=2, beta=1),
}


@pytest.fixture(scope="session")
def family_instances():
    return {family: make(family, **params) for family, params in FAMILY_EXAMPLES.items()}
