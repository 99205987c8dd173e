"""Shared fixtures: standard fields, the golden model, and an instance factory."""

import random

import pytest

from ramcrystals import (
    BaseField,
    LocalField,
    PRDatum,
    derive_seed,
    mu_ordinary_model,
    random_ordered_datum,
    random_pr_crystal,
)


@pytest.fixture(scope="session")
def base3():
    return BaseField(3, 1, 12)


@pytest.fixture(scope="session")
def base9():
    return BaseField(3, 2, 12)


@pytest.fixture(scope="session")
def field_unram(base3):
    """Q_p itself: f = e = 1."""
    return LocalField(base3, 1, 1)


@pytest.fixture(scope="session")
def golden_model():
    """Totally ramified e=3, h=2 model with graded dimensions (0,1,2).

    Newton slopes are exactly {1/3, 2/3} and all three polygons agree.
    """
    mu = PRDatum(2, [[0, 1, 2]], e=3)
    return mu_ordinary_model(mu, p=3)


@pytest.fixture(scope="session")
def make_instance():
    """Factory for reproducible random instances: (h, f, e, seed) -> (c, fil, mu)."""

    def build(h, f, e, seed, p=3):
        rng = random.Random(derive_seed(seed, h, f, e))
        mu = random_ordered_datum(h, f, e, rng)
        c, fil = random_pr_crystal(mu, derive_seed(seed, "crystal"), p=p)
        return c, fil, mu

    return build
