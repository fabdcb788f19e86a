import random
from pathlib import Path

import pytest

from metlogic import groups

DATA = Path(__file__).resolve().parent.parent / "examples_data"


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def corpus():
    """Every group of order at most 8, discrete metric."""
    return groups.small_groups(8)


def random_metric_group(rng: random.Random, corpus):
    """A corpus group, half the time with a random bi-invariant metric."""
    g = rng.choice(corpus)
    if rng.random() < 0.5:
        g = groups.random_biinvariant(g, rng)
    return g
