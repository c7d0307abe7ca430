import numpy as np
import pytest

from acslab.topology import load_topology


@pytest.fixture(scope="session")
def ernet():
    return load_topology("ERNET")


@pytest.fixture(scope="session")
def geant():
    return load_topology("GEANT")


@pytest.fixture(scope="session")
def chinanet():
    return load_topology("CHINANET")


def random_routing(rng, n_paths, n_links):
    """Random routing matrix without empty rows."""
    while True:
        r = (rng.random((n_paths, n_links)) < 0.35).astype(np.uint8)
        if r.any(axis=1).all():
            return r
