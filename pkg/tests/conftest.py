import numpy as np
import pytest

import sievenorm as sn


@pytest.fixture(scope="session")
def tables():
    """Small tables shared by most tests."""
    return sn.build_tables(4096)


@pytest.fixture(scope="session")
def tables_mid():
    return sn.build_tables(1 << 16)


@pytest.fixture(scope="session")
def tables_big():
    return sn.build_tables(1 << 20)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
