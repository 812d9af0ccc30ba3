from pathlib import Path

import numpy as np
import pytest

from mbvqe.graphstate import ansatz_state, decorate_all, decoration_pattern
from mbvqe.mbqc import compile_layers, standardize
from mbvqe.models import ToricLattice, logical_state
from mbvqe.settings import Settings


@pytest.fixture()
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def gadget_state():
    return standardize(decoration_pattern())


@pytest.fixture(scope="session")
def compiled_states():
    return {k: standardize(compile_layers(4, k)) for k in (1, 2, 3)}


@pytest.fixture(scope="session")
def toric_lattice():
    return ToricLattice(2, 2)


@pytest.fixture(scope="session")
def toric_ansatz(toric_lattice):
    return ansatz_state(logical_state(toric_lattice, 0, 0))


@pytest.fixture(scope="session")
def decorated_toric(toric_ansatz):
    return decorate_all(toric_ansatz)


@pytest.fixture()
def mbvqe_test_config():
    return Path(__file__).parent / "testdata" / "test_config.yaml"


@pytest.fixture()
def mbvqe_settings(mbvqe_test_config):
    return Settings(mbvqe_test_config)
