import numpy as np
import pytest

from gausslab import fock
from gausslab.channels import (
    amplifier_channel,
    attenuator_channel,
    classical_noise_channel,
)


@pytest.fixture(scope="session")
def space40():
    return fock.FockSpace(1, 40)


@pytest.fixture(scope="session")
def att06():
    return attenuator_channel(0.6)


@pytest.fixture(scope="session")
def amp15():
    return amplifier_channel(1.5)


@pytest.fixture(scope="session")
def noise05():
    return classical_noise_channel(0.5)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(1234)
