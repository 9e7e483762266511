import numpy as np
import pytest

from photonpair.cavity import reference_config
from photonpair.correlation import PairCorrelationModel, model_from_cavity


@pytest.fixture(scope="session")
def pdc_config():
    return reference_config("pdc")


@pytest.fixture(scope="session")
def small_model(pdc_config):
    """Default-geometry model with a light mode sum, for fast tests."""
    return model_from_cavity(pdc_config, mode_cutoff=300)


@pytest.fixture(scope="session")
def tiny_model():
    return PairCorrelationModel(gamma_s=667e3, gamma_i=667e3,
                                fsr_s=120.8e6, fsr_i=120.8e6,
                                tau0=7.5e-12, mode_cutoff=25)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
