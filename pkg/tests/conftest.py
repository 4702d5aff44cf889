import itertools
import math

import numpy as np
import pytest
from hypothesis import settings

from src.models.chain_model import ChainParams
from src.models.encoding_model import BlochState, EncodingName
from src.models.state_model import ExcitationState

settings.register_profile("magnon", max_examples=25, deadline=None)
settings.load_profile("magnon")

ALL_ENCODINGS = list(EncodingName)


def random_state(rng: np.random.Generator, n_sites: int, excitations: int) -> ExcitationState:
    """Normalized random state with every amplitude in one excitation sector."""
    configs = list(itertools.combinations(range(1, n_sites + 1), excitations))
    values = rng.normal(size=len(configs)) + 1j * rng.normal(size=len(configs))
    values /= np.linalg.norm(values)
    return ExcitationState.trusted(n_sites, dict(zip(configs, values)))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def chain_params() -> ChainParams:
    return ChainParams(n_sites=10, j_xy=1.0, h_field=1.0)


@pytest.fixture
def excited_qubit() -> BlochState:
    return BlochState(theta=math.pi)


@pytest.fixture
def equal_superposition() -> BlochState:
    return BlochState(theta=math.pi / 2)
