import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from src.errors import BlockMismatchError, UnsupportedSectorError
from src.models.chain_model import ChainParams
from src.models.encoding_model import BlochState, LogicalEncoding, Placement
from src.models.state_model import ExcitationState
from src.services.chain_service import MagnonChain
from src.services.dynamics_service import evolve
from src.services.encoding_service import block_sites, logical_state, place_logical_state
from src.services.fidelity_service import (
    average_fidelity_closed_form,
    fidelity,
    single_spin_average_fidelity_closed_form,
)
from src.services.transfer_service import TransferEngine
from tests.conftest import ALL_ENCODINGS, random_state

TIMES = np.array([0.0, 0.7, 3.1, 8.25, 15.0])


def _engine(n_sites: int, h_field: float = 1.0, times: np.ndarray = TIMES) -> TransferEngine:
    return TransferEngine(MagnonChain(ChainParams(n_sites=n_sites, h_field=h_field)), times)


@given(
    st.sampled_from(ALL_ENCODINGS),
    st.floats(min_value=0.0, max_value=math.pi),
    st.floats(min_value=0.0, max_value=6.28),
)
def test_engine_matches_the_general_fidelity(name, theta, phi):
    n = 9
    encoding = LogicalEncoding.from_name(name)
    bloch = BlochState(theta=theta, phi=phi)
    params = ChainParams(n_sites=n)
    initial = logical_state(encoding, bloch, Placement.START, n)
    target = logical_state(encoding, bloch, Placement.END, n)
    block = block_sites(encoding, Placement.END, n)
    values = _engine(n).fidelity_values(initial, target, block)
    expected = [fidelity(evolve(initial, params, t), target, block) for t in TIMES]
    assert_allclose(values, expected, atol=1e-10)


@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_engine_handles_arbitrary_mixed_states(seed):
    rng = np.random.default_rng(seed)
    n = 7
    initial = ExcitationState.vacuum(n).scaled(0.5)
    initial = initial.added(random_state(rng, n, 1), 0.5).added(random_state(rng, n, 2), math.sqrt(0.5))
    target = random_state(rng, 3, 2).scaled(0.6).added(random_state(rng, 3, 1), 0.8).shifted(2, n)
    block = [3, 4, 5]
    values = _engine(n).fidelity_squared(initial, target, block)
    expected = [reduce_expectation(evolve(initial, ChainParams(n_sites=n), t), target, block) for t in TIMES]
    assert_allclose(values, expected, atol=1e-10)


def reduce_expectation(state: ExcitationState, target: ExcitationState, block) -> float:
    return fidelity(state, target, block) ** 2


def test_interior_blocks(excited_qubit):
    n = 12
    encoding = LogicalEncoding.from_name("vacuum-singlet")
    initial = logical_state(encoding, excited_qubit, Placement.START, n)
    target = place_logical_state(encoding, excited_qubit, 5, n)
    trace = _engine(n).fidelity_trace(initial, target, [5, 6, 7])
    assert trace.site == 7
    expected = [fidelity(evolve(initial, ChainParams(n_sites=n), t), target, [5, 6, 7]) for t in TIMES]
    assert_allclose(trace.values, expected, atol=1e-10)


def test_field_rephasing_matches_a_fresh_chain(equal_superposition):
    n = 10
    encoding = LogicalEncoding.from_name("vacuum-singlet")
    initial = logical_state(encoding, equal_superposition, Placement.START, n)
    target = logical_state(encoding, equal_superposition, Placement.END, n)
    block = [8, 9, 10]
    rephased = _engine(n, h_field=1.0).fidelity_values(initial, target, block, field=0.35)
    fresh = _engine(n, h_field=0.35).fidelity_values(initial, target, block)
    assert_allclose(rephased, fresh, atol=1e-10)


@pytest.mark.parametrize("name", ["two-qubit", "three-qubit-1", "three-qubit-2", "four-qubit"])
def test_fixed_sector_codes_ignore_the_field(name, equal_superposition):
    n = 20
    times = np.linspace(0.0, 30.0, 301)
    encoding = LogicalEncoding.from_name(name)
    initial = logical_state(encoding, equal_superposition, Placement.START, n)
    target = logical_state(encoding, equal_superposition, Placement.END, n)
    block = block_sites(encoding, Placement.END, n)
    low = _engine(n, h_field=0.0, times=times).fidelity_values(initial, target, block)
    high = _engine(n, h_field=2.0, times=times).fidelity_values(initial, target, block)
    assert np.max(np.abs(low - high)) < 1e-10


def test_vacuum_singlet_average_fidelity_depends_on_the_field():
    n = 20
    times = np.linspace(0.0, 30.0, 601)
    engine = _engine(n, times=times)
    encoding = LogicalEncoding.from_name("vacuum-singlet")
    surface = np.stack([engine.average_fidelity_values(encoding, field=h) for h in np.arange(0.0, 2.01, 0.25)])
    assert np.max(surface.max(axis=0) - surface.min(axis=0)) > 1e-3


@pytest.mark.parametrize(
    "name, closed_form",
    [("vacuum-singlet", average_fidelity_closed_form), ("single-spin", single_spin_average_fidelity_closed_form)],
)
def test_six_state_average_equals_the_closed_forms(name, closed_form):
    n = 11
    engine = _engine(n, h_field=0.6)
    values = engine.average_fidelity_trace(LogicalEncoding.from_name(name)).values
    expected = [closed_form(engine.chain.propagator(t)) for t in TIMES]
    assert_allclose(values, expected, atol=1e-10)


def test_rows_are_cached():
    engine = _engine(6)
    assert engine.rows(2) is engine.rows(2)


def test_target_outside_the_block_is_rejected(excited_qubit):
    encoding = LogicalEncoding.from_name("vacuum-singlet")
    initial = logical_state(encoding, excited_qubit, Placement.START, 8)
    with pytest.raises(BlockMismatchError):
        _engine(8).fidelity_values(initial, initial, [6, 7, 8])


def test_three_magnon_states_are_unsupported():
    state = ExcitationState.from_mapping(6, {(1, 2, 3): 1.0})
    with pytest.raises(UnsupportedSectorError):
        _engine(6).fidelity_values(state, ExcitationState.vacuum(6), [4, 5, 6])
