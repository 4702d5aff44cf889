import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose
from pydantic import ValidationError

from src.errors import NumericalInvariantError
from src.models.chain_model import ChainParams, PropagatorMatrix
from src.services.chain_service import MagnonChain, magnon_modes, propagator


def test_energies_follow_the_dispersion(chain_params):
    chain = MagnonChain(chain_params)
    q = np.pi * np.arange(1, 11) / 11
    assert_allclose(chain.momenta, q)
    assert_allclose(chain.energies, 2.0 - 2.0 * np.cos(q))
    assert chain.vacuum_energy == -10.0


def test_magnon_modes_are_listed_by_index(chain_params):
    modes = magnon_modes(chain_params)
    assert [mode.index for mode in modes] == list(range(1, 11))
    assert all(a.energy < b.energy for a, b in zip(modes, modes[1:]))


def test_mode_matrix_is_orthogonal(chain_params):
    u = MagnonChain(chain_params).modes
    assert_allclose(u @ u.T, np.eye(10), atol=1e-12)


def test_propagator_is_identity_at_zero(chain_params):
    assert_allclose(propagator(chain_params, 0.0).entries, np.eye(10), atol=1e-12)


def test_single_site_picks_up_the_field_phase():
    params = ChainParams(n_sites=1, h_field=0.7)
    assert_allclose(propagator(params, 3.0).entry(1, 1), np.exp(-2j * 0.7 * 3.0))


@given(st.floats(min_value=0.0, max_value=10.0))
def test_two_sites_oscillate_between_ends(t):
    prop = propagator(ChainParams(n_sites=2, h_field=0.0), t)
    assert abs(prop.entry(1, 2)) == pytest.approx(abs(math.sin(t)), abs=1e-12)


def test_two_sites_transfer_perfectly_at_half_period():
    prop = propagator(ChainParams(n_sites=2), math.pi / 2)
    assert abs(prop.entry(1, 2)) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("n_sites", [10, 48, 80, 200])
@pytest.mark.parametrize("t", [0.0, 25.0, 50.0, 100.0])
def test_propagator_is_unitary_and_symmetric(n_sites, t):
    propagator(ChainParams(n_sites=n_sites), t).check_invariants(atol=1e-10)


@given(st.floats(min_value=0.0, max_value=30.0), st.floats(min_value=0.0, max_value=30.0))
def test_propagators_compose_in_time(t1, t2):
    params = ChainParams(n_sites=7, h_field=0.3)
    composed = propagator(params, t1).compose(propagator(params, t2))
    assert_allclose(composed.entries, propagator(params, t1 + t2).entries, atol=1e-10)


def test_rows_over_a_grid_match_single_propagators(chain_params):
    chain = MagnonChain(chain_params)
    times = np.array([0.0, 1.5, 12.25])
    rows = chain.propagator_rows(3, times)
    for k, t in enumerate(times):
        assert_allclose(rows[k], chain.propagator(t).entries[2], atol=1e-12)


def test_rows_reject_sites_off_the_chain(chain_params):
    with pytest.raises(ValueError):
        MagnonChain(chain_params).propagator_rows(11, np.array([0.0]))


def test_check_invariants_flags_a_leaky_matrix():
    with pytest.raises(NumericalInvariantError):
        PropagatorMatrix(time=0.0, entries=0.9 * np.eye(3)).check_invariants()


def test_check_invariants_flags_a_broken_mirror():
    entries = np.diag([1.0, 1.0, 1j])
    with pytest.raises(NumericalInvariantError, match="mirror"):
        PropagatorMatrix(time=0.0, entries=entries).check_invariants()


def test_propagator_entries_are_read_only(chain_params):
    prop = propagator(chain_params, 1.0)
    with pytest.raises(ValueError):
        prop.entries[0, 0] = 0.0


@pytest.mark.parametrize("fields", [{"n_sites": 0}, {"n_sites": 4, "j_xy": 0.0}])
def test_invalid_chain_parameters(fields):
    with pytest.raises(ValidationError):
        ChainParams(**fields)


def test_with_field_keeps_everything_else(chain_params):
    changed = chain_params.with_field(0.0)
    assert changed.h_field == 0.0
    assert changed.n_sites == chain_params.n_sites and changed.j_xy == chain_params.j_xy


def test_propagator_matrix_from_nested_lists():
    prop = PropagatorMatrix(time=0.0, entries=[[1.0]])
    assert prop.entries.dtype == complex
    assert prop.entry(1, 1) == 1.0
    prop.check_invariants()


def test_propagator_matrix_must_be_square():
    with pytest.raises(ValidationError, match="square"):
        PropagatorMatrix(time=0.0, entries=[1.0, 0.0])
