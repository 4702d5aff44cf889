import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.testing import assert_allclose

from src.errors import DimensionCapError, SectorOverflowError
from src.models.chain_model import ChainParams
from src.models.oracle_model import DenseHamiltonian
from src.models.state_model import ExcitationState, configuration_index, index_configuration
from src.services.chain_service import MagnonChain
from src.services.dynamics_service import evolve
from src.services.fidelity_service import reduce_to_block
from src.services.oracle_service import (
    build_hamiltonian,
    embed,
    evolve_exact,
    extract,
    partial_trace_dense,
)
from src.services.verification_service import OracleVerifier
from tests.conftest import random_state


def test_single_spin_hamiltonian_sign():
    ham = build_hamiltonian(ChainParams(n_sites=1, h_field=0.8))
    assert_allclose(ham.matrix, np.diag([-0.8, 0.8]))


def test_vacuum_energy_includes_the_zz_coupling():
    ham = build_hamiltonian(ChainParams(n_sites=5, j_z=0.3, h_field=0.7))
    assert ham.matrix[0, 0] == pytest.approx(-0.7 * 5 + 0.3 * 4)


@pytest.mark.parametrize("j_z", [0.0, 0.45])
def test_hamiltonian_is_symmetric_and_conserves_excitations(j_z):
    ham = build_hamiltonian(ChainParams(n_sites=6, j_z=j_z))
    assert_allclose(ham.matrix, ham.matrix.T)
    assert ham.sector_leakage() == 0.0


def test_one_magnon_spectrum_matches_the_dispersion():
    params = ChainParams(n_sites=7, j_xy=0.9, h_field=0.4)
    ham = build_hamiltonian(params)
    _, energies, _ = ham.sector_spectrum(1)
    _, vacuum, _ = ham.sector_spectrum(0)
    assert_allclose(energies - vacuum[0], np.sort(MagnonChain(params).energies), atol=1e-12)


def test_cut_bond_splits_the_register():
    ham = build_hamiltonian(ChainParams(n_sites=6), cut_bonds=[3])
    state = embed(ExcitationState.from_mapping(6, {(1,): 1.0}))
    evolved = evolve_exact(ham, state, 7.0)
    far_side = [configuration_index((site,), 6) for site in (4, 5, 6)]
    assert np.max(np.abs(evolved[far_side])) < 1e-12


def test_dimension_cap():
    with pytest.raises(DimensionCapError):
        build_hamiltonian(ChainParams(n_sites=5), max_sites=4)


def test_dimension_cap_from_environment(monkeypatch):
    monkeypatch.setenv("MAGNON_ORACLE_MAX_SITES", "3")
    with pytest.raises(DimensionCapError):
        embed(ExcitationState.vacuum(4))


def test_configuration_index_round_trip():
    for index in range(2**5):
        assert configuration_index(index_configuration(index, 5), 5) == index
    assert configuration_index((1,), 5) == 0b10000


@given(st.integers(min_value=0, max_value=2**32 - 1), st.sampled_from([0, 1, 2]))
def test_embed_then_extract_is_lossless(seed, excitations):
    state = random_state(np.random.default_rng(seed), 6, excitations)
    assert extract(embed(state), 6).max_deviation(state) == 0.0


def test_extract_refuses_three_magnon_weight():
    vector = embed(ExcitationState.from_mapping(5, {(1, 2, 3): 1.0}))
    with pytest.raises(SectorOverflowError):
        extract(vector, 5)


@given(st.integers(min_value=0, max_value=2**32 - 1), st.sampled_from([0, 1, 2]))
def test_sparse_partial_trace_matches_the_dense_one(seed, excitations):
    state = random_state(np.random.default_rng(seed), 6, excitations)
    sparse = reduce_to_block(state, [2, 4, 5]).matrix
    dense = partial_trace_dense(embed(state), [2, 4, 5], 6).matrix
    assert_allclose(sparse, dense, atol=1e-12)


@given(
    st.integers(min_value=0, max_value=2**32 - 1),
    st.sampled_from([0, 1, 2]),
    st.floats(min_value=0.0, max_value=20.0),
)
def test_analytic_evolution_matches_exact_evolution(seed, excitations, t):
    params = ChainParams(n_sites=6, h_field=0.6)
    state = random_state(np.random.default_rng(seed), 6, excitations)
    exact = evolve_exact(build_hamiltonian(params), embed(state), t)
    assert_allclose(embed(evolve(state, params, t)), exact, atol=1e-9)


@pytest.mark.slow
@pytest.mark.parametrize("n_sites", range(2, 11))
def test_verifier_passes_on_small_chains(n_sites):
    report = OracleVerifier(n_sites, trials=50, seed=n_sites).run()
    assert report.passed, report.model_dump()
    assert report.max_deviation < 1e-9
    assert {check.name for check in report.checks} >= {"spectrum", "propagator", "evolution-M1", "round-trip"}


def test_verifier_is_reproducible():
    first = OracleVerifier(4, trials=5, seed=3).run()
    second = OracleVerifier(4, trials=5, seed=3).run()
    assert first.model_dump() == second.model_dump()


def test_dense_hamiltonian_from_nested_lists():
    hamiltonian = DenseHamiltonian(n_sites=1, matrix=[[-1.0, 0.0], [0.0, 1.0]])
    assert hamiltonian.dimension == 2
    assert not hamiltonian.matrix.flags.writeable
