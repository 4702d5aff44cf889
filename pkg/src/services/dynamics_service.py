import logging
from typing import Dict

import numpy as np

from src.errors import MixedSectorError, UnsupportedSectorError
from src.models.chain_model import ChainParams, PropagatorMatrix
from src.models.state_model import Configuration, ExcitationState
from src.services.chain_service import MagnonChain

logger = logging.getLogger(__name__)


def _check_size(state: ExcitationState, prop: PropagatorMatrix) -> None:
    if state.n_sites != prop.n_sites:
        raise ValueError(f"state has {state.n_sites} sites, propagator {prop.n_sites}")


def evolve_one_magnon(state: ExcitationState, prop: PropagatorMatrix) -> ExcitationState:
    """
    c†_j(t) = sum_l f_{j,l}(t) c†_l applied to a state with at most one magnon.

    Phases are relative to the vacuum, so a vacuum amplitude passes through untouched.
    """
    _check_size(state, prop)
    if any(len(config) > 1 for config in state.amplitudes):
        raise MixedSectorError("evolve_one_magnon accepts only configurations with M <= 1")

    n = state.n_sites
    amplitudes: Dict[Configuration, complex] = {}
    if () in state.amplitudes:
        amplitudes[()] = state.amplitudes[()]

    initial = np.zeros(n, dtype=complex)
    for config, amplitude in state.amplitudes.items():
        if config:
            initial[config[0] - 1] = amplitude
    if np.any(initial):
        final = prop.entries.T @ initial
        for l in np.flatnonzero(final):
            amplitudes[(int(l) + 1,)] = complex(final[l])
    return ExcitationState.trusted(n, amplitudes)


def evolve_two_magnon(state: ExcitationState, prop: PropagatorMatrix) -> ExcitationState:
    """
    Two-magnon evolution by the 2x2 determinant rule:
    A(l1, l2) = sum_{j1<j2} c(j1, j2) (f_{j1,l1} f_{j2,l2} - f_{j1,l2} f_{j2,l1}).
    """
    _check_size(state, prop)
    if any(len(config) != 2 for config in state.amplitudes):
        raise MixedSectorError("evolve_two_magnon accepts only configurations with M = 2")

    n = state.n_sites
    # antisymmetric coefficient matrix: sum over j1<j2 becomes a full double sum
    coefficients = np.zeros((n, n), dtype=complex)
    for (j1, j2), amplitude in state.amplitudes.items():
        coefficients[j1 - 1, j2 - 1] += amplitude
        coefficients[j2 - 1, j1 - 1] -= amplitude

    f = prop.entries
    final = f.T @ coefficients @ f
    upper_l1, upper_l2 = np.triu_indices(n, k=1)
    amplitudes = {
        (int(l1) + 1, int(l2) + 1): complex(final[l1, l2])
        for l1, l2 in zip(upper_l1, upper_l2)
        if final[l1, l2] != 0
    }
    return ExcitationState.trusted(n, amplitudes)


def evolve(state: ExcitationState, params: ChainParams, t: float) -> ExcitationState:
    """
    Evolve a state mixing the 0-, 1- and 2-magnon sectors for time t.

    Every sector shares one propagator; the vacuum energy -hN enters as a
    global phase on top of the relative magnon phases.
    """
    if state.n_sites != params.n_sites:
        raise ValueError(f"state has {state.n_sites} sites, chain {params.n_sites}")
    sectors = state.excitation_numbers()
    if any(m > 2 for m in sectors):
        raise UnsupportedSectorError(f"only sectors M <= 2 are supported, got {sorted(sectors)}")

    chain = MagnonChain(params)
    prop = chain.propagator(t)
    evolved = ExcitationState.trusted(params.n_sites, {})
    if sectors & {0, 1}:
        lower = ExcitationState.trusted(
            params.n_sites, {c: a for c, a in state.amplitudes.items() if len(c) <= 1}
        )
        evolved = evolved.added(evolve_one_magnon(lower, prop))
    if 2 in sectors:
        evolved = evolved.added(evolve_two_magnon(state.sector(2), prop))
    return evolved.scaled(np.exp(-1j * chain.vacuum_energy * t))
