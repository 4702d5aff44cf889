import logging
import os
from typing import Iterable, Optional, Sequence

import numpy as np

from src.errors import DimensionCapError, SectorOverflowError
from src.models.chain_model import ChainParams
from src.models.fidelity_model import ReducedBlockState
from src.models.oracle_model import DenseHamiltonian
from src.models.state_model import ExcitationState, index_configuration

logger = logging.getLogger(__name__)

DEFAULT_MAX_SITES = 14
OVERFLOW_TOLERANCE = 1e-10


def max_oracle_sites(max_sites: Optional[int] = None) -> int:
    if max_sites is not None:
        return max_sites
    return int(os.environ.get("MAGNON_ORACLE_MAX_SITES", DEFAULT_MAX_SITES))


def _check_cap(n_sites: int, max_sites: Optional[int]) -> None:
    cap = max_oracle_sites(max_sites)
    if n_sites > cap:
        raise DimensionCapError(f"exact oracle is capped at {cap} sites, got {n_sites}")


def _bits(indices: np.ndarray, site: int, n_sites: int) -> np.ndarray:
    return (indices >> (n_sites - site)) & 1


def build_hamiltonian(
    params: ChainParams, max_sites: Optional[int] = None, cut_bonds: Iterable[int] = ()
) -> DenseHamiltonian:
    """
    Dense H = -J/2 sum(sx sx + sy sy) + Jz sum(sz sz) - h sum(sz) on an open chain.

    Bit 1 marks an excitation (sz = -1). A bond is named by its left site;
    bonds in `cut_bonds` are dropped, which splits the register into
    independent chains.
    """
    n = params.n_sites
    _check_cap(n, max_sites)
    cut = set(cut_bonds)
    dimension = 2**n
    indices = np.arange(dimension)
    spins = [1 - 2 * _bits(indices, site, n) for site in range(1, n + 1)]

    diagonal = -params.h_field * np.sum(spins, axis=0).astype(float)
    matrix = np.zeros((dimension, dimension))
    for left in range(1, n):
        if left in cut:
            continue
        diagonal += params.j_z * spins[left - 1] * spins[left]
        mask = (1 << (n - left)) | (1 << (n - left - 1))
        flippable = indices[spins[left - 1] != spins[left]]
        matrix[flippable, flippable ^ mask] = -params.j_xy
    matrix[indices, indices] = diagonal
    logger.debug(f"Built dense Hamiltonian for {n} sites (cut bonds {sorted(cut)})")
    return DenseHamiltonian(n_sites=n, matrix=matrix)


def evolve_exact(hamiltonian: DenseHamiltonian, vector: np.ndarray, t: float) -> np.ndarray:
    """exp(-iHt) |vector>, sector by sector through the cached eigendecompositions."""
    vector = np.asarray(vector, dtype=complex)
    if vector.shape != (hamiltonian.dimension,):
        raise ValueError(f"vector of shape {vector.shape} does not match dimension {hamiltonian.dimension}")
    evolved = np.zeros_like(vector)
    for excitations in range(hamiltonian.n_sites + 1):
        indices = hamiltonian.sector_indices(excitations)
        part = vector[indices]
        if not np.any(part):
            continue
        _, energies, modes = hamiltonian.sector_spectrum(excitations)
        evolved[indices] = modes @ (np.exp(-1j * energies * t) * (modes.T @ part))
    return evolved


def partial_trace_dense(vector: np.ndarray, keep_sites: Sequence[int], n_sites: int) -> ReducedBlockState:
    """Reduced state of `keep_sites` by reshaping the full vector into one axis per site."""
    keep = [int(site) for site in keep_sites]
    traced = [site for site in range(1, n_sites + 1) if site not in keep]
    tensor = np.asarray(vector, dtype=complex).reshape((2,) * n_sites)
    order = [site - 1 for site in keep + traced]
    matrix = tensor.transpose(order).reshape(2 ** len(keep), 2 ** len(traced))
    return ReducedBlockState(block_sites=keep, matrix=matrix @ matrix.conj().T)


def embed(state: ExcitationState, max_sites: Optional[int] = None) -> np.ndarray:
    _check_cap(state.n_sites, max_sites)
    return state.to_dense()


def extract(vector: np.ndarray, n_sites: int, max_excitations: int = 2) -> ExcitationState:
    """Sparse state from a dense vector; weight beyond `max_excitations` magnons is an error."""
    vector = np.asarray(vector, dtype=complex)
    amplitudes = {}
    overflow = 0.0
    for index in np.flatnonzero(vector):
        config = index_configuration(int(index), n_sites)
        if len(config) > max_excitations:
            overflow = max(overflow, abs(vector[index]))
        else:
            amplitudes[config] = complex(vector[index])
    if overflow > OVERFLOW_TOLERANCE:
        raise SectorOverflowError(
            f"amplitude {overflow:.3e} found beyond {max_excitations} excitations"
        )
    return ExcitationState.trusted(n_sites, amplitudes)
