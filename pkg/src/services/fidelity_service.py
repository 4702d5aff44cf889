import logging
import math
from typing import Dict, List, Sequence, Tuple

import numpy as np
import scipy.signal

from src.errors import BlockMismatchError, ChainTooShortError, GridError
from src.models.chain_model import PropagatorMatrix
from src.models.fidelity_model import FidelityPeak, FidelityTrace, ReducedBlockState
from src.models.state_model import Configuration, ExcitationState

logger = logging.getLogger(__name__)

# rounding slack tolerated before a fidelity is clipped into [0, 1]
CLIP_TOLERANCE = 1e-10


def check_block(block_sites: Sequence[int], n_sites: int) -> Tuple[int, ...]:
    block = tuple(int(site) for site in block_sites)
    if not block:
        raise BlockMismatchError("receiving block is empty")
    if any(b <= a for a, b in zip(block, block[1:])) or block[0] < 1 or block[-1] > n_sites:
        raise BlockMismatchError(f"block {list(block)} is not an ascending subset of 1..{n_sites}")
    return block


def block_vector(target: ExcitationState, block: Sequence[int]) -> np.ndarray:
    """Dense 2^b vector of a state supported on `block` (first block site = most significant bit)."""
    outside = target.occupied_sites() - set(block)
    if outside:
        raise BlockMismatchError(f"target occupies sites {sorted(outside)} outside block {list(block)}")
    position = {site: k for k, site in enumerate(block)}
    size = len(block)
    vector = np.zeros(2**size, dtype=complex)
    for config, amplitude in target.amplitudes.items():
        vector[sum(1 << (size - 1 - position[s]) for s in config)] += amplitude
    return vector


def clip_unit(value: float, label: str = "fidelity") -> float:
    if value < -CLIP_TOLERANCE or value > 1.0 + CLIP_TOLERANCE:
        logger.warning(f"{label} {value!r} outside [0, 1] beyond rounding; clipping")
    return min(max(value, 0.0), 1.0)


def reduce_to_block(state: ExcitationState, block_sites: Sequence[int]) -> ReducedBlockState:
    """
    Partial trace over everything outside the block, done sparsely.

    Amplitudes are grouped by their occupation outside the block; each group is
    a block vector and contributes its outer product.
    """
    block = check_block(block_sites, state.n_sites)
    position = {site: k for k, site in enumerate(block)}
    size = len(block)
    groups: Dict[Configuration, np.ndarray] = {}
    for config, amplitude in state.amplitudes.items():
        outside = tuple(s for s in config if s not in position)
        index = sum(1 << (size - 1 - position[s]) for s in config if s in position)
        if outside not in groups:
            groups[outside] = np.zeros(2**size, dtype=complex)
        groups[outside][index] += amplitude

    rho = np.zeros((2**size, 2**size), dtype=complex)
    for vector in groups.values():
        rho += np.outer(vector, vector.conj())
    return ReducedBlockState(block_sites=list(block), matrix=rho)


def fidelity(state: ExcitationState, target: ExcitationState, block_sites: Sequence[int]) -> float:
    """F = sqrt(<phi|rho|phi>) with rho the reduced state of `block_sites`."""
    block = check_block(block_sites, state.n_sites)
    phi = block_vector(target, block)
    rho = reduce_to_block(state, block)
    rho.check_invariants()
    return math.sqrt(clip_unit(rho.expectation(phi), "fidelity squared"))


def two_spin_fidelity_closed_form(prop: PropagatorMatrix, alpha: complex, beta: complex) -> float:
    """|alpha* A_N + beta* A_{N-1}| with A_l = beta f_{1,l} + alpha f_{2,l}."""
    n = prop.n_sites
    if n < 2:
        raise ChainTooShortError("the two-spin encoding needs at least 2 sites")
    f = prop.entries
    a_last = beta * f[0, n - 1] + alpha * f[1, n - 1]
    a_next = beta * f[0, n - 2] + alpha * f[1, n - 2]
    return float(abs(np.conj(alpha) * a_last + np.conj(beta) * a_next))


def singlet_amplitudes(prop: PropagatorMatrix) -> np.ndarray:
    """G_i = (f_{3,i} - f_{1,i}) / sqrt(2), i = 1..N."""
    return (prop.entries[2, :] - prop.entries[0, :]) / math.sqrt(2.0)


def average_fidelity_from_amplitudes(g_last: np.ndarray, g_mid: np.ndarray, g_first: np.ndarray) -> np.ndarray:
    """
    Bloch-sphere average of <phi|rho|phi> for the vacuum-singlet qubit, given
    G at the three receiving sites (N, N-1, N-2). Works elementwise on arrays.
    """
    d = (g_last - g_first) / math.sqrt(2.0)
    spread = 1.0 - np.abs(g_last) ** 2 - np.abs(g_mid) ** 2 - np.abs(g_first) ** 2
    return 1.0 / 3.0 + np.real(d) / 3.0 + np.abs(d) ** 2 / 3.0 + spread / 6.0


def average_fidelity_closed_form(prop: PropagatorMatrix) -> float:
    n = prop.n_sites
    if n < 5:
        raise ChainTooShortError(f"the average-fidelity expression needs N >= 5, got {n}")
    g = singlet_amplitudes(prop)
    return float(average_fidelity_from_amplitudes(g[n - 1], g[n - 2], g[n - 3]))


def single_spin_average_fidelity_closed_form(prop: PropagatorMatrix) -> float:
    """1/2 + Re f_{1,N} / 3 + |f_{1,N}|^2 / 6"""
    f = prop.entries[0, prop.n_sites - 1]
    return float(0.5 + np.real(f) / 3.0 + abs(f) ** 2 / 6.0)


def grid_step(times: np.ndarray) -> float:
    if times.size < 2:
        return 0.0
    steps = np.diff(times)
    if np.any(steps <= 0) or np.max(np.abs(steps - steps[0])) > 1e-9 * max(1.0, abs(steps[0])):
        raise GridError("time grid must be uniform and ascending")
    return float(steps[0])


def refine_maximum(times: np.ndarray, values: np.ndarray, index: int) -> Tuple[float, float]:
    """Quadratic interpolation through the three samples around `index`; edges are returned as is."""
    if index <= 0 or index >= len(values) - 1:
        return float(times[index]), float(values[index])
    below, centre, above = values[index - 1], values[index], values[index + 1]
    curvature = below - 2.0 * centre + above
    if curvature >= 0.0:
        return float(times[index]), float(centre)
    delta = 0.5 * (below - above) / curvature
    step = times[index + 1] - times[index]
    value = centre - 0.25 * (below - above) * delta
    return float(times[index] + delta * step), float(min(value, 1.0))


def find_peaks(trace: FidelityTrace, prominence: float = 0.02) -> List[FidelityPeak]:
    """Local maxima with at least `prominence`, each refined by quadratic interpolation."""
    grid_step(trace.times)
    indices, _ = scipy.signal.find_peaks(trace.values, prominence=prominence)
    peaks = []
    for k, index in enumerate(indices, start=1):
        time, value = refine_maximum(trace.times, trace.values, int(index))
        peaks.append(FidelityPeak(k=k, time=time, value=value))
    if not peaks:
        logger.warning(f"No peaks with prominence >= {prominence} in trace of {len(trace.values)} samples")
    return peaks


def with_peaks(trace: FidelityTrace, prominence: float = 0.02) -> FidelityTrace:
    return trace.model_copy(update={"peaks": find_peaks(trace, prominence)})
