import logging
import math
from typing import Dict, List, Tuple

import numpy as np

from src.errors import ChainTooShortError
from src.models.encoding_model import BlochState, EncodingName, LogicalEncoding, Placement
from src.models.state_model import Configuration, ExcitationState

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)
SQRT6 = math.sqrt(6.0)
SQRT12 = math.sqrt(12.0)


def _from_bits(terms: Dict[str, complex]) -> Dict[Configuration, complex]:
    """{'010': a, ...} -> {(2,): a, ...}; bit k of the string is block site k+1."""
    amplitudes: Dict[Configuration, complex] = {}
    for bits, amplitude in terms.items():
        config = tuple(k + 1 for k, bit in enumerate(bits) if bit == "1")
        amplitudes[config] = amplitudes.get(config, 0j) + amplitude
    return {config: amplitude for config, amplitude in amplitudes.items() if amplitude != 0}


def _three_qubit_basis(encoding: LogicalEncoding) -> Tuple[Dict[str, complex], Dict[str, complex]]:
    (alpha0, beta0), (alpha1, beta1) = encoding.gauges
    zero = {
        "010": alpha0 / SQRT2,
        "100": -alpha0 / SQRT2,
        "011": beta0 / SQRT2,
        "101": -beta0 / SQRT2,
    }
    one = {
        "001": 2 * alpha1 / SQRT6,
        "010": -alpha1 / SQRT6,
        "100": -alpha1 / SQRT6,
        "110": -2 * beta1 / SQRT6,
        "011": beta1 / SQRT6,
        "101": beta1 / SQRT6,
    }
    return zero, one


def _basis_terms(encoding: LogicalEncoding) -> Tuple[Dict[str, complex], Dict[str, complex]]:
    name = encoding.name
    if name == EncodingName.TWO_QUBIT:
        return {"01": 1.0}, {"10": 1.0}
    if name in (EncodingName.THREE_QUBIT_1, EncodingName.THREE_QUBIT_2):
        return _three_qubit_basis(encoding)
    if name == EncodingName.FOUR_QUBIT:
        zero = {"0101": 0.5, "1010": 0.5, "0110": -0.5, "1001": -0.5}
        one = {"0011": 2 / SQRT12, "1100": 2 / SQRT12, "0110": -1 / SQRT12, "1001": -1 / SQRT12,
               "0101": -1 / SQRT12, "1010": -1 / SQRT12}
        return zero, one
    if name == EncodingName.VACUUM_SINGLET:
        return {"000": 1.0}, {"001": 1 / SQRT2, "100": -1 / SQRT2}
    return {"0": 1.0}, {"1": 1.0}


def logical_basis(encoding: LogicalEncoding) -> Tuple[ExcitationState, ExcitationState]:
    """|0_L>, |1_L> as states on a chain of exactly `block_size` sites."""
    zero, one = _basis_terms(encoding)
    size = encoding.block_size
    return (
        ExcitationState.trusted(size, {c: complex(a) for c, a in _from_bits(zero).items()}),
        ExcitationState.trusted(size, {c: complex(a) for c, a in _from_bits(one).items()}),
    )


def logical_block_vectors(encoding: LogicalEncoding) -> Tuple[np.ndarray, np.ndarray]:
    zero, one = logical_basis(encoding)
    return zero.to_dense(), one.to_dense()


def block_logical_state(encoding: LogicalEncoding, bloch: BlochState) -> ExcitationState:
    """cos(theta/2)|0_L> + sin(theta/2) e^{i phi}|1_L> on the bare block."""
    zero, one = logical_basis(encoding)
    return zero.scaled(bloch.alpha).added(one, bloch.beta)


def block_sites(encoding: LogicalEncoding, placement: Placement, n_sites: int) -> List[int]:
    size = encoding.block_size
    if n_sites < size:
        raise ChainTooShortError(
            f"chain of {n_sites} sites cannot host the {size}-site {encoding.name.value} block"
        )
    first = 1 if placement == Placement.START else n_sites - size + 1
    return list(range(first, first + size))


def place_logical_state(
    encoding: LogicalEncoding, bloch: BlochState, first_site: int, n_sites: int
) -> ExcitationState:
    """The logical state with its block starting at `first_site`, every other spin down."""
    size = encoding.block_size
    if first_site < 1 or first_site + size - 1 > n_sites:
        raise ChainTooShortError(
            f"block {first_site}..{first_site + size - 1} does not fit a chain of {n_sites} sites"
        )
    return block_logical_state(encoding, bloch).shifted(first_site - 1, n_sites)


def logical_state(
    encoding: LogicalEncoding, bloch: BlochState, placement: Placement, n_sites: int
) -> ExcitationState:
    """
    Plant the logical qubit at one end of the chain.

    The end block carries the same bit string as the start block, translated
    by N - block_size sites.
    """
    first = block_sites(encoding, placement, n_sites)[0]
    return place_logical_state(encoding, bloch, first, n_sites)


def target_state(encoding: LogicalEncoding, bloch: BlochState, n_sites: int) -> ExcitationState:
    return logical_state(encoding, bloch, Placement.END, n_sites)
