import logging
import math
from collections import defaultdict
from typing import Dict, List, Sequence, Tuple

import numpy as np

from src.errors import BlockOverlapError, GridError, NumericalInvariantError
from src.models.chain_model import ChainParams
from src.models.encoding_model import BlochState, EncodingName, LogicalEncoding, Placement
from src.models.protocol_model import DualChainOutcome, MemoryProtocolResult
from src.models.state_model import Configuration, ExcitationState
from src.services.dynamics_service import evolve
from src.services.encoding_service import block_sites, logical_block_vectors, logical_state
from src.services.fidelity_service import clip_unit, fidelity

logger = logging.getLogger(__name__)

# Sparse two-chain state: (chain-1 configuration, chain-2 configuration) -> amplitude
JointState = Dict[Tuple[Configuration, Configuration], complex]

VACUUM_SINGLET = LogicalEncoding.from_name(EncodingName.VACUUM_SINGLET)

# below this the confirming outcome is treated as never occurring
NEGLIGIBLE_PROBABILITY = 1e-12


def memory_protocol(
    params: ChainParams,
    encoding: LogicalEncoding,
    bloch: BlochState,
    swap_times: Sequence[float],
) -> MemoryProtocolResult:
    """
    Swap the receiving block into a memory at each of `swap_times`.

    Only the excited part of the logical state travels, so the protocol runs on
    its normalized non-vacuum component. At a swap the target component is
    extracted with probability eta_k; the remainder is renormalized and keeps
    evolving freely.
    """
    times = [float(t) for t in swap_times]
    if not times or any(b <= a for a, b in zip(times, times[1:])) or times[0] < 0:
        raise GridError(f"swap times must be non-negative and strictly ascending, got {times}")
    n = params.n_sites
    travelling = logical_state(encoding, bloch, Placement.START, n).without_vacuum()
    wanted = logical_state(encoding, bloch, Placement.END, n).without_vacuum()
    if travelling.norm_squared() == 0.0:
        raise GridError("the logical state has no excited component to transfer")
    current = travelling.normalized()
    wanted = wanted.normalized()

    etas: List[float] = []
    failure: List[float] = []
    remaining = 1.0
    clock = 0.0
    for t in times:
        if current is None:
            etas.append(0.0)
            failure.append(remaining)
            continue
        current = evolve(current, params, t - clock)
        clock = t
        overlap = wanted.inner(current)
        eta = clip_unit(abs(overlap) ** 2, "swap probability")
        remaining *= 1.0 - eta
        etas.append(eta)
        failure.append(remaining)
        logger.info(f"Swap at t={t:g}: eta={eta:.6f}, cumulative failure={remaining:.6f}")
        leftover = current.added(wanted, -overlap)
        current = leftover.normalized() if leftover.norm_squared() > 1e-24 else None
    return MemoryProtocolResult(swap_times=times, etas=etas, cumulative_failure=failure)


def logical_x() -> np.ndarray:
    """
    Logical X on spins (1, 3) of a vacuum-singlet block, basis |00>, |01>, |10>, |11>.

    Maps |00> to the singlet (|01> - |10>)/sqrt(2), i.e. |0_L> to |1_L>.
    """
    s = 1.0 / math.sqrt(2.0)
    return np.array(
        [
            [0.0, 1.0, 0.0, 0.0],
            [s, 0.0, 0.0, s],
            [-s, 0.0, 0.0, s],
            [0.0, 0.0, 1.0, 0.0],
        ]
    )


def logical_cnot(gate: np.ndarray) -> np.ndarray:
    """
    Apply `gate` to a spin pair when a three-spin control block reads |000>.

    Control is the most significant factor: CNOT = P0 (x) gate + (1 - P0) (x) 1.
    """
    gate = np.asarray(gate)
    if gate.shape != (4, 4):
        raise ValueError(f"target gate must be 4x4, got {gate.shape}")
    p0 = np.zeros((8, 8))
    p0[0, 0] = 1.0
    return np.kron(p0, gate) + np.kron(np.eye(8) - p0, np.eye(4))


def _block_index(config: Configuration, sites: Sequence[int]) -> int:
    return sum(1 << (len(sites) - 1 - k) for k, site in enumerate(sites) if site in config)


def _set_block(config: Configuration, sites: Sequence[int], index: int) -> Configuration:
    kept = [s for s in config if s not in sites]
    placed = [site for k, site in enumerate(sites) if index >> (len(sites) - 1 - k) & 1]
    return tuple(sorted(kept + placed))


def apply_controlled(
    joint: JointState, operator: np.ndarray, control_sites: Sequence[int], target_sites: Sequence[int]
) -> JointState:
    """Apply a 32x32 operator on (chain-1 control block) (x) (chain-2 spin pair)."""
    result: JointState = defaultdict(complex)
    for (c1, c2), amplitude in joint.items():
        column = _block_index(c1, control_sites) * 4 + _block_index(c2, target_sites)
        for row in np.flatnonzero(operator[:, column]):
            control, target = divmod(int(row), 4)
            key = (_set_block(c1, control_sites, control), _set_block(c2, target_sites, target))
            result[key] += amplitude * operator[row, column]
    return dict(result)


def encode_joint(bloch: BlochState, n_sites: int) -> JointState:
    """alpha |0_L>|1_L> + beta |1_L>|0_L> with both blocks at the chain starts."""
    chain1 = logical_state(VACUUM_SINGLET, bloch, Placement.START, n_sites)
    joint = {(c1, ()): amplitude for c1, amplitude in chain1.amplitudes.items()}
    return apply_controlled(joint, logical_cnot(logical_x()), [1, 2, 3], [1, 3])


def evolve_joint(joint: JointState, params: ChainParams, t: float) -> JointState:
    """Free evolution of two identical decoupled chains, term by term."""
    n = params.n_sites
    by_first: Dict[Configuration, Dict[Configuration, complex]] = defaultdict(dict)
    for (c1, c2), amplitude in joint.items():
        by_first[c1][c2] = amplitude
    evolved_basis: Dict[Configuration, ExcitationState] = {}

    def evolved(config: Configuration) -> ExcitationState:
        if config not in evolved_basis:
            evolved_basis[config] = evolve(ExcitationState.trusted(n, {config: 1.0 + 0j}), params, t)
        return evolved_basis[config]

    result: JointState = defaultdict(complex)
    for c1, second in by_first.items():
        second_state = evolve(ExcitationState.trusted(n, second), params, t)
        for d1, a1 in evolved(c1).amplitudes.items():
            for d2, a2 in second_state.amplitudes.items():
                result[(d1, d2)] += a1 * a2
    return dict(result)


def joint_to_register(joint: JointState, n_sites: int) -> ExcitationState:
    """Lay chain 2 after chain 1 on one register of 2N sites."""
    return ExcitationState.trusted(
        2 * n_sites, {c1 + tuple(s + n_sites for s in c2): a for (c1, c2), a in joint.items()}
    )


def _reduced_block(joint: JointState, chain: int, sites: Sequence[int]) -> np.ndarray:
    """Reduced density matrix of `sites` on chain 1 (chain=0) or chain 2 (chain=1)."""
    groups: Dict[tuple, np.ndarray] = defaultdict(lambda: np.zeros(2 ** len(sites), dtype=complex))
    for key, amplitude in joint.items():
        config = key[chain]
        rest = (tuple(s for s in config if s not in sites), key[1 - chain])
        groups[rest][_block_index(config, sites)] += amplitude
    rho = np.zeros((2 ** len(sites),) * 2, dtype=complex)
    for vector in groups.values():
        rho += np.outer(vector, vector.conj())
    return rho


def dual_chain_protocol(params: ChainParams, bloch: BlochState, t_wait: float) -> DualChainOutcome:
    """
    Two-chain confirmation: encode across both chains, wait, decode with the
    controlled X_L^dagger at the receiving ends and measure chain 2's last block.
    A |000> outcome heralds the logical state on chain 1.
    """
    n = params.n_sites
    if n < 6:
        raise BlockOverlapError(f"the dual-chain protocol needs N >= 6 per chain, got {n}")
    receiving = block_sites(VACUUM_SINGLET, Placement.END, n)
    joint = evolve_joint(encode_joint(bloch, n), params, t_wait)

    zero, one = logical_block_vectors(VACUUM_SINGLET)
    rho2 = _reduced_block(joint, 1, receiving)
    kept = float(np.real(zero.conj() @ rho2 @ zero + one.conj() @ rho2 @ one))
    leakage = clip_unit(1.0 - kept, "leakage")

    decoded = apply_controlled(
        joint, logical_cnot(logical_x().conj().T), receiving, [receiving[0], receiving[-1]]
    )
    outcomes = np.zeros(8)
    for (_, c2), amplitude in decoded.items():
        outcomes[_block_index(c2, receiving)] += abs(amplitude) ** 2
    total = float(outcomes.sum())
    if abs(total - 1.0) > 1e-8:
        raise NumericalInvariantError(f"chain-2 outcome probabilities sum to {total!r}")

    p_confirm = clip_unit(float(outcomes[0]), "confirmation probability")
    f_conditioned = None
    if p_confirm > NEGLIGIBLE_PROBABILITY:
        confirmed = {key: a for key, a in decoded.items() if _block_index(key[1], receiving) == 0}
        rho1 = _reduced_block(confirmed, 0, receiving) / outcomes[0]
        ideal = bloch.alpha * zero + bloch.beta * one
        f_conditioned = math.sqrt(clip_unit(float(np.real(ideal.conj() @ rho1 @ ideal)), "fidelity squared"))

    single = evolve(logical_state(VACUUM_SINGLET, bloch, Placement.START, n), params, t_wait)
    target = logical_state(VACUUM_SINGLET, bloch, Placement.END, n)
    f_unconditioned = fidelity(single, target, receiving)
    logger.info(f"Dual chain N={n}, t={t_wait:g}: p_confirm={p_confirm:.6f}, leakage={leakage:.6f}")
    return DualChainOutcome(
        n_sites=n,
        t_wait=float(t_wait),
        p_confirm=p_confirm,
        f_conditioned=f_conditioned,
        f_unconditioned=f_unconditioned,
        leakage=leakage,
        outcome_probabilities={format(k, "03b"): float(outcomes[k]) for k in range(8)},
    )
