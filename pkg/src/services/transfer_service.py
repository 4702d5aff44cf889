import logging
import math
import threading
from typing import Dict, List, Optional, Sequence

import numpy as np

from src.errors import BlockMismatchError, UnsupportedSectorError
from src.models.encoding_model import BlochState, LogicalEncoding, Placement
from src.models.fidelity_model import FidelityTrace
from src.models.state_model import ExcitationState
from src.services.chain_service import MagnonChain
from src.services.encoding_service import block_sites, logical_state
from src.services.fidelity_service import CLIP_TOLERANCE, check_block

logger = logging.getLogger(__name__)

# The six cardinal Bloch states form a state 2-design: averaging a quadratic
# form over them equals the uniform sphere average.
CARDINAL_STATES = [
    BlochState(theta=0.0, phi=0.0),
    BlochState(theta=math.pi, phi=0.0),
    BlochState(theta=math.pi / 2, phi=0.0),
    BlochState(theta=math.pi / 2, phi=math.pi),
    BlochState(theta=math.pi / 2, phi=math.pi / 2),
    BlochState(theta=math.pi / 2, phi=3 * math.pi / 2),
]


class TransferEngine:
    """
    Fidelity of a chain state against a block target over a whole time grid.

    Propagator rows f_{j,.}(t) are computed once per source site and cached.
    A different field h only re-phases them by exp(-2i (h - h0) t), so field
    sweeps reuse the cache.
    """

    def __init__(self, chain: MagnonChain, times: np.ndarray):
        self.chain = chain
        self.times = np.asarray(times, dtype=float)
        self._rows: Dict[int, np.ndarray] = {}
        self._lock = threading.Lock()

    @property
    def n_sites(self) -> int:
        return self.chain.n_sites

    def rows(self, site: int) -> np.ndarray:
        with self._lock:
            cached = self._rows.get(site)
        if cached is not None:
            logger.debug(f"Propagator rows for site {site} served from cache")
            return cached
        computed = self.chain.propagator_rows(site, self.times)
        computed.setflags(write=False)
        with self._lock:
            self._rows.setdefault(site, computed)
            return self._rows[site]

    def field_phase(self, field: Optional[float]) -> Optional[np.ndarray]:
        if field is None or field == self.chain.params.h_field:
            return None
        return np.exp(-2j * (field - self.chain.params.h_field) * self.times)

    def _source_rows(self, sources: List[int], field: Optional[float]) -> np.ndarray:
        stacked = np.stack([self.rows(site) for site in sources], axis=1)
        phase = self.field_phase(field)
        return stacked if phase is None else stacked * phase[:, None, None]

    def fidelity_squared(
        self,
        initial: ExcitationState,
        target: ExcitationState,
        block: Sequence[int],
        field: Optional[float] = None,
    ) -> np.ndarray:
        """<phi|rho(t)|phi> for every grid time, clipped into [0, 1]."""
        n = self.n_sites
        if initial.n_sites != n or target.n_sites != n:
            raise ValueError(f"states must live on the engine's {n}-site chain")
        if any(m > 2 for m in initial.excitation_numbers() | target.excitation_numbers()):
            raise UnsupportedSectorError("only sectors M <= 2 are supported")
        block = check_block(block, n)
        outside_target = target.occupied_sites() - set(block)
        if outside_target:
            raise BlockMismatchError(f"target occupies sites {sorted(outside_target)} outside block {list(block)}")

        position = {site: b for b, site in enumerate(block)}
        inside = np.array(block) - 1
        outside = np.array([s for s in range(n) if s + 1 not in position], dtype=int)

        phi0 = target.amplitudes.get((), 0j)
        phi1 = np.zeros(len(block), dtype=complex)
        phi2: Dict[tuple, complex] = {}
        for config, amplitude in target.amplitudes.items():
            if len(config) == 1:
                phi1[position[config[0]]] += amplitude
            elif len(config) == 2:
                phi2[(position[config[0]], position[config[1]])] = amplitude

        c0 = initial.amplitudes.get((), 0j)
        one = {c[0]: a for c, a in initial.amplitudes.items() if len(c) == 1}
        two = {c: a for c, a in initial.amplitudes.items() if len(c) == 2}
        sources = sorted(set(one) | {site for pair in two for site in pair})
        steps = len(self.times)

        if sources:
            rows = self._source_rows(sources, field)
            index = {site: k for k, site in enumerate(sources)}
        a1 = np.zeros((steps, n), dtype=complex)
        if one:
            weights = np.zeros(len(sources), dtype=complex)
            for site, amplitude in one.items():
                weights[index[site]] = amplitude
            a1 = np.einsum("s,tsn->tn", weights, rows)

        overlap_empty = np.conj(phi0) * c0 + a1[:, inside] @ np.conj(phi1)
        overlap_single = np.conj(phi0) * a1[:, outside]
        two_outside = np.zeros(steps)

        if two:
            coefficients = np.zeros((len(sources), len(sources)), dtype=complex)
            for (j1, j2), amplitude in two.items():
                coefficients[index[j1], index[j2]] += amplitude
                coefficients[index[j2], index[j1]] -= amplitude
            # pair[t, b, s] = A(block_b, s); canonical amplitude of {l < s} is A(l, s)
            mixed = np.einsum("jk,tks->tjs", coefficients, rows, optimize=True)
            pair = np.einsum("tjb,tjs->tbs", rows[:, :, inside], mixed, optimize=True)
            for (b1, b2), amplitude in phi2.items():
                overlap_empty = overlap_empty + np.conj(amplitude) * pair[:, b1, inside[b2]]
            signs = np.where(outside[None, :] > inside[:, None], 1.0, -1.0)
            overlap_single = overlap_single + np.einsum(
                "b,bs,tbs->ts", np.conj(phi1), signs, pair[:, :, outside]
            )
            total = sum(abs(a) ** 2 for a in two.values())
            touching = np.sum(np.abs(pair) ** 2, axis=(1, 2))
            both_inside = sum(
                np.abs(pair[:, b1, inside[b2]]) ** 2
                for b1 in range(len(block))
                for b2 in range(b1 + 1, len(block))
            )
            two_outside = abs(phi0) ** 2 * (total - touching + both_inside)

        value = np.abs(overlap_empty) ** 2 + np.sum(np.abs(overlap_single) ** 2, axis=1) + two_outside
        excess = max(float(-value.min(initial=0.0)), float(value.max(initial=0.0)) - 1.0)
        if excess > CLIP_TOLERANCE:
            logger.warning(f"Squared fidelity left [0, 1] by {excess:.3e}; clipping")
        return np.clip(value, 0.0, 1.0)

    def fidelity_values(self, initial, target, block, field: Optional[float] = None) -> np.ndarray:
        return np.sqrt(self.fidelity_squared(initial, target, block, field))

    def fidelity_trace(
        self,
        initial: ExcitationState,
        target: ExcitationState,
        block: Sequence[int],
        field: Optional[float] = None,
    ) -> FidelityTrace:
        values = self.fidelity_values(initial, target, block, field)
        return FidelityTrace(times=self.times, values=values, site=int(list(block)[-1]))

    def average_fidelity_values(self, encoding: LogicalEncoding, field: Optional[float] = None) -> np.ndarray:
        """Bloch-sphere average of <phi|rho|phi> for end-to-end transfer of `encoding`."""
        n = self.n_sites
        block = block_sites(encoding, Placement.END, n)
        total = np.zeros(len(self.times))
        for bloch in CARDINAL_STATES:
            initial = logical_state(encoding, bloch, Placement.START, n)
            target = logical_state(encoding, bloch, Placement.END, n)
            total += self.fidelity_squared(initial, target, block, field)
        return total / len(CARDINAL_STATES)

    def average_fidelity_trace(self, encoding: LogicalEncoding, field: Optional[float] = None) -> FidelityTrace:
        values = self.average_fidelity_values(encoding, field)
        return FidelityTrace(times=self.times, values=values, site=self.n_sites)
