import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, Tuple, TypeVar

import numpy as np

from src.errors import BlockOverlapError, GridError
from src.models.chain_model import ChainParams
from src.models.encoding_model import BlochState, EncodingName, LogicalEncoding, Placement
from src.models.fidelity_model import FidelityTrace
from src.models.sweep_model import SweepResult, SweepSpec
from src.services.chain_service import MagnonChain
from src.services.encoding_service import block_sites, logical_state, place_logical_state
from src.services.fidelity_service import average_fidelity_from_amplitudes, refine_maximum, with_peaks
from src.services.transfer_service import TransferEngine

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def default_workers() -> int:
    configured = os.environ.get("MAGNON_THREADS")
    if configured:
        return max(1, int(configured))
    return os.cpu_count() or 1


def best_point(times: np.ndarray, values: np.ndarray) -> Tuple[float, float, float]:
    """(grid maximum, refined time, refined maximum) of one trace."""
    index = int(np.argmax(values))
    t_star, f_refined = refine_maximum(times, values, index)
    return float(values[index]), t_star, f_refined


def _check_no_overlap(encoding: LogicalEncoding, n_sites: int) -> None:
    if n_sites < 2 * encoding.block_size:
        raise BlockOverlapError(
            f"N={n_sites} is too short for {encoding.name.value}: sending and receiving "
            f"blocks of {encoding.block_size} sites overlap"
        )


class SweepRunner:
    """
    Runs the figure sweeps on a thread pool.

    Every task is pure and writes to its own output slot, so results do not
    depend on worker count or completion order.
    """

    def __init__(self, max_workers: Optional[int] = None):
        self.max_workers = max_workers or default_workers()

    def _map(self, task: Callable[[T], R], items: Iterable[T]) -> List[R]:
        items = list(items)
        logger.info(f"Dispatching {len(items)} sweep tasks to {self.max_workers} workers")
        if self.max_workers == 1:
            return [task(item) for item in items]
        with ThreadPoolExecutor(max_workers=self.max_workers) as pool:
            return list(pool.map(task, items))

    @staticmethod
    def _engine(spec: SweepSpec, n_sites: int) -> TransferEngine:
        params = ChainParams(n_sites=n_sites, j_xy=spec.j_xy, h_field=spec.h_field)
        return TransferEngine(MagnonChain(params), spec.time_grid())

    def max_fidelity_vs_length(self, spec: SweepSpec) -> SweepResult:
        """F_max over the time grid per (encoding, N) for the state set by thetas[0] and phi."""
        encodings = [LogicalEncoding.from_name(name) for name in spec.encodings]
        for encoding in encodings:
            for n in spec.n_values:
                _check_no_overlap(encoding, n)
        bloch = BlochState(theta=spec.thetas[0], phi=spec.phi)

        def task(point: Tuple[LogicalEncoding, int]) -> Tuple[float, float, float]:
            encoding, n = point
            engine = self._engine(spec, n)
            initial = logical_state(encoding, bloch, Placement.START, n)
            target = logical_state(encoding, bloch, Placement.END, n)
            values = engine.fidelity_values(initial, target, block_sites(encoding, Placement.END, n))
            logger.debug(f"{encoding.name.value} N={n}: F_max={values.max():.6f}")
            return best_point(engine.times, values)

        points = [(encoding, n) for encoding in encodings for n in spec.n_values]
        return self._collect(
            "max_fidelity_vs_length",
            {"encoding": [e.value for e in spec.encodings], "n": list(spec.n_values)},
            self._map(task, points),
        )

    def max_fidelity_surface(self, spec: SweepSpec) -> SweepResult:
        """F_max over time on the (N, theta) grid for encodings[0] (three-qubit-1 by default)."""
        encoding = LogicalEncoding.from_name(spec.encodings[0])
        for n in spec.n_values:
            _check_no_overlap(encoding, n)

        # one task per N so every theta reuses that chain's propagator rows
        def task(n: int) -> List[Tuple[float, float, float]]:
            engine = self._engine(spec, n)
            block = block_sites(encoding, Placement.END, n)
            line = []
            for theta in spec.thetas:
                bloch = BlochState(theta=theta, phi=spec.phi)
                initial = logical_state(encoding, bloch, Placement.START, n)
                target = logical_state(encoding, bloch, Placement.END, n)
                line.append(best_point(engine.times, engine.fidelity_values(initial, target, block)))
            logger.debug(f"Surface row N={n} done")
            return line

        rows = self._map(task, spec.n_values)
        return self._collect(
            "max_fidelity_surface",
            {"n": list(spec.n_values), "theta": list(spec.thetas)},
            [point for line in rows for point in line],
        )

    def avg_fidelity_vs_length(self, spec: SweepSpec) -> SweepResult:
        """Bloch-averaged fidelity maximized over the (t, h) grid per (encoding, N)."""
        encodings = [LogicalEncoding.from_name(name) for name in spec.encodings]
        for encoding in encodings:
            for n in spec.n_values:
                _check_no_overlap(encoding, n)
        fields = spec.field_grid()

        def task(point: Tuple[LogicalEncoding, int]) -> Tuple[float, float, float, float]:
            encoding, n = point
            engine = self._engine(spec, n)
            surface = self.average_fidelity_surface(engine, encoding, fields)
            h_index, t_index = np.unravel_index(int(np.argmax(surface)), surface.shape)
            t_star, f_refined = refine_maximum(engine.times, surface[h_index], int(t_index))
            return float(surface[h_index, t_index]), t_star, f_refined, float(fields[h_index])

        points = [(encoding, n) for encoding in encodings for n in spec.n_values]
        results = self._map(task, points)
        return self._collect(
            "avg_fidelity_vs_length",
            {"encoding": [e.value for e in spec.encodings], "n": list(spec.n_values)},
            [r[:3] for r in results],
            h_star=[r[3] for r in results],
        )

    @staticmethod
    def average_fidelity_surface(engine: TransferEngine, encoding: LogicalEncoding, fields: np.ndarray) -> np.ndarray:
        """F_av on the (h, t) grid, shape (len(fields), len(times))."""
        n = engine.n_sites
        base = engine.chain.params.h_field
        phases = np.exp(-2j * np.outer(fields - base, engine.times))
        if encoding.name == EncodingName.VACUUM_SINGLET:
            g = (engine.rows(3) - engine.rows(1)) / np.sqrt(2.0)
            return average_fidelity_from_amplitudes(
                g[:, n - 1] * phases, g[:, n - 2] * phases, g[:, n - 3] * phases
            )
        if encoding.name == EncodingName.SINGLE_SPIN:
            f = engine.rows(1)[:, n - 1] * phases
            return 0.5 + np.real(f) / 3.0 + np.abs(f) ** 2 / 6.0
        if not encoding.mixes_sectors:
            values = engine.average_fidelity_values(encoding)
            return np.tile(values, (len(fields), 1))
        return np.stack([engine.average_fidelity_values(encoding, field=h) for h in fields])

    def fidelity_site_traces(self, spec: SweepSpec) -> List[FidelityTrace]:
        """
        F(t) read on every block {i-b+1, ..., i} for the state set by thetas[0]
        planted at the start of a chain of n_values[0] sites.
        """
        encoding = LogicalEncoding.from_name(spec.encodings[0])
        n = spec.n_values[0]
        size = encoding.block_size
        sites = spec.sites or list(range(size, n + 1))
        if sites[0] < size or sites[-1] > n:
            raise GridError(f"receiving sites must lie in {size}..{n}, got {sites[0]}..{sites[-1]}")
        bloch = BlochState(theta=spec.thetas[0], phi=spec.phi)
        engine = self._engine(spec, n)
        initial = logical_state(encoding, bloch, Placement.START, n)
        for site in sorted(initial.occupied_sites()):
            engine.rows(site)

        def task(site: int) -> FidelityTrace:
            first = site - size + 1
            target = place_logical_state(encoding, bloch, first, n)
            trace = engine.fidelity_trace(initial, target, list(range(first, site + 1)))
            return with_peaks(trace, spec.prominence)

        return self._map(task, sites)

    @staticmethod
    def _collect(name, axes, points, h_star=None) -> SweepResult:
        shape = tuple(len(axis) for axis in axes.values())
        values, t_star, f_refined = (np.array(column, dtype=float).reshape(shape) for column in zip(*points))
        return SweepResult(
            name=name,
            axes=axes,
            values=values,
            t_star=t_star,
            f_refined=f_refined,
            h_star=None if h_star is None else np.array(h_star, dtype=float).reshape(shape),
        )


def max_fidelity_vs_length(spec: SweepSpec, max_workers: Optional[int] = None) -> SweepResult:
    return SweepRunner(max_workers).max_fidelity_vs_length(spec)


def max_fidelity_surface(spec: SweepSpec, max_workers: Optional[int] = None) -> SweepResult:
    return SweepRunner(max_workers).max_fidelity_surface(spec)


def avg_fidelity_vs_length(spec: SweepSpec, max_workers: Optional[int] = None) -> SweepResult:
    return SweepRunner(max_workers).avg_fidelity_vs_length(spec)


def fidelity_site_traces(spec: SweepSpec, max_workers: Optional[int] = None) -> List[FidelityTrace]:
    return SweepRunner(max_workers).fidelity_site_traces(spec)
