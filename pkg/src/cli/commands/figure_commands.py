import logging
import math
from typing import Any, Dict, List

from src.errors import ChainTooShortError
from src.models.encoding_model import EncodingName, LogicalEncoding
from src.models.run_config_model import RunConfig
from src.models.sweep_model import FIG1_ENCODINGS, SweepResult
from src.services.output_service import OutputWriter, peak_records, trace_rows, write_outputs
from src.services.sweep_service import SweepRunner

logger = logging.getLogger(__name__)

FIG4_ENCODINGS = [EncodingName.VACUUM_SINGLET, EncodingName.SINGLE_SPIN]


def lengths_for(encoding: LogicalEncoding, config: RunConfig, default_max: int) -> List[int]:
    """Chain lengths from max(n_min, 2b) to n_max, so sending and receiving blocks never overlap."""
    start = max(config.n_min or 1, 2 * encoding.block_size)
    stop = config.n_max or default_max
    if stop < start:
        raise ChainTooShortError(
            f"{encoding.name.value} needs chains of at least {start} sites, but n_max is {stop}"
        )
    return list(range(start, stop + 1))


def _summary(config: RunConfig, results: List[SweepResult], records: List[Dict[str, Any]]) -> Dict[str, Any]:
    return {
        "command": config.command.value,
        "sweeps": [result.name for result in results],
        "points": sum(result.values.size for result in results),
        "argmax": records,
    }


class MaxFidelityVsLengthCommand:
    """F_max(N) for each encoding, for the equal superposition unless --theta says otherwise."""

    def __init__(self, writer: OutputWriter, sweeps: SweepRunner):
        self.writer = writer
        self.sweeps = sweeps

    def execute(self, config: RunConfig) -> Dict[str, Any]:
        bloch = config.bloch(default_theta=math.pi / 2)
        results = []
        for name in config.encodings or FIG1_ENCODINGS:
            encoding = LogicalEncoding.from_name(name)
            spec = config.sweep_spec(
                encodings=[encoding.name],
                n_values=lengths_for(encoding, config, default_max=50),
                thetas=[bloch.theta],
            )
            results.append(self.sweeps.max_fidelity_vs_length(spec))

        rows = [row for result in results for row in result.to_rows()]
        records = [record for result in results for record in result.argmax_records()]
        summary = _summary(config, results, records)
        summary["outputs"] = write_outputs(self.writer, config, rows, records)
        return summary


class MaxFidelitySurfaceCommand:
    """F_max over the (N, theta) grid; argmax records give the best theta per N."""

    def __init__(self, writer: OutputWriter, sweeps: SweepRunner):
        self.writer = writer
        self.sweeps = sweeps

    def execute(self, config: RunConfig) -> Dict[str, Any]:
        encoding = config.encoding_or(EncodingName.THREE_QUBIT_1)
        spec = config.sweep_spec(
            encodings=[encoding.name],
            n_values=lengths_for(encoding, config, default_max=50),
            thetas=config.theta_grid(),
        )
        result = self.sweeps.max_fidelity_surface(spec)
        records = result.argmax_records()
        summary = _summary(config, [result], records)
        summary["outputs"] = write_outputs(self.writer, config, result.to_rows(), records)
        return summary


class SiteTracesCommand:
    """Fidelity traces read on every block along one chain, with their peaks."""

    def __init__(self, writer: OutputWriter, sweeps: SweepRunner):
        self.writer = writer
        self.sweeps = sweeps

    def execute(self, config: RunConfig) -> Dict[str, Any]:
        encoding = config.encoding_or(EncodingName.VACUUM_SINGLET)
        bloch = config.bloch()
        n = config.n_or(48)
        spec = config.sweep_spec(
            encodings=[encoding.name],
            n_values=[n],
            thetas=[bloch.theta],
            sites=config.sites,
        )
        traces = self.sweeps.fidelity_site_traces(spec)
        peaks = peak_records(traces)
        end = traces[-1]
        logger.info(f"Block ending at site {end.site}: {len(end.peaks)} peaks")
        summary = {
            "command": config.command.value,
            "n": n,
            "encoding": encoding.name.value,
            "sites": [trace.site for trace in traces],
            "peaks": peaks,
        }
        summary["outputs"] = write_outputs(self.writer, config, trace_rows(traces), peaks)
        return summary


class AverageFidelityVsLengthCommand:
    """F_av(N) maximized over the (t, h) grid, with the optimal time and field."""

    def __init__(self, writer: OutputWriter, sweeps: SweepRunner):
        self.writer = writer
        self.sweeps = sweeps

    def execute(self, config: RunConfig) -> Dict[str, Any]:
        results = []
        for name in config.encodings or FIG4_ENCODINGS:
            encoding = LogicalEncoding.from_name(name)
            spec = config.sweep_spec(
                encodings=[encoding.name],
                n_values=lengths_for(encoding, config, default_max=80),
                h_values=config.field_values(),
            )
            results.append(self.sweeps.avg_fidelity_vs_length(spec))

        rows = [row for result in results for row in result.to_rows()]
        records = [record for result in results for record in result.argmax_records()]
        summary = _summary(config, results, records)
        summary["outputs"] = write_outputs(self.writer, config, rows, records)
        return summary
