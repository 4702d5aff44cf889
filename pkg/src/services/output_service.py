import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence

import numpy as np

from src.models.fidelity_model import FidelityTrace
from src.models.run_config_model import OutputFormat, RunConfig

logger = logging.getLogger(__name__)


def format_value(value: Any) -> str:
    """Floats in 17-significant-digit scientific notation, everything else via str()."""
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".16e")
    return str(value)


def parse_value(text: str) -> Any:
    for convert in (int, float):
        try:
            return convert(text)
        except ValueError:
            continue
    return text


def _plain(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def dumps(data: Any) -> str:
    return json.dumps(data, indent=2, default=_plain)


class OutputWriter:
    """Writes plot-ready CSV tables and JSON reports as UTF-8 files."""

    def write_csv(self, path: Path, rows: Sequence[Dict[str, Any]]) -> Path:
        if not rows:
            raise ValueError(f"refusing to write an empty table to {path}")
        columns = list(rows[0])
        with open(path, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(columns)
            for row in rows:
                writer.writerow([format_value(row[column]) for column in columns])
        logger.info(f"Wrote {len(rows)} rows to {path}")
        return path

    def read_csv(self, path: Path) -> List[Dict[str, Any]]:
        with open(path, encoding="utf-8", newline="") as handle:
            return [{key: parse_value(text) for key, text in row.items()} for row in csv.DictReader(handle)]

    def write_json(self, path: Path, data: Any) -> Path:
        try:
            serialized = dumps(data)
        except TypeError as e:
            logger.error(f"Error serializing report for {path}: {e}")
            raise
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(serialized + "\n")
        logger.info(f"Wrote report to {path}")
        return path


def trace_rows(traces: Iterable[FidelityTrace]) -> List[Dict[str, Any]]:
    """Long format: one row per (site, t)."""
    rows = []
    for trace in traces:
        for t, value in zip(trace.times, trace.values):
            rows.append({"site": trace.site, "t": float(t), "F": float(value)})
    return rows


def peak_records(traces: Iterable[FidelityTrace]) -> List[Dict[str, Any]]:
    return [{"site": trace.site, **record} for trace in traces for record in trace.peak_records()]


def write_outputs(
    writer: OutputWriter,
    config: RunConfig,
    rows: Sequence[Dict[str, Any]],
    summary: Any = None,
) -> Dict[str, str]:
    """Write the table to `config.out` and the summary to `config.summary_out`, when set."""
    written: Dict[str, str] = {}
    if config.out is not None:
        if config.output_format == OutputFormat.CSV:
            writer.write_csv(config.out, rows)
        else:
            writer.write_json(config.out, {"rows": list(rows), "summary": summary})
        written["out"] = str(config.out)
    if config.summary_out is not None and summary is not None:
        writer.write_json(config.summary_out, summary)
        written["summary_out"] = str(config.summary_out)
    return written
