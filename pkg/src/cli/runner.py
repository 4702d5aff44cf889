import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from dotenv import dotenv_values, load_dotenv
from pydantic import ValidationError

from src.cli.commands.average_fidelity_command import AverageFidelityCommand
from src.cli.commands.figure_commands import (
    AverageFidelityVsLengthCommand,
    MaxFidelitySurfaceCommand,
    MaxFidelityVsLengthCommand,
    SiteTracesCommand,
)
from src.cli.commands.propagator_command import PropagatorCommand
from src.cli.commands.protocol_commands import DualChainCommand, MemoryProtocolCommand
from src.cli.commands.trace_command import TraceCommand
from src.cli.commands.verify_oracle_command import VerifyOracleCommand
from src.errors import MagnonValidationError, NumericalInvariantError, SectorError, UsageError
from src.models.run_config_model import CommandName, OutputFormat, RunConfig
from src.services.output_service import OutputWriter, dumps
from src.services.sweep_service import SweepRunner

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_INTERNAL = 2

# config-file keys and flag destinations that differ from RunConfig field names
KEY_ALIASES = {
    "n": "n_sites",
    "j": "j_xy",
    "jz": "j_z",
    "h": "h_field",
    "format": "output_format",
    "peaks_out": "summary_out",
}

Command = Callable[[RunConfig], Dict[str, Any]]


class CommandParser(argparse.ArgumentParser):
    """An ArgumentParser that raises UsageError carrying the usage line instead of exiting."""

    def error(self, message: str):
        raise UsageError(f"{message}\n{self.format_usage()}")


def _common_flags() -> CommandParser:
    flags = CommandParser(add_help=False)
    suppress = argparse.SUPPRESS
    flags.add_argument("--config", type=Path, default=suppress, help="key=value file; flags override it")
    flags.add_argument("--verbose", action="store_true", default=suppress, help="log at DEBUG level")
    flags.add_argument("--out", type=Path, default=suppress, help="table output path")
    flags.add_argument("--summary-out", "--peaks-out", dest="summary_out", type=Path, default=suppress,
                       help="JSON summary path (argmax records, peaks, reports)")
    flags.add_argument("--format", dest="output_format", choices=[f.value for f in OutputFormat], default=suppress)

    chain = flags.add_argument_group("chain")
    chain.add_argument("--n", dest="n_sites", type=int, default=suppress, help="number of spins N")
    chain.add_argument("--j", dest="j_xy", type=float, default=suppress, help="xy coupling J")
    chain.add_argument("--jz", dest="j_z", type=float, default=suppress, help="z coupling Jz")
    chain.add_argument("--h", dest="h_field", type=float, default=suppress, help="uniform field h")

    state = flags.add_argument_group("logical state")
    state.add_argument("--encoding", default=suppress)
    state.add_argument("--encodings", default=suppress, help="comma-separated encoding names")
    state.add_argument("--theta", type=float, default=suppress)
    state.add_argument("--phi", type=float, default=suppress)

    grids = flags.add_argument_group("grids")
    grids.add_argument("--t", type=float, default=suppress, help="single evaluation time")
    grids.add_argument("--t-max", type=float, default=suppress)
    grids.add_argument("--t-step", type=float, default=suppress)
    grids.add_argument("--n-min", type=int, default=suppress)
    grids.add_argument("--n-max", type=int, default=suppress)
    grids.add_argument("--theta-step", type=float, default=suppress)
    grids.add_argument("--h-min", type=float, default=suppress)
    grids.add_argument("--h-max", type=float, default=suppress)
    grids.add_argument("--h-step", type=float, default=suppress)
    grids.add_argument("--sites", default=suppress, help="comma-separated receiving sites")
    grids.add_argument("--prominence", type=float, default=suppress)
    grids.add_argument("--swap-times", default=suppress, help="comma-separated swap times")

    oracle = flags.add_argument_group("oracle")
    oracle.add_argument("--trials", type=int, default=suppress)
    oracle.add_argument("--seed", type=int, default=suppress)
    return flags


def build_parser() -> CommandParser:
    parser = CommandParser(prog="magnon", description="Quantum state transfer through XY spin chains.")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=CommandParser)
    common = _common_flags()
    for name in CommandName:
        commands.add_parser(name.value, parents=[common])
    return parser


def read_config_file(path: Path) -> Dict[str, Any]:
    if not path.is_file():
        raise UsageError(f"config file {path} does not exist")
    values = {}
    for key, value in dotenv_values(path).items():
        if value is None or value == "":
            continue
        key = key.strip().lower().replace("-", "_")
        values[KEY_ALIASES.get(key, key)] = value
    logger.debug(f"Read {len(values)} settings from {path}")
    return values


def parse_config(argv: Sequence[str]) -> Tuple[RunConfig, bool]:
    """Defaults < config file < flags. Returns the config and whether --verbose was given."""
    flags = vars(build_parser().parse_args(list(argv)))
    verbose = bool(flags.pop("verbose", False))
    config_path = flags.pop("config", None)
    values = read_config_file(config_path) if config_path is not None else {}
    values.update(flags)
    return RunConfig(**values), verbose


def configure_logging(verbose: bool = False) -> None:
    level = logging.DEBUG if verbose else os.environ.get("MAGNON_LOG_LEVEL", "INFO").upper()
    logging.basicConfig(level=level, format=LOG_FORMAT)
    logging.getLogger().setLevel(level)


def create_command_registry(
    writer: Optional[OutputWriter] = None, sweeps: Optional[SweepRunner] = None
) -> Dict[CommandName, Command]:
    """Instantiates every command and registers its execute() under the command name."""
    writer = writer or OutputWriter()
    sweeps = sweeps or SweepRunner()

    propagator = PropagatorCommand(writer)
    trace = TraceCommand(writer)
    fig1 = MaxFidelityVsLengthCommand(writer, sweeps)
    fig2 = MaxFidelitySurfaceCommand(writer, sweeps)
    fig3 = SiteTracesCommand(writer, sweeps)
    fig4 = AverageFidelityVsLengthCommand(writer, sweeps)
    avg_fidelity = AverageFidelityCommand(writer)
    memory = MemoryProtocolCommand(writer)
    dual = DualChainCommand(writer)
    verify = VerifyOracleCommand(writer)

    return {
        CommandName.PROPAGATOR: propagator.execute,
        CommandName.TRACE: trace.execute,
        CommandName.FIG1: fig1.execute,
        CommandName.FIG2: fig2.execute,
        CommandName.FIG3: fig3.execute,
        CommandName.FIG4: fig4.execute,
        CommandName.AVG_FIDELITY: avg_fidelity.execute,
        CommandName.PROTOCOL_MEMORY: memory.execute,
        CommandName.PROTOCOL_DUAL: dual.execute,
        CommandName.VERIFY_ORACLE: verify.execute,
    }


def route_command(config: RunConfig, registry: Optional[Dict[CommandName, Command]] = None) -> Dict[str, Any]:
    registry = registry or create_command_registry()
    logger.info(f"Running command '{config.command.value}'")
    summary = registry[config.command](config)
    logger.info(f"Command '{config.command.value}' finished")
    return summary


def run(argv: Optional[Sequence[str]] = None, registry: Optional[Dict[CommandName, Command]] = None) -> int:
    """
    Parse `argv`, run the command and print its JSON summary on stdout.

    Returns:
        0 on success, 1 for invalid input, 2 when a numerical invariant fails
        or the command crashes.
    """
    argv: List[str] = list(sys.argv[1:] if argv is None else argv)
    try:
        config, verbose = parse_config(argv)
        configure_logging(verbose)
        summary = route_command(config, registry)
    except SystemExit as e:
        # --help
        return e.code if isinstance(e.code, int) else EXIT_OK
    except UsageError as e:
        logger.error(f"Usage error: {e}")
        print(e, file=sys.stderr)
        return EXIT_VALIDATION
    except (MagnonValidationError, SectorError, ValidationError) as e:
        logger.error(f"Invalid input: {e}")
        return EXIT_VALIDATION
    except NumericalInvariantError as e:
        logger.error(f"Numerical invariant violated: {e}")
        return EXIT_INTERNAL
    except Exception as e:
        logger.critical(f"Unexpected failure: {e}", exc_info=True)
        return EXIT_INTERNAL
    print(dumps(summary))
    return EXIT_OK


def main() -> None:
    load_dotenv()
    configure_logging()
    sys.exit(run(sys.argv[1:]))
