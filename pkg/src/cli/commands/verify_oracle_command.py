import logging
import sys
from typing import Any, Dict

from colorama import Fore, Style

from src.errors import NumericalInvariantError
from src.models.oracle_model import VerificationReport
from src.models.run_config_model import RunConfig
from src.services.output_service import OutputWriter, write_outputs
from src.services.verification_service import OracleVerifier

logger = logging.getLogger(__name__)


def render_report(report: VerificationReport) -> str:
    lines = [f"Oracle checks for N={report.n_sites} (seed {report.seed})"]
    for check in report.checks:
        status = f"{Fore.GREEN}PASS" if check.passed else f"{Fore.RED}FAIL"
        lines.append(
            f"  {status}{Style.RESET_ALL}  {check.name:<14} trials={check.trials:<4} "
            f"max deviation={check.max_deviation:.3e} (tol {check.tolerance:.0e})"
        )
    return "\n".join(lines)


class VerifyOracleCommand:
    """
    Runs the analytic-versus-dense equivalence checks and prints a pass/fail table.
    """

    def __init__(self, writer: OutputWriter):
        self.writer = writer

    def execute(self, config: RunConfig) -> Dict[str, Any]:
        verifier = OracleVerifier(
            n_sites=config.n_or(8),
            trials=config.trials,
            seed=config.seed,
            j_xy=config.j_xy,
            h_field=config.h_field,
        )
        report = verifier.run()
        print(render_report(report), file=sys.stderr)

        data = report.model_dump(mode="json")
        rows = [check.model_dump(mode="json") for check in report.checks]
        outputs = write_outputs(self.writer, config, rows, data)
        if not report.passed:
            failed = [check.name for check in report.checks if not check.passed]
            raise NumericalInvariantError(f"oracle checks failed: {', '.join(failed)}")
        return {"command": config.command.value, **data, "outputs": outputs}
