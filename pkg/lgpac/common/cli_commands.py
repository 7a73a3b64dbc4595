"""
Command line interface

Usage:
  lgpac validate FILE
  lgpac simulate FILE [--t-end X] [--samples N] [--out PATH]
  lgpac limit FILE [--tau N] [--out PATH] [--strict]
  lgpac oracle FILE --against gamma|zeta|closed-form
  lgpac export-examples DIR

The same group is mounted on the Flask app, so `flask lgpac ...` works too.
"""
import csv
import functools
import io
import logging
import os
from typing import Callable, Dict, List, Optional

import click

from lgpac import config
from lgpac.common import status
from lgpac.common.log_handlers import init_cli_logging
from lgpac.constructions import catalog_names, construction, gamma_oracle, zeta_oracle
from lgpac.dsl import DslError, construction_document, print_document
from lgpac.models.base import CompilationError, DataValidationError
from lgpac.simulator import SimulationError, traces_to_csv
from lgpac import workflows

logger = logging.getLogger("flask.app")

LIMIT_ORACLES: Dict[str, Callable[[float], float]] = {"gamma": gamma_oracle, "zeta": zeta_oracle}


def _read(path: str) -> bytes:
    try:
        with open(path, "rb") as handle:
            return handle.read()
    except OSError as error:
        raise DataValidationError(f"cannot read {path}: {error.strerror}") from error


def _write(path: Optional[str], text: str):
    """Writes to a file, or to stdout when no path is given"""
    if path is None:
        click.echo(text, nl=False)
        return
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)
    logger.info("Wrote %s", path)


def exit_codes(func):
    """Maps library errors onto the documented exit codes"""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        ctx = click.get_current_context()
        try:
            code = func(*args, **kwargs)
        except DslError as error:
            for diagnostic in error.diagnostics:
                click.echo(str(diagnostic), err=True)
            code = status.EXIT_DIAGNOSTICS
        except (DataValidationError, CompilationError) as error:
            click.echo(f"error: {error}", err=True)
            code = status.EXIT_DIAGNOSTICS
        except SimulationError as error:
            click.echo(f"simulation failed: {error} (last valid time {error.frontier})", err=True)
            code = status.EXIT_RUNTIME
        except OSError as error:
            click.echo(f"error: {error}", err=True)
            code = status.EXIT_DIAGNOSTICS
        ctx.exit(code or status.EXIT_OK)

    return wrapper


######################################################################
# The lgpac command group
######################################################################
@click.group(name="lgpac")
@click.option("-v", "--verbose", count=True, help="-v for progress, -vv for solver details")
def lgpac(verbose: int):
    """Simulate L-GPAC networks and certify their limits"""
    level = {0: max(config.LOGGING_LEVEL, logging.WARNING), 1: logging.INFO}.get(verbose, logging.DEBUG)
    init_cli_logging(level)


@lgpac.command("validate")
@click.argument("file")
@exit_codes
def validate_command(file: str) -> int:
    """Parse and validate FILE"""
    result, report = workflows.check(_read(file))
    for diagnostic in result.diagnostics:
        click.echo(f"{file}:{diagnostic}", err=True)
    if report is None:
        return status.EXIT_DIAGNOSTICS
    for violation in report.violations:
        click.echo(f"{file}: {violation.severity.value}: {violation.message}", err=not report.ok)
    if not report.ok:
        return status.EXIT_DIAGNOSTICS
    click.echo(f"{file}: ok ({len(result.document.modules)} modules)")
    return status.EXIT_OK


@lgpac.command("simulate")
@click.argument("file")
@click.option("--t-end", type=float, default=None, help="Horizon; defaults to the file's simulate statement")
@click.option("--samples", type=click.IntRange(min=2), default=None, help="Number of sample times")
@click.option("--out", type=str, default=None, help="CSV path; stdout when omitted")
@exit_codes
def simulate_command(file: str, t_end: Optional[float], samples: Optional[int], out: Optional[str]) -> int:
    """Simulate FILE and write the output channels as CSV (t,x,channel,value)"""
    work = workflows.load(_read(file))
    traces = workflows.run_simulation(work, t_end, samples)
    _write(out, traces_to_csv(traces, workflows.output_channels(work)))
    return status.EXIT_OK


def _limit_csv(rows: List[dict]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, ["module", "x", "value", "bound", "gap", "certified"], lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({**row, "x": "" if row["x"] is None else repr(row["x"]), "value": repr(row["value"])})
    return buffer.getvalue()


@lgpac.command("limit")
@click.argument("file")
@click.option("--tau", type=float, default=None, help="Precision 2^-tau; defaults to the file's precision statement")
@click.option("--out", type=str, default=None, help="CSV path for the value table")
@click.option("--strict", is_flag=True, help="Exit with 3 when a limit is not certified")
@exit_codes
def limit_command(file: str, tau: Optional[float], out: Optional[str], strict: bool) -> int:
    """Run every limit module of FILE and report certified values"""
    work = workflows.load(_read(file))
    limits = workflows.run_limits(work, tau)
    rows = workflows.limit_table(limits)
    for row in rows:
        x = "" if row["x"] is None else f"x={row['x']:<8g}"
        click.echo(f"{row['module']:<10} {x} {row['value']:.12g}")
    for module, limit in limits.items():
        verdict = "certified" if limit.certified else "NOT certified"
        click.echo(f"{module}: {verdict} (gap {limit.empirical_gap:.3g} vs bound {limit.bound:.3g})")
    if out is not None:
        _write(out, _limit_csv(rows))
    if strict and not all(limit.certified for limit in limits.values()):
        return status.EXIT_NOT_CERTIFIED
    return status.EXIT_OK


@lgpac.command("oracle")
@click.argument("file")
@click.option("--against", "against", type=click.Choice(["gamma", "zeta", "closed-form"]), required=True)
@click.option("--tau", type=float, default=None, help="Precision for gamma and zeta comparisons")
@click.option("--t-end", type=float, default=None, help="Horizon for closed-form comparisons")
@exit_codes
def oracle_command(file: str, against: str, tau: Optional[float], t_end: Optional[float]) -> int:
    """Print the max abs error of FILE's results against an oracle"""
    work = workflows.load(_read(file))
    if against == "closed-form":
        errors = workflows.closed_form_errors(work, workflows.run_simulation(work, t_end))
    else:
        errors = workflows.limit_errors(workflows.run_limits(work, tau), LIMIT_ORACLES[against])
    for channel, error in errors.items():
        click.echo(f"{channel}: max abs error {error:.3e}")
    return status.EXIT_OK


@lgpac.command("export-examples")
@click.argument("directory")
@exit_codes
def export_examples_command(directory: str) -> int:
    """Write every catalog construction as DIR/NAME.lgpac"""
    os.makedirs(directory, exist_ok=True)
    for name in catalog_names():
        text = print_document(construction_document(construction(name)))
        _write(os.path.join(directory, f"{name}.lgpac"), text)
    click.echo(f"exported {len(catalog_names())} networks to {directory}")
    return status.EXIT_OK


def cli_run(argv: Optional[List[str]] = None) -> int:
    """Runs the command line and returns its exit code instead of exiting"""
    try:
        code = lgpac.main(args=argv, prog_name="lgpac", standalone_mode=False)
    except click.exceptions.Abort:
        return status.EXIT_DIAGNOSTICS
    except click.ClickException as error:
        error.show()
        return status.EXIT_DIAGNOSTICS
    return code if isinstance(code, int) else status.EXIT_OK
