"""toricqfi CLI - Wilson loops, QFI scaling and the topological index of the toric code."""

import logging
from pathlib import Path
from typing import List, Optional

import typer
from rich import print
from rich.console import Console
from rich.logging import RichHandler
from rich.progress import BarColumn, MofNCompleteColumn, Progress, TextColumn, TimeElapsedColumn

from . import __version__
from .config import (
    GROUND,
    PHASE_DIAGRAM,
    QUENCH_DISORDER,
    QUENCH_UNIFORM,
    THERMAL_BOUND,
    ExperimentConfig,
    QuenchDisorderConfig,
    resolve_config,
    show_config_command,
)
from .errors import ChainSpecError, ConfigError, FitError, NumericalError
from .experiments import RunResult, run_experiment
from .selftest import run_selftest
from .tables import display_checks, display_run_summary

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_SELFTEST = 4

app = typer.Typer(
    name="toricqfi",
    help="Free-fermion simulations of topological order in the toric code with external fields",
    no_args_is_help=True,
)

console = Console()

CONFIG_OPTION = typer.Option(None, "--config", "-c", help="YAML file of experiment parameters")
SET_OPTION = typer.Option(
    None, "--set", "-s", help="Override a parameter, e.g. --set lambdas=[0.5,1.0] (repeatable)"
)
OUT_OPTION = typer.Option(None, "--out", "-o", help="Output directory (default: results)")
SEED_OPTION = typer.Option(None, "--seed", help="Master seed (unsigned 64-bit)")
THREADS_OPTION = typer.Option(None, "--threads", "-j", help="Worker processes for ensembles")
VERBOSE_OPTION = typer.Option(0, "--verbose", "-v", count=True, help="-v for info, -vv for debug")


def setup_logging(verbose: int) -> None:
    """Route library logging through rich; WARNING unless -v is given."""
    level = logging.WARNING if verbose <= 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=console, show_path=False)],
        force=True,
    )


def _execute(config: ExperimentConfig) -> RunResult:
    if not isinstance(config.parameters, QuenchDisorderConfig):
        return run_experiment(config)

    columns = (
        TextColumn("[bold cyan]{task.description}"),
        BarColumn(),
        MofNCompleteColumn(),
        TimeElapsedColumn(),
    )
    with Progress(*columns, console=console, transient=True) as progress:
        task = progress.add_task("Realizations", total=config.parameters.n_realizations)
        return run_experiment(config, on_result=lambda _index: progress.advance(task))


def run_command(
    experiment: str,
    config_path: Optional[Path],
    overrides: Optional[List[str]],
    out: Optional[Path],
    seed: Optional[int],
    threads: Optional[int],
    verbose: int,
) -> None:
    """Resolve the configuration, run the experiment and report, mapping errors to exit codes."""
    setup_logging(verbose)
    try:
        config = resolve_config(experiment, config_path, overrides or [], out, seed, threads)
        result = _execute(config)
    except (ConfigError, ChainSpecError, FitError) as e:
        console.print(f"[red]Error: {e}[/red]")
        raise typer.Exit(EXIT_CONFIG) from None
    except NumericalError as e:
        console.print(f"[red]Error: numerical failure: {e}[/red]")
        raise typer.Exit(EXIT_NUMERICAL) from None

    display_run_summary(result)
    console.print(f"[green]✅ {experiment} results written to {config.output_dir}[/green]")


@app.command("ground")
def ground(
    config_path: Optional[Path] = CONFIG_OPTION,
    overrides: Optional[List[str]] = SET_OPTION,
    out: Optional[Path] = OUT_OPTION,
    seed: Optional[int] = SEED_OPTION,
    threads: Optional[int] = THREADS_OPTION,
    verbose: int = VERBOSE_OPTION,
) -> None:
    """Ground-state reduced Wilson loops w_D and QFI densities for a grid of fields."""
    run_command(GROUND, config_path, overrides, out, seed, threads, verbose)


@app.command("quench-uniform")
def quench_uniform(
    config_path: Optional[Path] = CONFIG_OPTION,
    overrides: Optional[List[str]] = SET_OPTION,
    out: Optional[Path] = OUT_OPTION,
    seed: Optional[int] = SEED_OPTION,
    threads: Optional[int] = THREADS_OPTION,
    verbose: int = VERBOSE_OPTION,
) -> None:
    """String correlators after a uniform field quench, with long-time closed forms."""
    run_command(QUENCH_UNIFORM, config_path, overrides, out, seed, threads, verbose)


@app.command("quench-disorder")
def quench_disorder(
    config_path: Optional[Path] = CONFIG_OPTION,
    overrides: Optional[List[str]] = SET_OPTION,
    out: Optional[Path] = OUT_OPTION,
    seed: Optional[int] = SEED_OPTION,
    threads: Optional[int] = THREADS_OPTION,
    verbose: int = VERBOSE_OPTION,
) -> None:
    """Disorder-averaged Wilson loops and QFI after a quench with random couplings."""
    run_command(QUENCH_DISORDER, config_path, overrides, out, seed, threads, verbose)


@app.command("thermal-bound")
def thermal_bound(
    config_path: Optional[Path] = CONFIG_OPTION,
    overrides: Optional[List[str]] = SET_OPTION,
    out: Optional[Path] = OUT_OPTION,
    seed: Optional[int] = SEED_OPTION,
    threads: Optional[int] = THREADS_OPTION,
    verbose: int = VERBOSE_OPTION,
) -> None:
    """Upper bounds on the thermal QFI density and their scaling exponents."""
    run_command(THERMAL_BOUND, config_path, overrides, out, seed, threads, verbose)


@app.command("phase-diagram")
def phase_diagram(
    config_path: Optional[Path] = CONFIG_OPTION,
    overrides: Optional[List[str]] = SET_OPTION,
    out: Optional[Path] = OUT_OPTION,
    seed: Optional[int] = SEED_OPTION,
    threads: Optional[int] = THREADS_OPTION,
    verbose: int = VERBOSE_OPTION,
) -> None:
    """Scaling topological index over a (lambda^x, lambda^z) grid."""
    run_command(PHASE_DIAGRAM, config_path, overrides, out, seed, threads, verbose)


@app.command("selftest")
def selftest(
    seed: int = typer.Option(0, "--seed", help="Seed for the random test instances"),
    verbose: int = VERBOSE_OPTION,
) -> None:
    """Run the fast acceptance checks."""
    setup_logging(verbose)
    checks = run_selftest(seed)
    display_checks(checks)
    failed = [check.name for check in checks if not check.passed]
    if failed:
        console.print(f"[red]Error: self-test failed: {', '.join(failed)}[/red]")
        raise typer.Exit(EXIT_SELFTEST)
    console.print("[green]✅ All self-test checks passed[/green]")


# Create config subcommand group
config_app = typer.Typer(name="config", help="Inspect experiment configuration")
app.add_typer(config_app)


@config_app.command("show")
def show(
    experiment: str = typer.Argument(help="ground, quench-uniform, quench-disorder, thermal-bound or phase-diagram"),
    config_path: Optional[Path] = CONFIG_OPTION,
    overrides: Optional[List[str]] = SET_OPTION,
    format_type: str = typer.Option("table", "--format", help="Output format: table or json"),
) -> None:
    """Show the resolved configuration of an experiment."""
    try:
        show_config_command(experiment, config_path, overrides or [], format_type)
    except ConfigError as e:
        console.print(f"[red]Error: {e}[/red]")
        raise typer.Exit(EXIT_CONFIG) from None


@app.command()
def version() -> None:
    """Show version information."""
    print(f"toricqfi version: [bold]{__version__}[/bold]")


def main() -> None:
    """Main entry point for the CLI."""
    app()


if __name__ == "__main__":
    main()
