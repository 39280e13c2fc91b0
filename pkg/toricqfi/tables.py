"""Rich tables summarising runs and self-test checks."""

from typing import Any, Sequence

from rich.console import Console
from rich.table import Table

from .experiments import RunResult
from .formatting import format_display
from .selftest import CheckResult

console = Console()


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format_display(value)
    return str(value)


def create_summary_table(result: RunResult) -> Table:
    """Key numbers of a finished run, one row per grid point."""
    table = Table(title=f"[bold]{result.experiment}[/bold]", show_header=True)
    for i, column in enumerate(result.summary_columns):
        table.add_column(column, style="bold cyan" if i == 0 else "green", justify="right")
    for row in result.summary_rows:
        table.add_row(*[_cell(value) for value in row])
    return table


def display_run_summary(result: RunResult) -> None:
    """Print the summary table and the files written."""
    console.print(create_summary_table(result))
    for path in result.files:
        console.print(f"[dim]  {path}[/dim]")


def display_checks(checks: Sequence[CheckResult]) -> None:
    """Pass/fail table of self-test checks."""
    table = Table(title="[bold]Self-test[/bold]", show_header=True)
    table.add_column("Check", style="bold cyan")
    table.add_column("Result", justify="center")
    table.add_column("Detail", style="dim")
    for check in checks:
        status = "[green]✅ pass[/green]" if check.passed else "[red]❌ fail[/red]"
        table.add_row(check.name, status, check.detail)
    console.print(table)
