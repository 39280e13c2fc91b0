"""Experiment configuration: flat YAML files, --set overrides and validated models."""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Type, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from rich.console import Console
from rich.table import Table

from .errors import ConfigError

console = Console()

GROUND = "ground"
QUENCH_UNIFORM = "quench-uniform"
QUENCH_DISORDER = "quench-disorder"
THERMAL_BOUND = "thermal-bound"
PHASE_DIAGRAM = "phase-diagram"

# Keys that configure the run itself rather than the experiment.
RUN_KEYS = ("output_dir", "seed", "threads")


class GroundConfig(BaseModel):
    """Ground-state w_D(D) curves and f_Q(L) for a grid of fields."""

    model_config = ConfigDict(extra="forbid")

    lambdas: List[float] = Field(default_factory=lambda: [0.5, 1.0, 1.5], min_length=1)
    l_region: int = Field(64, ge=1)
    n_sites: Optional[int] = None
    plot: bool = False

    @model_validator(mode="after")
    def check_ring(self) -> "GroundConfig":
        n = self.resolved_sites
        if n % 2:
            raise ValueError(f"n_sites must be even, got {n}")
        if n < 2 * self.l_region:
            raise ValueError(f"n_sites={n} is below 2 L = {2 * self.l_region}")
        if any(lam < 0 for lam in self.lambdas):
            raise ValueError("lambdas must be nonnegative")
        return self

    @property
    def resolved_sites(self) -> int:
        """N, defaulting to 5 L rounded up to even."""
        if self.n_sites is not None:
            return self.n_sites
        return 5 * self.l_region + self.l_region % 2


class PhaseDiagramConfig(BaseModel):
    """Topological index over a (lambda^x, lambda^z) grid with N = n_factor L."""

    model_config = ConfigDict(extra="forbid")

    lambda_x: List[float] = Field(default_factory=lambda: [0.5, 1.5], min_length=1)
    lambda_z: List[float] = Field(default_factory=lambda: [0.5, 1.5], min_length=1)
    l_values: List[int] = Field(default_factory=lambda: [16, 24, 32, 48, 64], min_length=1)
    n_factor: int = Field(5, ge=2)
    plot: bool = False

    @model_validator(mode="after")
    def check_grid(self) -> "PhaseDiagramConfig":
        if any(b <= a for a, b in zip(self.l_values, self.l_values[1:])):
            raise ValueError("l_values must be strictly increasing")
        if self.l_values[0] < 1:
            raise ValueError("l_values must be positive")
        if any((self.n_factor * side) % 2 for side in self.l_values):
            raise ValueError("n_factor * L must be even for every L")
        if any(lam < 0 for lam in self.lambda_x + self.lambda_z):
            raise ValueError("fields must be nonnegative")
        return self


class QuenchUniformConfig(BaseModel):
    """C^x_d(t) after a uniform quench, next to its long-time closed forms."""

    model_config = ConfigDict(extra="forbid")

    lambda0: float = Field(0.0, ge=0)
    lambda_quench: float = Field(0.5, ge=0)
    n_sites: int = Field(400, ge=4)
    d_values: List[int] = Field(default_factory=lambda: list(range(1, 9)), min_length=1)
    t_min: float = Field(400.0, ge=0)
    t_max: float = Field(500.0, ge=0)
    n_times: int = Field(20, ge=1)
    plot: bool = False

    @model_validator(mode="after")
    def check_grid(self) -> "QuenchUniformConfig":
        if self.n_sites % 2:
            raise ValueError(f"n_sites must be even, got {self.n_sites}")
        limit = self.n_sites // 2 - 1
        if any(not 1 <= d <= limit for d in self.d_values):
            raise ValueError(f"d_values must lie in [1, {limit}]")
        if self.t_max < self.t_min:
            raise ValueError("t_max must not be below t_min")
        return self


class QuenchDisorderConfig(BaseModel):
    """Disorder ensemble after a lambda=0 -> lambda_quench quench."""

    model_config = ConfigDict(extra="forbid")

    j_base: float = Field(1.0, gt=0)
    delta_j: float = Field(0.5, ge=0, lt=1)
    lambda_quench: float = Field(0.5, ge=0)
    l_region: int = Field(40, ge=1)
    n_sites: Optional[int] = None
    n_realizations: int = Field(100, ge=1)
    times: List[float] = Field(default_factory=lambda: [1000.0], min_length=1)
    d_values: Optional[List[int]] = None
    enforce_five_l: bool = True
    plot: bool = False


class ThermalConfig(BaseModel):
    """Thermal upper bounds on f_Q for a grid of temperatures and side lengths."""

    model_config = ConfigDict(extra="forbid")

    j_a: float = Field(1.0, gt=0)
    j_b: float = Field(1.0, gt=0)
    temperatures: List[float] = Field(default_factory=lambda: [0.5, 1.0, 2.0], min_length=1)
    l_values: List[int] = Field(
        default_factory=lambda: [10, 50, 100, 200, 300, 400, 10000], min_length=1
    )
    plot: bool = False

    @model_validator(mode="after")
    def check_grid(self) -> "ThermalConfig":
        if any(t <= 0 for t in self.temperatures):
            raise ValueError("temperatures must be positive")
        if any(b <= a for a, b in zip(self.l_values, self.l_values[1:])) or self.l_values[0] < 1:
            raise ValueError("l_values must be positive and strictly increasing")
        return self


ParameterModel = Union[
    GroundConfig, PhaseDiagramConfig, QuenchUniformConfig, QuenchDisorderConfig, ThermalConfig
]

MODELS: Dict[str, Type[BaseModel]] = {
    GROUND: GroundConfig,
    QUENCH_UNIFORM: QuenchUniformConfig,
    QUENCH_DISORDER: QuenchDisorderConfig,
    THERMAL_BOUND: ThermalConfig,
    PHASE_DIAGRAM: PhaseDiagramConfig,
}


class ExperimentConfig(BaseModel):
    """One fully resolved run."""

    model_config = ConfigDict(extra="forbid")

    experiment: str
    parameters: ParameterModel
    output_dir: Path = Path("results")
    seed: int = Field(0, ge=0, lt=2**64)
    threads: int = Field(1, ge=1)

    def to_dict(self) -> Dict[str, Any]:
        """Everything that determines the results; the output directory does not."""
        return {
            "experiment": self.experiment,
            "parameters": self.parameters.model_dump(),
            "seed": self.seed,
            "threads": self.threads,
        }


def load_config_file(path: Optional[Path]) -> Dict[str, Any]:
    """Load a flat YAML mapping; a missing path means no file."""
    if path is None:
        return {}
    if not path.exists():
        raise ConfigError(f"Config file does not exist: {path}")
    try:
        with open(path) as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError(f"Cannot parse {path}: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must hold a key-value mapping")
    return data


def parse_overrides(overrides: Sequence[str]) -> Dict[str, Any]:
    """Parse repeated ``key=value`` strings; values are YAML scalars or lists."""
    parsed: Dict[str, Any] = {}
    for item in overrides:
        key, sep, raw = item.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"Malformed --set '{item}', expected key=value")
        try:
            parsed[key] = yaml.safe_load(raw)
        except yaml.YAMLError as e:
            raise ConfigError(f"Cannot parse value of --set {key}: {e}") from e
    return parsed


def resolve_config(
    experiment: str,
    config_path: Optional[Path] = None,
    overrides: Sequence[str] = (),
    output_dir: Optional[Path] = None,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
) -> ExperimentConfig:
    """
    Merge defaults, config file, --set overrides and dedicated flags, in that order.

    Raises:
        ConfigError: Unknown experiment, unknown keys or invalid values
    """
    if experiment not in MODELS:
        raise ConfigError(f"Unknown experiment '{experiment}', expected one of {sorted(MODELS)}")

    values = load_config_file(config_path)
    values.update(parse_overrides(overrides))
    run_values = {key: values.pop(key) for key in RUN_KEYS if key in values}
    if output_dir is not None:
        run_values["output_dir"] = output_dir
    if seed is not None:
        run_values["seed"] = seed
    if threads is not None:
        run_values["threads"] = threads

    try:
        parameters = MODELS[experiment](**values)
        return ExperimentConfig(experiment=experiment, parameters=parameters, **run_values)
    except ValidationError as e:
        raise ConfigError(f"Invalid {experiment} config: {e}") from e


def show_config_command(
    experiment: str,
    config_path: Optional[Path] = None,
    overrides: Sequence[str] = (),
    format_type: str = "table",
) -> None:
    """Show the resolved configuration of an experiment."""
    config = resolve_config(experiment, config_path, overrides)
    resolved = config.to_dict()
    resolved["output_dir"] = str(config.output_dir)

    if format_type == "json":
        console.print(json.dumps(resolved, indent=2, sort_keys=True))
        return

    table = Table(title=f"[bold]{experiment} configuration[/bold]", show_header=True)
    table.add_column("Key", style="bold cyan")
    table.add_column("Value", style="green")
    for key, value in resolved["parameters"].items():
        table.add_row(key, str(value))
    for key in RUN_KEYS:
        table.add_row(key, str(resolved[key]), style="dim")
    table.add_row("config file", str(config_path) if config_path else "[dim]none[/dim]")
    console.print(table)
