"""
Run artifacts: CSV tables, the run manifest and optional SVG figures.

Every CSV starts with a ``#`` header block carrying the tool version, the
experiment and the SHA-256 of the manifest, so a table can always be traced
back to the configuration that produced it.
"""

import csv
import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import yaml
from matplotlib import rc_context
from matplotlib.figure import Figure

from . import __version__
from .formatting import format_value, parse_value

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.yaml"
SVG_HASH_SALT = "toricqfi"


@dataclass(frozen=True)
class RunHeader:
    """Provenance lines written at the top of every CSV."""

    experiment: str
    manifest_sha256: str
    version: str = __version__

    def lines(self) -> List[str]:
        return [
            f"# toricqfi {self.version}",
            f"# experiment: {self.experiment}",
            f"# manifest_sha256: {self.manifest_sha256}",
        ]


def build_manifest(resolved: Dict[str, Any], extra: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Version, resolved configuration and run metadata; never timestamps."""
    manifest: Dict[str, Any] = {"version": __version__}
    manifest.update(resolved)
    if extra:
        manifest.update(extra)
    return manifest


def manifest_digest(manifest: Dict[str, Any]) -> str:
    """SHA-256 of the canonical JSON form of ``manifest``."""
    canonical = json.dumps(manifest, sort_keys=True)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def write_manifest(output_dir: Path, manifest: Dict[str, Any]) -> RunHeader:
    """Write manifest.yaml and return the header for the run's tables."""
    output_dir.mkdir(parents=True, exist_ok=True)
    path = output_dir / MANIFEST_NAME
    with open(path, "w") as f:
        yaml.safe_dump(manifest, f, default_flow_style=False, sort_keys=True)
    logger.debug("Wrote %s", path)
    return RunHeader(experiment=str(manifest.get("experiment", "")), manifest_sha256=manifest_digest(manifest))


def write_table(
    path: Path, header: RunHeader, columns: Sequence[str], rows: Iterable[Sequence[Any]]
) -> Path:
    """Write one CSV table with the header block and full-precision values."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        for line in header.lines():
            f.write(line + "\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            if len(row) != len(columns):
                raise ValueError(f"Row has {len(row)} cells, {path.name} has {len(columns)} columns")
            writer.writerow([format_value(cell) for cell in row])
    logger.debug("Wrote %s", path)
    return path


def read_table(path: Path) -> Tuple[Dict[str, str], Dict[str, np.ndarray]]:
    """
    Read a table written by ``write_table``.

    Returns:
        (header fields, column name -> array). Numeric columns come back as
        int or float arrays holding exactly the written values.
    """
    header: Dict[str, str] = {}
    with open(path, newline="") as f:
        lines = f.read().splitlines()

    body_start = 0
    for body_start, line in enumerate(lines):
        if not line.startswith("#"):
            break
        text = line[1:].strip()
        key, sep, value = text.partition(": ")
        if sep:
            header[key] = value
        elif text.startswith("toricqfi "):
            header["version"] = text.split(" ", 1)[1]

    reader = csv.reader(lines[body_start:])
    columns = next(reader)
    cells: List[List[Any]] = [[] for _ in columns]
    for row in reader:
        for i, text in enumerate(row):
            cells[i].append(parse_value(text))
    return header, {name: np.array(values) for name, values in zip(columns, cells)}


def write_line_plot(
    path: Path,
    series: Sequence[Tuple[str, Sequence[float], Sequence[float]]],
    xlabel: str,
    ylabel: str,
    title: str = "",
    log_x: bool = False,
    log_y: bool = False,
) -> Path:
    """Static SVG line chart of (label, x, y) series; display only."""
    with rc_context({"svg.hashsalt": SVG_HASH_SALT}):
        figure = Figure(figsize=(6.0, 4.0))
        axes = figure.add_subplot()
        for label, x, y in series:
            axes.plot(x, y, marker=".", label=label)
        axes.set_xlabel(xlabel)
        axes.set_ylabel(ylabel)
        if title:
            axes.set_title(title)
        if log_x:
            axes.set_xscale("log")
        if log_y:
            axes.set_yscale("log")
        if len(series) > 1:
            axes.legend()
        figure.tight_layout()
        figure.savefig(path, format="svg", metadata={"Date": None})
    logger.debug("Wrote %s", path)
    return path
