"""Report emission: CSV tables, ASCII field grids and the config echo."""

from __future__ import annotations

import csv
import logging
import math
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

import numpy as np

from tvreg.checks.report import CSV_COLUMNS, EstimateReport
from tvreg.core.fields import ScalarField
from tvreg.experiments.suite import ReportBundle

logger = logging.getLogger("tvreg.experiments")

TRACE_COLUMNS = (
    "trace", "eps", "delta", "iteration", "energy", "residual", "inner_iterations", "converged", "status",
)


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_table(path: Path, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return path


def write_reports(path: Path, reports: Iterable[EstimateReport]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for report in reports:
            writer.writerow(report.to_row())
    return path


def read_reports(path: str | Path) -> list[EstimateReport]:
    with Path(path).open("r", encoding="utf-8", newline="") as handle:
        return [EstimateReport.from_row(row) for row in csv.DictReader(handle)]


def write_field(path: Path, u: ScalarField) -> Path:
    """One value per line in C order over the bounding box.

    Header lines: ``# dims``, ``# h``, ``# kind``. Exterior cells of masked
    grids are written as ``nan``.
    """
    grid = u.grid
    values = np.where(grid.mask, u.values, np.nan).ravel()
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        handle.write("# dims " + " ".join(str(n) for n in grid.shape) + "\n")
        handle.write("# h " + " ".join(repr(float(h)) for h in grid.h) + "\n")
        handle.write(f"# kind {grid.kind}\n")
        for v in values:
            handle.write(("nan" if math.isnan(v) else repr(float(v))) + "\n")
    return path


def read_field(path: str | Path) -> tuple[tuple[int, ...], tuple[float, ...], np.ndarray]:
    """Inverse of :func:`write_field`: shape, spacing and the value array."""
    shape: tuple[int, ...] = ()
    h: tuple[float, ...] = ()
    values: list[float] = []
    with Path(path).open("r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line.startswith("# dims"):
                shape = tuple(int(t) for t in line.split()[2:])
            elif line.startswith("# h"):
                h = tuple(float(t) for t in line.split()[2:])
            elif line and not line.startswith("#"):
                values.append(float(line))
    if not shape or int(np.prod(shape)) != len(values):
        raise ValueError(f"{path}: header and value count disagree")
    return shape, h, np.array(values).reshape(shape)


def _trace_rows(bundle: ReportBundle) -> list[tuple[Any, ...]]:
    rows = []
    for label, trace in bundle.traces:
        last = len(trace.energies) - 1
        for k, (energy, residual, inner) in enumerate(zip(trace.energies, trace.residuals, trace.inner_iterations)):
            rows.append((
                label, trace.eps, trace.delta, k, energy, residual, inner,
                trace.converged if k == last else "", trace.status if k == last else "",
            ))
    return rows


def emit_reports(bundle: ReportBundle, directory: str | Path) -> list[Path]:
    """Write the bundle under ``directory``; returns the written paths in order.

    Layout: ``reports.csv``, ``traces.csv``, ``config.txt``,
    ``fields/<name>.txt`` and ``plotdata/<table>.csv``.
    """
    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    written = [
        write_reports(root / "reports.csv", bundle.reports),
        write_table(root / "traces.csv", TRACE_COLUMNS, _trace_rows(bundle)),
    ]
    config_path = root / "config.txt"
    config_path.write_text(f"# tvreg {bundle.version}\n" + bundle.config.to_text(), encoding="utf-8")
    written.append(config_path)
    for name, u in sorted(bundle.fields.items()):
        written.append(write_field(root / "fields" / f"{name}.txt", u))
    for name, (columns, rows) in sorted(bundle.plotdata.items()):
        written.append(write_table(root / "plotdata" / f"{name}.csv", columns, rows))
    logger.info("wrote %d files to %s", len(written), root)
    return written
