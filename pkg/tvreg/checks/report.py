"""Estimate reports, local windows and their CSV row form."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from tvreg.core.grid import Grid

CSV_COLUMNS = (
    "run_id", "theorem_tag", "lhs", "rhs", "slack", "pass",
    "c0", "c1", "C", "K", "grid_id", "mu", "eps", "delta", "lambda", "p", "R", "rho",
)

_AUTO = object()


class HypothesisError(ValueError):
    """A check refused to run because the estimate does not apply (grid, exponent)."""


class WindowError(ValueError):
    """A local window leaves the domain."""


class CorpusError(ValueError):
    """A fit corpus is too small or mixes grids."""


def verdict(lhs: float, rhs: float, slack: float) -> bool:
    return bool(lhs <= rhs * (1.0 + slack))


@dataclass(frozen=True)
class Provenance:
    """Run context stamped onto every report."""
    run_id: str = ""
    mu: float | None = None
    eps: float | None = None
    delta: float | None = None
    lam: float | None = None


@dataclass(frozen=True)
class EstimateReport:
    """One inequality ``lhs <= rhs * (1 + slack)``.

    ``passed`` is None when the verdict is deferred to a corpus fit.
    """
    run_id: str
    theorem_tag: str
    lhs: float
    rhs: float
    slack: float
    passed: bool | None
    grid_id: str
    c0: float | None = None
    c1: float | None = None
    C: float | None = None
    K: float | None = None
    mu: float | None = None
    eps: float | None = None
    delta: float | None = None
    lam: float | None = None
    p: float | None = None
    R: float | None = None
    rho: float | None = None

    @property
    def failed(self) -> bool:
        return self.passed is False

    def to_row(self) -> dict[str, str]:
        """CSV cells keyed by :data:`CSV_COLUMNS`; floats use ``repr``."""
        row = {
            "run_id": self.run_id,
            "theorem_tag": self.theorem_tag,
            "lhs": _cell(self.lhs),
            "rhs": _cell(self.rhs),
            "slack": _cell(self.slack),
            "pass": "" if self.passed is None else ("true" if self.passed else "false"),
            "c0": _cell(self.c0),
            "c1": _cell(self.c1),
            "C": _cell(self.C),
            "K": _cell(self.K),
            "grid_id": self.grid_id,
            "mu": _cell(self.mu),
            "eps": _cell(self.eps),
            "delta": _cell(self.delta),
            "lambda": _cell(self.lam),
            "p": _cell(self.p),
            "R": _cell(self.R),
            "rho": _cell(self.rho),
        }
        return row

    @classmethod
    def from_row(cls, row: dict[str, str]) -> EstimateReport:
        missing = [c for c in CSV_COLUMNS if c not in row]
        if missing:
            raise ValueError(f"report row is missing columns {missing}")
        flag = row["pass"].strip().lower()
        if flag not in ("", "true", "false"):
            raise ValueError(f"pass cell must be true, false or empty, got {row['pass']!r}")
        return cls(
            run_id=row["run_id"],
            theorem_tag=row["theorem_tag"],
            lhs=float(row["lhs"]),
            rhs=float(row["rhs"]),
            slack=float(row["slack"]),
            passed=None if flag == "" else flag == "true",
            grid_id=row["grid_id"],
            c0=_parse(row["c0"]),
            c1=_parse(row["c1"]),
            C=_parse(row["C"]),
            K=_parse(row["K"]),
            mu=_parse(row["mu"]),
            eps=_parse(row["eps"]),
            delta=_parse(row["delta"]),
            lam=_parse(row["lambda"]),
            p=_parse(row["p"]),
            R=_parse(row["R"]),
            rho=_parse(row["rho"]),
        )


def _cell(value: float | None) -> str:
    return "" if value is None else repr(float(value))


def _parse(cell: str) -> float | None:
    cell = cell.strip()
    return None if cell == "" else float(cell)


def make_report(
    tag: str,
    lhs: float,
    rhs: float,
    slack: float,
    grid: Grid,
    provenance: Provenance | None = None,
    *,
    passed: Any = _AUTO,
    lam: float | None = None,
    **extra: Any,
) -> EstimateReport:
    """Build a report, deciding ``passed`` from the inequality unless given.

    ``lam`` is the coefficient the inequality was evaluated with; a
    provenance ``lam`` takes precedence for the CSV column.
    """
    prov = provenance or Provenance()
    lhs, rhs = float(lhs), float(rhs)
    if passed is _AUTO:
        passed = verdict(lhs, rhs, slack)
    return EstimateReport(
        run_id=prov.run_id,
        theorem_tag=tag,
        lhs=lhs,
        rhs=rhs,
        slack=float(slack),
        passed=passed,
        grid_id=grid.grid_id,
        mu=prov.mu,
        eps=prov.eps,
        delta=prov.delta,
        lam=prov.lam if prov.lam is not None else lam,
        **extra,
    )


@dataclass(frozen=True)
class LocalWindow:
    """Concentric balls ``B_R(x0)`` and ``B_{(1+rho)R}(x0)``."""
    center: tuple[float, ...]
    radius: float
    rho: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if not self.radius > 0:
            raise WindowError(f"window radius must be > 0, got {self.radius}")
        if not self.rho > 0:
            raise WindowError(f"rho must be > 0, got {self.rho}")

    @property
    def outer_radius(self) -> float:
        return (1.0 + self.rho) * self.radius

    def ball(self, grid: Grid, radius: float) -> np.ndarray:
        """Cells whose centre lies within ``radius`` of the centre."""
        if len(self.center) != grid.dim:
            raise WindowError(f"window centre has {len(self.center)} coordinates, grid is {grid.dim}D")
        dist2 = sum((x - c) ** 2 for x, c in zip(grid.centers(), self.center))
        return dist2 <= radius * radius

    def validate(self, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
        """Inner and outer ball masks; both balls must sit inside the domain.

        Raises:
            WindowError: a ball crosses the box or covers exterior cells,
                or the inner ball holds no cell centre.
        """
        outer_r = self.outer_radius
        for c, length in zip(self.center, grid.lengths):
            if c - outer_r < 0 or c + outer_r > length or math.isnan(c):
                raise WindowError(
                    f"window at {self.center} with outer radius {outer_r:g} leaves the box of {grid.grid_id}"
                )
        inner = self.ball(grid, self.radius)
        outer = self.ball(grid, outer_r)
        if np.any(outer & ~grid.mask):
            raise WindowError(f"window at {self.center} covers exterior cells of {grid.grid_id}")
        if not inner.any():
            raise WindowError(f"window at {self.center} with radius {self.radius:g} holds no cell")
        return inner, outer
