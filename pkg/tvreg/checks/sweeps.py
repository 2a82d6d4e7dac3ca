"""mu-family sweeps: the same data solved at several scales."""

from __future__ import annotations

import dataclasses
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

from tvreg.cache import cached_dual_projection, cached_taut_string
from tvreg.checks.estimates import (
    GRADIENT_SLACK,
    TV_SLACK,
    check_bv_1d,
    check_global_lipschitz,
    check_max_principle,
    check_sobolev,
)
from tvreg.checks.report import EstimateReport, Provenance, make_report
from tvreg.core.fields import ScalarField
from tvreg.core.grid import Grid
from tvreg.core.operators import require_same_grid, total_variation
from tvreg.reference.energy import energy_tv
from tvreg.runtime.workers import ordered_map
from tvreg.solver.config import SolverConfig, geometric_schedule
from tvreg.solver.lagged import ContinuationResult, continuation_solve

logger = logging.getLogger("tvreg.checks")

TAG_TV_MONOTONE = "tv-monotone"
ORACLE_KINDS = ("auto", "dual")


def default_sweep_config() -> SolverConfig:
    return SolverConfig(schedule=geometric_schedule(1e-1, 1e-4, 4))


@dataclass(frozen=True)
class MuSweepRow:
    mu: float
    lam: float
    tv: float
    energy: float
    converged: bool
    oracle_distance: float | None


@dataclass(frozen=True)
class MuSweepResult:
    rows: tuple[MuSweepRow, ...]
    reports: tuple[EstimateReport, ...]
    solutions: tuple[ScalarField, ...]

    @property
    def converged(self) -> bool:
        return all(row.converged for row in self.rows)

    def rhs_values(self, tag: str) -> list[float]:
        return [r.rhs for r in self.reports if r.theorem_tag == tag]


def outer_budget(base: SolverConfig, lam: float) -> int:
    """Outer iteration cap for coefficient ``lam``: ``max_outer`` per unit of ``lam``, at least one unit.

    The lagged-diffusivity contraction weakens as ``lam`` grows.
    """
    return base.max_outer * max(1, math.ceil(lam))


def rof_oracle(g: ScalarField, mu: float, kind: str = "auto") -> ScalarField | None:
    """Memoized ROF minimizer of data ``g`` at weight ``mu``.

    ``auto`` uses the taut string on 1D grids and gives no oracle elsewhere;
    ``dual`` runs the dual projection on any grid.
    """
    if kind not in ORACLE_KINDS:
        raise ValueError(f"oracle must be one of {ORACLE_KINDS}, got {kind!r}")
    if kind == "dual":
        state = cached_dual_projection(g, mu)
        if not state.converged:
            logger.warning("dual projection oracle stopped at gap %.3e after %d iterations", state.gap, state.iterations)
        return state.u
    return cached_taut_string(g, mu) if g.grid.dim == 1 else None


def _solve_at(g: ScalarField, mu: float, base: SolverConfig, oracle_kind: str) -> tuple[ContinuationResult, SolverConfig]:
    cfg = dataclasses.replace(base, mu=mu, max_outer=outer_budget(base, 1.0 / mu))
    oracle = rof_oracle(g, mu, oracle_kind)
    result = continuation_solve(cfg.source_from_data(g), cfg, oracle=oracle)
    return result, cfg


def mu_invariance_sweep(
    g: ScalarField,
    mu_values: Sequence[float],
    grid: Grid | None = None,
    cfg: SolverConfig | None = None,
    slack: float = GRADIENT_SLACK,
    run_id: str = "mu-sweep",
    oracle: str = "auto",
) -> MuSweepResult:
    """Solve the mu-family for data ``g`` at every ``mu`` and check each solution.

    Each solve uses ``lam = 1/mu`` and source ``g/mu``. The checks compare
    the solution with ``g`` itself, so their right-hand sides do not depend
    on ``mu``. A final ``tv-monotone`` row checks that ``TV(u_mu)`` does not
    grow with ``mu``. Each solve gets the outer budget of :func:`outer_budget`.
    """
    if grid is not None:
        require_same_grid(grid, g.grid)
    grid = g.grid
    mus = [float(m) for m in mu_values]
    if not mus:
        raise ValueError("mu sweep needs at least one mu")
    if any(not m > 0 for m in mus):
        raise ValueError(f"every mu must be > 0, got {mus}")
    base = cfg or default_sweep_config()
    if oracle not in ORACLE_KINDS:
        raise ValueError(f"oracle must be one of {ORACLE_KINDS}, got {oracle!r}")

    solved = ordered_map(lambda mu: _solve_at(g, mu, base, oracle), mus)

    rows: list[MuSweepRow] = []
    reports: list[EstimateReport] = []
    solutions: list[ScalarField] = []
    for mu, (result, solve_cfg) in zip(mus, solved):
        u = result.u
        last = result.stages[-1]
        prov = Provenance(run_id=run_id, mu=mu, eps=last.eps, delta=last.delta, lam=solve_cfg.lam)
        reports.append(check_global_lipschitz(u, g, 1.0, slack, prov))
        if grid.convex:
            reports.append(check_sobolev(u, g, 2, 1.0, slack, prov))
        if grid.dim == 1:
            reports.append(check_bv_1d(u, g, 1.0, TV_SLACK, prov))
        reports.append(check_max_principle(u, g, 1.0, prov))
        tv = total_variation(u)
        rows.append(MuSweepRow(mu, solve_cfg.lam, tv, energy_tv(u, g, mu), result.converged, last.oracle_distance))
        solutions.append(u)
        logger.info("mu=%g: TV(u)=%.6g, converged=%s", mu, tv, result.converged)

    ordered = sorted(rows, key=lambda row: row.mu)
    increase = max((b.tv - a.tv for a, b in zip(ordered, ordered[1:])), default=0.0)
    scale = max(row.tv for row in rows)
    reports.append(
        make_report(
            TAG_TV_MONOTONE, max(0.0, increase), TV_SLACK * scale, 0.0, grid,
            Provenance(run_id=run_id),
        )
    )
    return MuSweepResult(tuple(rows), tuple(reports), tuple(solutions))
