"""Manufactured-solution refinement study of the solver and the Bernstein identities."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from tvreg.bernstein.cutoff import CutoffProfile
from tvreg.bernstein.manufactured import ClosedForm, closed_form, manufactured_source
from tvreg.bernstein.quantities import (
    cauchy_schwarz_gap,
    divergence_form_residual,
    eqw_residual,
    localized_inequality_check,
    subsolution_margin,
)
from tvreg.bernstein.stencils import STENCIL_WIDTH
from tvreg.checks.report import EstimateReport, Provenance, make_report
from tvreg.core.grid import Grid, interval, rectangle
from tvreg.experiments.config import ExperimentConfig
from tvreg.experiments.suite import ReportBundle, StageError
from tvreg.solver.config import SolverConfig
from tvreg.solver.lagged import nonlinear_residual, solve_regularized

logger = logging.getLogger("tvreg.experiments")

MIN_ORDER = 0.8
# values this small are rounding noise, not discretization error
NOISE_FLOOR = 1e-9

TAG_RESIDUAL_ORDER = "residual-order"
TAG_EQW_ORDER = "eqw-order"
TAG_SUBSOLUTION_REFINEMENT = "subsolution-refinement"

COLUMNS = (
    "n", "h", "residual", "residual_order", "eqw", "eqw_order", "div_form", "div_form_order",
    "subsolution", "localized", "cs_gap", "solve_error", "solve_error_order",
)


@dataclass(frozen=True)
class RefinementLevel:
    n: int
    h: float
    grid_id: str
    residual: float
    eqw: float
    div_form: float
    subsolution: float
    localized: float
    cs_gap: float
    solve_error: float
    solve_converged: bool


@dataclass
class MmsStudy:
    field_name: str
    levels: list[RefinementLevel] = field(default_factory=list)
    reports: list[EstimateReport] = field(default_factory=list)

    def orders(self, name: str) -> list[float | None]:
        """Observed orders ``log2(e_k / e_{k+1})``; None for the coarsest level."""
        values = [getattr(level, name) for level in self.levels]
        return [None] + [observed_order(a, b) for a, b in zip(values, values[1:])]

    @property
    def converged(self) -> bool:
        return all(level.solve_converged for level in self.levels)

    def table(self) -> tuple[tuple[str, ...], list[tuple[Any, ...]]]:
        res, eqw, div, err = (self.orders(n) for n in ("residual", "eqw", "div_form", "solve_error"))
        rows = [
            (
                lv.n, lv.h, lv.residual, res[k], lv.eqw, eqw[k], lv.div_form, div[k],
                lv.subsolution, lv.localized, lv.cs_gap, lv.solve_error, err[k],
            )
            for k, lv in enumerate(self.levels)
        ]
        return COLUMNS, rows


def observed_order(coarse: float, fine: float) -> float | None:
    if coarse <= NOISE_FLOOR or fine <= NOISE_FLOOR:
        return None
    return math.log2(coarse / fine)


def _sup(values: np.ndarray, cells: np.ndarray) -> float:
    return float(np.max(np.abs(values[cells]))) if cells.any() else 0.0


def _grid_for(u_star: ClosedForm, n: int) -> Grid:
    return interval(n) if u_star.dim == 1 else rectangle(n, n)


def _level(u_star: ClosedForm, n: int, eps: float, delta: float, lam: float) -> RefinementLevel:
    grid = _grid_for(u_star, n)
    u, f = manufactured_source(u_star, eps, delta, lam, grid)
    cfg = SolverConfig(eps=eps, delta=delta, lam=lam, tol_outer=1e-8)
    core = grid.core_mask(STENCIL_WIDTH)
    residual = _sup(nonlinear_residual(u, f, cfg).values, core)
    eqw = _sup(eqw_residual(u, f, eps, delta, lam).values, core)
    div = _sup(divergence_form_residual(u, f, eps, delta, lam).values, grid.core_mask(STENCIL_WIDTH + 1))
    margin = subsolution_margin(u, f, eps, delta, lam)
    center = tuple(0.5 * length for length in grid.lengths)
    cutoff = CutoffProfile(center, 0.2 * min(grid.lengths), 0.5)
    localized = localized_inequality_check(u, f, eps, delta, lam, cutoff)
    solved, trace = solve_regularized(f, cfg)
    error = _sup(solved.values - u.values, grid.mask)
    logger.info(
        "%s n=%d: residual %.3e, eqw %.3e, solve error %.3e", u_star.name, n, residual, eqw, error,
    )
    return RefinementLevel(
        n=n,
        h=grid.h_min,
        grid_id=grid.grid_id,
        residual=residual,
        eqw=eqw,
        div_form=div,
        subsolution=margin.max_violation,
        localized=localized.max_violation,
        cs_gap=cauchy_schwarz_gap(u),
        solve_error=error,
        solve_converged=trace.converged,
    )


def _order_report(tag: str, values: list[float], grid_id: str, prov: Provenance) -> EstimateReport:
    """Finest error against the coarsest shrunk at :data:`MIN_ORDER` per halving."""
    rhs = values[0] * 2.0 ** (-MIN_ORDER * (len(values) - 1))
    return EstimateReport(
        run_id=prov.run_id, theorem_tag=tag, lhs=values[-1], rhs=max(rhs, NOISE_FLOOR), slack=0.0,
        passed=values[-1] <= max(rhs, NOISE_FLOOR), grid_id=grid_id,
        eps=prov.eps, delta=prov.delta, lam=prov.lam, p=math.inf,
    )


def mms_study(
    field_name: str | ClosedForm,
    n0: int = 16,
    levels: int = 3,
    eps: float = 1.0,
    delta: float = 0.0,
    lam: float = 1.0,
    run_id: str = "mms",
) -> MmsStudy:
    """Evaluate residuals of a manufactured pair on ``n0, 2 n0, ...`` cells per axis.

    Reports: the nonlinear and identity residuals must decay at an observed
    order of at least :data:`MIN_ORDER`, and the subsolution violation must
    not grow.

    Raises:
        ValueError: unknown field, ``levels < 2`` or bad solver parameters.
    """
    if levels < 2:
        raise ValueError(f"a refinement study needs at least 2 levels, got {levels}")
    u_star = closed_form(field_name) if isinstance(field_name, str) else field_name
    study = MmsStudy(u_star.name)
    for k in range(levels):
        study.levels.append(_level(u_star, n0 * 2**k, eps, delta, lam))
    prov = Provenance(run_id=run_id, eps=eps, delta=delta, lam=lam)
    finest = study.levels[-1].grid_id
    study.reports.append(_order_report(TAG_RESIDUAL_ORDER, [lv.residual for lv in study.levels], finest, prov))
    study.reports.append(_order_report(TAG_EQW_ORDER, [lv.eqw for lv in study.levels], finest, prov))
    grid = _grid_for(u_star, study.levels[-1].n)
    coarse, fine = study.levels[0].subsolution, study.levels[-1].subsolution
    study.reports.append(
        make_report(TAG_SUBSOLUTION_REFINEMENT, fine, max(coarse, NOISE_FLOOR), 0.0, grid, prov, C=3.0)
    )
    return study


def run_mms(config: ExperimentConfig) -> ReportBundle:
    """The ``mms`` experiment of ``config`` as a bundle with an ``h_refinement`` table."""
    try:
        study = mms_study(
            config.mms_field, config.mms_n0, config.mms_levels,
            config.mms_eps, config.mms_delta, config.mms_lam, run_id=config.run_id,
        )
    except Exception as exc:
        raise StageError("refinement", f"{type(exc).__name__}: {exc}") from exc
    bundle = ReportBundle(config=config, reports=list(study.reports), solves_converged=study.converged)
    bundle.plotdata["h_refinement"] = study.table()
    return bundle
