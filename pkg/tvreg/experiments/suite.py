"""Suite execution: grid, sources, solves, oracles and checks for one config."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any

from tvreg import __version__
from tvreg.checks.estimates import (
    TAG_BOUNDARY_SIGN,
    TAG_BV,
    TAG_GLOBAL_LIPSCHITZ,
    TAG_LOCAL_LIPSCHITZ,
    TAG_LP_CONTRACTION,
    TAG_MAX_PRINCIPLE,
    TAG_REGULARIZED_BV,
    TAG_SOBOLEV,
    TAG_TV_ENERGY,
    check_boundary_sign,
    check_bv_1d,
    check_global_lipschitz,
    check_local_lipschitz,
    check_lp_contraction,
    check_max_principle,
    check_regularized_bv,
    check_sobolev,
    check_tv_energy_bound,
)
from tvreg.checks.fitting import LINEAR_TAGS, MIN_REPORTS, fit_constants
from tvreg.checks.report import EstimateReport, LocalWindow, Provenance
from tvreg.checks.sweeps import mu_invariance_sweep, rof_oracle
from tvreg.core.fields import ScalarField
from tvreg.core.grid import Grid, disc, interval, lshape, rectangle
from tvreg.experiments.config import ExperimentConfig
from tvreg.experiments.pgm import load_pgm
from tvreg.experiments.sources import generate_source
from tvreg.runtime.workers import ordered_map
from tvreg.solver.lagged import SolveTrace, continuation_solve

logger = logging.getLogger("tvreg.suite")

STAGES = ("grid", "source", "solve", "oracle", "checks", "mu-sweep", "fit", "refinement")

Table = tuple[tuple[str, ...], list[tuple[Any, ...]]]


class StageError(RuntimeError):
    """A suite stage failed; ``stage`` names it and the cause is chained."""

    def __init__(self, stage: str, message: str) -> None:
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


@dataclass
class ReportBundle:
    """Everything one suite run produced, in emission order."""
    config: ExperimentConfig
    reports: list[EstimateReport] = field(default_factory=list)
    traces: list[tuple[str, SolveTrace]] = field(default_factory=list)
    fields: dict[str, ScalarField] = field(default_factory=dict)
    plotdata: dict[str, Table] = field(default_factory=dict)
    solves_converged: bool = True
    version: str = __version__

    @property
    def failed_reports(self) -> list[EstimateReport]:
        return [r for r in self.reports if r.failed]

    @property
    def ok(self) -> bool:
        return self.solves_converged and not self.failed_reports

    @property
    def exit_code(self) -> int:
        return 0 if self.ok else 1


def build_domain(config: ExperimentConfig) -> Grid:
    if config.domain == "interval":
        return interval(config.n, config.length)
    if config.domain == "rectangle":
        ny = config.ny if config.ny is not None else config.n
        ly = config.ly if config.ly is not None else config.length
        return rectangle(config.n, ny, config.length, ly)
    if config.domain == "lshape":
        return lshape(config.n, config.length)
    return disc(config.n, config.length)


def _stage(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, f"{type(exc).__name__}: {exc}") from exc


@dataclass
class _SourceRun:
    run_id: str
    source: ScalarField
    u: ScalarField
    reports: list[EstimateReport]
    traces: list[tuple[str, SolveTrace]]
    converged: bool
    r_rows: list[tuple[Any, ...]]
    stage_rows: list[tuple[Any, ...]]


def _window_center(config: ExperimentConfig, grid: Grid) -> tuple[float, ...]:
    if config.window_center is not None:
        return config.window_center
    return tuple(0.5 * length for length in grid.lengths)


def _run_checks(config: ExperimentConfig, grid: Grid, run_id: str, u: ScalarField, f: ScalarField,
                lam: float, eps: float, delta: float) -> tuple[list[EstimateReport], list[tuple[Any, ...]]]:
    mu_equiv = 1.0 / lam
    prov = Provenance(run_id=run_id, mu=config.mu, eps=eps, delta=delta, lam=lam)
    reports: list[EstimateReport] = []
    r_rows: list[tuple[Any, ...]] = []
    for tag in config.requested_checks(grid.dim, grid.convex):
        if tag == TAG_GLOBAL_LIPSCHITZ:
            reports.append(check_global_lipschitz(u, f, lam, config.gradient_slack, prov))
        elif tag == TAG_SOBOLEV:
            reports.extend(check_sobolev(u, f, p, lam, config.gradient_slack, prov) for p in config.sobolev_p)
        elif tag == TAG_LOCAL_LIPSCHITZ:
            center = _window_center(config, grid)
            for radius in config.window_radii:
                window = LocalWindow(center, radius, config.window_rho)
                report = check_local_lipschitz(u, f, window, lam, mu_equiv, config.gradient_slack, prov)
                reports.append(report)
                r_rows.append((run_id, radius, config.window_rho, report.lhs, report.rhs, report.K))
        elif tag == TAG_BV:
            reports.append(check_bv_1d(u, f, lam, config.tv_slack, prov))
        elif tag == TAG_MAX_PRINCIPLE:
            reports.append(check_max_principle(u, f, lam, prov))
        elif tag == TAG_LP_CONTRACTION:
            reports.extend(check_lp_contraction(u, f, p, lam, config.gradient_slack, prov) for p in config.lp_p)
        elif tag == TAG_REGULARIZED_BV:
            reports.append(check_regularized_bv(u, f, eps, lam, config.tv_slack, prov))
        elif tag == TAG_TV_ENERGY:
            reports.append(check_tv_energy_bound(u, f / lam, mu_equiv, prov))
        elif tag == TAG_BOUNDARY_SIGN:
            reports.append(check_boundary_sign(u, None, config.boundary_factor, prov))
    if len(config.window_radii) >= 3 and any(r.theorem_tag == TAG_LOCAL_LIPSCHITZ for r in reports):
        fit = fit_constants(reports, TAG_LOCAL_LIPSCHITZ, min_reports=3)
        reports.append(fit.to_report(run_id))
    return reports, r_rows


def _run_source(config: ExperimentConfig, grid: Grid, index: int) -> _SourceRun:
    run_id = config.run_id if config.corpus == 1 else f"{config.run_id}-{index}"
    seed = None if config.seed is None else config.seed + index
    if config.source == "pgm":
        data = _stage("source", load_pgm, config.image)
    else:
        data = _stage("source", generate_source, config.source, grid, config.source_params, seed).field
    cfg = _stage("solve", config.solver_config)
    # mu runs take the source as data g of the mu-family
    f = cfg.source_from_data(data) if config.mu is not None else data
    oracle = _stage("oracle", rof_oracle, f / cfg.lam, 1.0 / cfg.lam, config.oracle)
    result = _stage("solve", continuation_solve, f, cfg, oracle)
    last = result.stages[-1]
    reports, r_rows = _stage("checks", _run_checks, config, grid, run_id, result.u, f, cfg.lam, last.eps, last.delta)
    traces = [(f"{run_id}/stage-{k}", stage.trace) for k, stage in enumerate(result.stages)]
    stage_rows = []
    if oracle is not None:
        stage_rows = [
            (run_id, k, stage.eps, stage.delta, stage.oracle_distance, stage.relative_oracle_distance)
            for k, stage in enumerate(result.stages)
        ]
    logger.info(
        "%s: %d reports, %d failed, converged=%s",
        run_id, len(reports), sum(r.failed for r in reports), result.converged,
    )
    return _SourceRun(run_id, f, result.u, reports, traces, result.converged, r_rows, stage_rows)


def run_suite(config: ExperimentConfig) -> ReportBundle:
    """Run every stage of ``config`` and collect the results.

    Raises:
        StageError: a stage failed; ``stage`` is one of :data:`STAGES`.
    """
    if config.source == "pgm":
        grid = _stage("grid", lambda: load_pgm(config.image).grid)
    else:
        grid = _stage("grid", build_domain, config)
    logger.info("suite %s on %s, %d source(s)", config.run_id, grid.grid_id, config.corpus)

    runs = ordered_map(lambda i: _run_source(config, grid, i), range(config.corpus))

    bundle = ReportBundle(config=config)
    r_rows: list[tuple[Any, ...]] = []
    stage_rows: list[tuple[Any, ...]] = []
    for k, run in enumerate(runs):
        bundle.reports.extend(run.reports)
        bundle.traces.extend(run.traces)
        bundle.solves_converged = bundle.solves_converged and run.converged
        suffix = "" if config.corpus == 1 else f"-{k}"
        bundle.fields[f"source{suffix}"] = run.source
        bundle.fields[f"solution{suffix}"] = run.u
        r_rows.extend(run.r_rows)
        stage_rows.extend(run.stage_rows)
    if r_rows:
        bundle.plotdata["r_sweep"] = (("run_id", "R", "rho", "sup_grad_u", "sup_grad_f_over_lambda", "K"), r_rows)
    if stage_rows:
        bundle.plotdata["continuation"] = (
            ("run_id", "stage", "eps", "delta", "oracle_distance", "relative_oracle_distance"), stage_rows,
        )

    if config.corpus >= MIN_REPORTS:
        for tag in LINEAR_TAGS:
            tagged = [r for r in bundle.reports if r.theorem_tag == tag]
            by_exponent: dict[Any, list[EstimateReport]] = {}
            for r in tagged:
                by_exponent.setdefault(r.p, []).append(r)
            for group in by_exponent.values():
                if len(group) >= MIN_REPORTS:
                    fit = _stage("fit", fit_constants, group, tag)
                    bundle.reports.append(fit.to_report(config.run_id))
    elif config.corpus > 1:
        logger.warning("corpus of %d is below %d sources; no constant fits", config.corpus, MIN_REPORTS)

    if config.mu_sweep:
        cfg = config.solver_config()
        g = runs[0].source / cfg.lam
        sweep = _stage(
            "mu-sweep", mu_invariance_sweep, g, config.mu_sweep,
            cfg=cfg, slack=config.gradient_slack, run_id=f"{config.run_id}-mu", oracle=config.oracle,
        )
        bundle.reports.extend(sweep.reports)
        bundle.solves_converged = bundle.solves_converged and sweep.converged
        bundle.plotdata["mu_sweep"] = (
            ("mu", "lambda", "tv", "energy", "converged", "oracle_distance"),
            [(r.mu, r.lam, r.tv, r.energy, r.converged, r.oracle_distance) for r in sweep.rows],
        )
    if not bundle.solves_converged:
        logger.warning("suite %s has non-converged solves", config.run_id)
    return bundle
