"""Lagged-diffusivity solve of the regularized problem and its continuation in eps."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from tvreg.core.fields import ScalarField
from tvreg.core.operators import divergence_values, face_masks, gradient_values, require_same_grid
from tvreg.reference.energy import energy_regularized
from tvreg.runtime import metrics
from tvreg.solver.config import SolverConfig
from tvreg.solver.system import assemble_system, face_coefficients, linear_solve

logger = logging.getLogger("tvreg.solver")


@dataclass
class SolveTrace:
    """Per-outer-iteration history of one regularized solve.

    Entry 0 is the starting iterate (no linear solve).
    """
    eps: float
    delta: float
    energies: list[float] = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)
    inner_iterations: list[int] = field(default_factory=list)
    converged: bool = False
    status: str = "running"

    def record(self, energy: float, residual: float, inner: int) -> None:
        self.energies.append(float(energy))
        self.residuals.append(float(residual))
        self.inner_iterations.append(int(inner))

    @property
    def outer_iterations(self) -> int:
        return max(0, len(self.energies) - 1)

    @property
    def total_inner_iterations(self) -> int:
        return int(sum(self.inner_iterations))

    def is_monotone(self, slack: float = 1e-10) -> bool:
        return all(b <= a + slack for a, b in zip(self.energies, self.energies[1:]))

    def to_dict(self) -> dict[str, Any]:
        return {
            "eps": self.eps,
            "delta": self.delta,
            "energies": list(self.energies),
            "residuals": list(self.residuals),
            "innerIterations": list(self.inner_iterations),
            "converged": self.converged,
            "status": self.status,
        }


def nonlinear_residual(u: ScalarField, f: ScalarField, cfg: SolverConfig) -> ScalarField:
    """``-delta Lap u - div(grad u / sqrt(eps + |grad u|^2)) + lam u - f`` per cell."""
    require_same_grid(u.grid, f.grid)
    grid = u.grid
    masks = face_masks(grid)
    coeffs = face_coefficients(u, cfg.eps, float(cfg.delta), cfg.face_gradient)
    grads = gradient_values(u.values, grid, masks)
    flux = [a * g for a, g in zip(coeffs, grads)]
    return ScalarField(grid, -divergence_values(flux, grid) + cfg.lam * u.values - f.values)


def _residual_scale(f: ScalarField, lam: float) -> float:
    peak = float(np.max(np.abs(f.interior()))) if f.grid.n_interior else 0.0
    return max((1.0 + lam) * peak, np.finfo(float).tiny)


def _mean_corrected(v: ScalarField, f: ScalarField, lam: float) -> ScalarField:
    """Shift by the constant that restores ``lam * sum(v) = sum(f)``.

    Constants lie in the kernel of the flux terms, so this is the exact
    minimizer of the frozen quadratic along the constant direction.
    """
    vals = v.interior()
    shift = (float(np.sum(f.interior())) - lam * float(np.sum(vals))) / (lam * vals.size)
    return v + shift


def solve_regularized(
    f: ScalarField,
    cfg: SolverConfig,
    u0: ScalarField | None = None,
) -> tuple[ScalarField, SolveTrace]:
    """Solve the regularized Neumann problem by lagged diffusivity.

    Each step freezes ``a = delta + (eps + |grad u_k|^2)^(-1/2)`` and solves
    ``-div(a grad u) + lam u = f`` for ``u_{k+1}``. Convergence is declared
    when ``||residual||_inf <= tol_outer * (1 + lam) ||f||_inf``.

    Args:
        f: source term.
        cfg: solver parameters; ``cfg.eps`` and ``cfg.delta`` are used, the
            schedule is ignored.
        u0: starting iterate, ``f / lam`` by default.

    Returns:
        The converged iterate, or the iterate with the smallest residual
        when ``max_outer`` runs out (``trace.converged`` is then False).
    """
    if u0 is not None:
        require_same_grid(u0.grid, f.grid)
    start = time.perf_counter()
    scale = _residual_scale(f, cfg.lam)
    trace = SolveTrace(eps=cfg.eps, delta=float(cfg.delta))

    def evaluate(v: ScalarField) -> tuple[float, float]:
        res = nonlinear_residual(v, f, cfg)
        rel = float(np.max(np.abs(res.interior()))) / scale
        return energy_regularized(v, f, cfg.eps, float(cfg.delta), cfg.lam), rel

    u = u0 if u0 is not None else f / cfg.lam
    energy, rel = evaluate(u)
    trace.record(energy, rel, 0)
    best_u, best_rel = u, rel

    if rel <= cfg.tol_outer:
        trace.converged = True
    else:
        for k in range(1, cfg.max_outer + 1):
            system = assemble_system(u, f, cfg)
            sol = linear_solve(system, f, tol=cfg.tol_inner, max_iter=cfg.max_inner, x0=u)
            u = _mean_corrected(sol.field, f, cfg.lam)
            energy, rel = evaluate(u)
            trace.record(energy, rel, sol.iterations)
            logger.debug(
                "outer %d: residual %.3e, energy %.12g, %d CG iterations",
                k, rel, energy, sol.iterations,
            )
            if rel < best_rel:
                best_u, best_rel = u, rel
            if rel <= cfg.tol_outer:
                trace.converged = True
                break

    trace.status = "converged" if trace.converged else "max_outer"
    if not trace.converged:
        logger.warning(
            "lagged diffusivity did not converge (eps=%g, delta=%g): best residual %.3e after %d steps",
            cfg.eps, cfg.delta, best_rel, trace.outer_iterations,
        )
        u = best_u
    metrics.record_solve(
        (time.perf_counter() - start) * 1000.0,
        outer_iterations=trace.outer_iterations,
        inner_iterations=trace.total_inner_iterations,
        converged=trace.converged,
    )
    return u, trace


@dataclass(frozen=True)
class StageResult:
    eps: float
    delta: float
    u: ScalarField
    trace: SolveTrace
    oracle_distance: float | None = None
    relative_oracle_distance: float | None = None


@dataclass(frozen=True)
class ContinuationResult:
    u: ScalarField
    stages: tuple[StageResult, ...]

    @property
    def converged(self) -> bool:
        return all(stage.trace.converged for stage in self.stages)

    @property
    def traces(self) -> tuple[SolveTrace, ...]:
        return tuple(stage.trace for stage in self.stages)

    def relative_distances(self) -> list[float | None]:
        return [stage.relative_oracle_distance for stage in self.stages]


def _l2(values: np.ndarray, weight: float) -> float:
    return float(np.sqrt(np.sum(values * values) * weight))


def continuation_solve(
    f: ScalarField,
    cfg: SolverConfig,
    oracle: ScalarField | None = None,
    u0: ScalarField | None = None,
) -> ContinuationResult:
    """Solve along ``cfg.stages()`` with warm starts.

    With ``oracle`` (the ROF minimizer for ``mu = 1/lam``, data ``f/lam``)
    every stage records its L2 distance to it, absolute and relative.
    """
    stages = cfg.stages()
    if not stages:
        raise ValueError("continuation needs a nonempty schedule")
    if oracle is not None:
        require_same_grid(oracle.grid, f.grid)
    weight = f.grid.cell_volume
    u = u0
    results: list[StageResult] = []
    for eps, delta in stages:
        logger.info("continuation stage eps=%g delta=%g", eps, delta)
        u, trace = solve_regularized(f, cfg.at_stage(eps, delta), u0=u)
        dist = rel = None
        if oracle is not None:
            dist = _l2(u.interior() - oracle.interior(), weight)
            ref = _l2(oracle.interior(), weight)
            rel = dist / ref if ref > 0 else dist
        results.append(StageResult(eps, delta, u, trace, dist, rel))
    result = ContinuationResult(u, tuple(results))
    if not result.converged:
        logger.warning("continuation finished with non-converged stages")
    return result
