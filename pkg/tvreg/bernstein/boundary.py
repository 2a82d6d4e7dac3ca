"""Boundary behaviour of the weighted field z = w exp(gamma d)."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from tvreg.bernstein import stencils
from tvreg.bernstein.quantities import squared_gradient, weighted_field
from tvreg.core.fields import ScalarField
from tvreg.core.grid import Grid, corner_cells
from tvreg.core.operators import boundary_normal_derivative, distance_field

logger = logging.getLogger("tvreg.bernstein")

# cells this many spacings from the boundary sample the distance Hessian
_GAMMA_BAND = 3.0


def _largest_eigenvalue(hess: list[list[np.ndarray]]) -> np.ndarray:
    if len(hess) == 1:
        return hess[0][0]
    a, b, c = hess[0][0], hess[0][1], hess[1][1]
    return 0.5 * (a + c) + np.sqrt(0.25 * (a - c) ** 2 + b * b)


def gamma_bound(grid: Grid) -> float:
    """Discrete ``2 ||(D^2 d)_+||`` near the boundary; 0 on convex grids."""
    if grid.convex:
        return 0.0
    d = distance_field(grid)
    band = grid.core_mask(1) & (d.values <= _GAMMA_BAND * max(grid.h))
    if not band.any():
        return 0.0
    top = _largest_eigenvalue(stencils.hessian(d.values, grid))
    value = 2.0 * float(np.max(np.maximum(top[band], 0.0)))
    logger.debug("gamma bound for %s: %g", grid.grid_id, value)
    return value


@dataclass(frozen=True)
class BoundarySignReport:
    """Outward normal differences of ``z`` on the boundary cells.

    ``derivatives[j]`` belongs to ``grid.boundary_cells[j]``; cells listed in
    ``excluded`` do not enter ``max_derivative``.
    """
    gamma: float
    derivatives: np.ndarray
    max_derivative: float
    argmax: tuple[int, ...] | None
    excluded: tuple[tuple[int, ...], ...]
    z_argmax: tuple[int, ...]
    z_argmax_on_boundary: bool


def boundary_sign_check(u: ScalarField, gamma: float, exclude_corners: bool = True) -> BoundarySignReport:
    """Max over boundary cells of the outward difference of ``z``.

    Reentrant-corner cells are left out when ``exclude_corners`` is set and
    reported in ``excluded``.
    """
    grid = u.grid
    z = weighted_field(squared_gradient(u), distance_field(grid), gamma)
    derivs = boundary_normal_derivative(z)
    excluded = corner_cells(grid) if exclude_corners else ()
    skip = set(excluded)
    keep = np.array([cell.index not in skip for cell in grid.boundary_cells], dtype=bool)
    if excluded:
        logger.warning("boundary sign check on %s skips %d corner cells", grid.grid_id, len(excluded))
    if keep.any():
        masked = np.where(keep, derivs, -np.inf)
        j = int(np.argmax(masked))
        peak = float(masked[j])
        argmax = grid.boundary_cells[j].index
    else:
        peak, argmax = 0.0, None
    vals = np.where(grid.mask, z.values, -np.inf)
    z_arg = tuple(int(i) for i in np.unravel_index(int(np.argmax(vals)), grid.shape))
    on_boundary = any(cell.index == z_arg for cell in grid.boundary_cells)
    return BoundarySignReport(
        gamma=float(gamma),
        derivatives=derivs,
        max_derivative=peak,
        argmax=argmax,
        excluded=excluded,
        z_argmax=z_arg,
        z_argmax_on_boundary=on_boundary,
    )
