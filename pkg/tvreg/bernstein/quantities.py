"""Bernstein quantities of the regularized problem: w = |grad u|^2 and the
elliptic identities and inequalities it satisfies."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from tvreg.bernstein import stencils
from tvreg.bernstein.cutoff import CutoffProfile, CutoffSupportError
from tvreg.core.fields import ScalarField
from tvreg.core.grid import Grid
from tvreg.core.operators import distance_field, require_same_grid

logger = logging.getLogger("tvreg.bernstein")


def _restrict(values: np.ndarray, cells: np.ndarray) -> np.ndarray:
    return np.where(cells, values, 0.0)


def squared_gradient(u: ScalarField) -> ScalarField:
    """``w = |grad u|^2`` at cell centres, faces averaged to the centre."""
    comps = stencils.centered_gradient(u.values, u.grid)
    return ScalarField(u.grid, stencils.dot(comps, comps))


def checked_sup(field: ScalarField) -> float:
    """Sup norm over the cells the second-order stencils reach correctly."""
    cells = stencils.checked_cells(field.grid)
    if not cells.any():
        return 0.0
    return float(np.max(np.abs(field.values[cells])))


def _operator_L(hess_w: list[list[np.ndarray]], grad_u: list[np.ndarray], s: np.ndarray, delta: float) -> np.ndarray:
    lap_w = stencils.trace(hess_w)
    return -delta * lap_w - lap_w / np.sqrt(s) + stencils.quadratic_form(hess_w, grad_u, grad_u) / s**1.5


def elliptic_operator_L(w: ScalarField, u: ScalarField, eps: float, delta: float) -> ScalarField:
    """``-delta Lap w - Lap w / sqrt(eps + |grad u|^2) + (D^2 w grad u . grad u) / (eps + |grad u|^2)^(3/2)``.

    Zero outside :func:`~tvreg.bernstein.stencils.checked_cells`.
    """
    if not eps > 0:
        raise ValueError(f"eps must be > 0, got {eps}")
    require_same_grid(w.grid, u.grid)
    grid = u.grid
    grad_u = stencils.centered_gradient(u.values, grid)
    s = eps + stencils.dot(grad_u, grad_u)
    values = _operator_L(stencils.hessian(w.values, grid), grad_u, s, delta)
    return ScalarField(grid, _restrict(values, stencils.checked_cells(grid)))


@dataclass(frozen=True)
class _Terms:
    """Discrete derivatives shared by every identity in this module."""
    grad_u: list[np.ndarray]
    w: np.ndarray
    s: np.ndarray
    hess_u: list[list[np.ndarray]]
    hess_w: list[list[np.ndarray]]
    grad_w: list[np.ndarray]
    grad_f: list[np.ndarray]


def _terms(u: ScalarField, f: ScalarField | None, eps: float) -> _Terms:
    if not eps > 0:
        raise ValueError(f"eps must be > 0, got {eps}")
    grid = u.grid
    grad_u = stencils.centered_gradient(u.values, grid)
    w = stencils.dot(grad_u, grad_u)
    if f is not None:
        require_same_grid(u.grid, f.grid)
        grad_f = stencils.centered_gradient(f.values, grid)
    else:
        grad_f = [np.zeros(grid.shape) for _ in range(grid.dim)]
    return _Terms(
        grad_u=grad_u,
        w=w,
        s=eps + w,
        hess_u=stencils.hessian(u.values, grid),
        hess_w=stencils.hessian(w, grid),
        grad_w=stencils.centered_gradient(w, grid),
        grad_f=grad_f,
    )


@dataclass(frozen=True)
class BernsteinFields:
    w: ScalarField
    z: ScalarField
    gamma: float
    Lw: ScalarField
    hessian_norm_sq: ScalarField


def bernstein_fields(u: ScalarField, eps: float, delta: float, gamma: float = 0.0, d: ScalarField | None = None) -> BernsteinFields:
    """Bundle ``w``, ``z = w exp(gamma d)``, ``L w`` and ``|D^2 u|^2`` for ``u``.

    ``d`` defaults to :func:`~tvreg.core.operators.distance_field`.
    """
    t = _terms(u, None, eps)
    grid = u.grid
    cells = stencils.checked_cells(grid)
    w = ScalarField(grid, t.w)
    z = weighted_field(w, d if d is not None else distance_field(grid), gamma)
    lw = ScalarField(grid, _restrict(_operator_L(t.hess_w, t.grad_u, t.s, delta), cells))
    hsq = ScalarField(grid, _restrict(stencils.frobenius_sq(t.hess_u), cells))
    return BernsteinFields(w=w, z=z, gamma=float(gamma), Lw=lw, hessian_norm_sq=hsq)


def eqw_residual(u: ScalarField, f: ScalarField, eps: float, delta: float, lam: float) -> ScalarField:
    """Left minus right side of the identity satisfied by ``w`` when ``u``
    solves the regularized equation with source ``f``:

        L w + 2 lam w + 2 delta |D^2 u|^2 + 2 |D^2 u|^2 / sqrt(eps + w)
          = -Lap u (grad w . grad u) / (eps + w)^(3/2)
            + 3/2 (grad u . grad w)^2 / (eps + w)^(5/2)
            - 1/2 |grad w|^2 / (eps + w)^(3/2) + 2 grad f . grad u

    Zero outside the checked cells.
    """
    t = _terms(u, f, eps)
    hsq = stencils.frobenius_sq(t.hess_u)
    root = np.sqrt(t.s)
    cross = stencils.dot(t.grad_w, t.grad_u)
    lhs = _operator_L(t.hess_w, t.grad_u, t.s, delta) + 2.0 * lam * t.w + 2.0 * delta * hsq + 2.0 * hsq / root
    rhs = (
        -stencils.trace(t.hess_u) * cross / t.s**1.5
        + 1.5 * cross * cross / t.s**2.5
        - 0.5 * stencils.dot(t.grad_w, t.grad_w) / t.s**1.5
        + 2.0 * stencils.dot(t.grad_f, t.grad_u)
    )
    return ScalarField(u.grid, _restrict(lhs - rhs, stencils.checked_cells(u.grid)))


def divergence_form_residual(u: ScalarField, f: ScalarField, eps: float, delta: float, lam: float) -> ScalarField:
    """The same identity with the principal part written as a divergence:

        -div(delta grad w + grad w / sqrt(eps + w) - (grad w . grad u) grad u / (eps + w)^(3/2))
          + 2 lam w + 2 delta |D^2 u|^2 + 2 |D^2 u|^2 / sqrt(eps + w)
          - 1/2 |grad w|^2 / (eps + w)^(3/2) - 2 grad f . grad u

    The flux is differenced once more, so one extra layer of cells is dropped.
    """
    t = _terms(u, f, eps)
    grid = u.grid
    root = np.sqrt(t.s)
    cross = stencils.dot(t.grad_w, t.grad_u)
    div = np.zeros(grid.shape)
    for k in range(grid.dim):
        flux = delta * t.grad_w[k] + t.grad_w[k] / root - cross * t.grad_u[k] / t.s**1.5
        div += (np.roll(flux, -1, k) - np.roll(flux, 1, k)) / (2.0 * grid.h[k])
    hsq = stencils.frobenius_sq(t.hess_u)
    values = (
        -div + 2.0 * lam * t.w + 2.0 * delta * hsq + 2.0 * hsq / root
        - 0.5 * stencils.dot(t.grad_w, t.grad_w) / t.s**1.5
        - 2.0 * stencils.dot(t.grad_f, t.grad_u)
    )
    return ScalarField(grid, _restrict(values, grid.core_mask(stencils.STENCIL_WIDTH + 1)))


@dataclass(frozen=True)
class MarginReport:
    """Positive-part statistics of an inequality evaluated cell by cell."""
    values: ScalarField
    max_violation: float
    violating_cells: int
    checked_cells: int
    argmax: tuple[int, ...] | None

    def fraction_above(self, level: float) -> float:
        cells = stencils.checked_cells(self.values.grid)
        if not cells.any():
            return 0.0
        return float(np.count_nonzero(self.values.values[cells] > level)) / float(np.count_nonzero(cells))


def _margin_report(values: np.ndarray, cells: np.ndarray, grid: Grid) -> MarginReport:
    values = _restrict(values, cells)
    positive = np.where(cells, np.maximum(values, 0.0), 0.0)
    n_checked = int(np.count_nonzero(cells))
    if n_checked == 0:
        return MarginReport(ScalarField(grid, values), 0.0, 0, 0, None)
    peak = float(np.max(positive))
    argmax = tuple(int(i) for i in np.unravel_index(int(np.argmax(positive)), grid.shape)) if peak > 0 else None
    return MarginReport(
        values=ScalarField(grid, values),
        max_violation=peak,
        violating_cells=int(np.count_nonzero(positive > 0)),
        checked_cells=n_checked,
        argmax=argmax,
    )


def subsolution_margin(
    u: ScalarField,
    f: ScalarField,
    eps: float,
    delta: float,
    lam: float,
    C: float = 3.0,
) -> MarginReport:
    """``L w + 2 lam w - C |grad w|^2 / (eps + w)^(3/2) - 2 |grad f| sqrt(w)``.

    The inequality asks for this to be ``<= 0``; the report carries its
    positive part over the checked cells.
    """
    t = _terms(u, f, eps)
    values = (
        _operator_L(t.hess_w, t.grad_u, t.s, delta)
        + 2.0 * lam * t.w
        - C * stencils.dot(t.grad_w, t.grad_w) / t.s**1.5
        - 2.0 * np.sqrt(stencils.dot(t.grad_f, t.grad_f)) * np.sqrt(t.w)
    )
    return _margin_report(values, stencils.checked_cells(u.grid), u.grid)


@dataclass(frozen=True)
class LocalizedReport:
    lhs: ScalarField
    rhs: ScalarField
    max_violation: float
    argmax: tuple[int, ...] | None
    argmax_point: tuple[float, ...] | None
    checked_cells: int
    support_cells: int


def localized_inequality_check(
    u: ScalarField,
    f: ScalarField,
    eps: float,
    delta: float,
    lam: float,
    cutoff: CutoffProfile,
    C: float = 3.0,
) -> LocalizedReport:
    """Both sides of the cut-off inequality for ``v = w phi`` on ``{phi > 0}``::

        L v + 2 lam v <= C |grad v|^2 / (phi (eps + w)^(3/2)) - 2 delta grad v . grad phi / phi
                         + delta w (2 |grad phi|^2 / phi - Lap phi) + 2 |grad f| sqrt(w) phi
                         + C sqrt(w) (|grad phi|^2 / phi + |D^2 phi|)

    Raises:
        CutoffSupportError: the support of ``phi`` is empty or reaches
            cells within the stencil width of the boundary.
    """
    grid = u.grid
    phi, grad_phi, hess_phi = cutoff.evaluate(grid)
    support = phi > 0
    if not support.any():
        raise CutoffSupportError(f"cutoff {cutoff} covers no cell of {grid.grid_id}")
    checked = stencils.checked_cells(grid)
    if np.any(support & ~checked):
        raise CutoffSupportError(
            f"cutoff support (outer radius {cutoff.outer_radius:g}) reaches the boundary of {grid.grid_id}"
        )
    t = _terms(u, f, eps)
    v = t.w * phi
    grad_v = stencils.centered_gradient(v, grid)
    hess_v = stencils.hessian(v, grid)
    safe_phi = np.where(support, phi, 1.0)
    grad_phi_sq = stencils.dot(grad_phi, grad_phi)
    hess_phi_norm = np.sqrt(stencils.frobenius_sq(hess_phi))
    root_w = np.sqrt(t.w)

    lhs = _operator_L(hess_v, t.grad_u, t.s, delta) + 2.0 * lam * v
    rhs = (
        C * stencils.dot(grad_v, grad_v) / (safe_phi * t.s**1.5)
        - 2.0 * delta * stencils.dot(grad_v, grad_phi) / safe_phi
        + delta * t.w * (2.0 * grad_phi_sq / safe_phi - stencils.trace(hess_phi))
        + 2.0 * np.sqrt(stencils.dot(t.grad_f, t.grad_f)) * root_w * phi
        + C * root_w * (grad_phi_sq / safe_phi + hess_phi_norm)
    )
    # the outermost support layer sees the kink of a flat profile
    cells = ndimage.binary_erosion(support, structure=np.ones((3,) * grid.dim, dtype=bool), border_value=0)
    lhs = _restrict(lhs, cells)
    rhs = _restrict(rhs, cells)
    excess = np.where(cells, np.maximum(lhs - rhs, 0.0), 0.0)
    peak = float(np.max(excess)) if cells.any() else 0.0
    argmax = point = None
    if peak > 0:
        argmax = tuple(int(i) for i in np.unravel_index(int(np.argmax(excess)), grid.shape))
        point = tuple(float(c[argmax]) for c in grid.centers())
        logger.debug("localized inequality on %s exceeded by %.3e at %s", grid.grid_id, peak, point)
    return LocalizedReport(
        lhs=ScalarField(grid, lhs),
        rhs=ScalarField(grid, rhs),
        max_violation=peak,
        argmax=argmax,
        argmax_point=point,
        checked_cells=int(np.count_nonzero(cells)),
        support_cells=int(np.count_nonzero(support)),
    )


def weighted_field(w: ScalarField, d: ScalarField, gamma: float) -> ScalarField:
    """``z = w exp(gamma d)``."""
    if not gamma >= 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    require_same_grid(w.grid, d.grid)
    if gamma == 0:
        return w
    return ScalarField(w.grid, w.values * np.exp(gamma * d.values))


def cauchy_schwarz_gap(u: ScalarField) -> float:
    """Largest excess of ``|grad w|^2 / (4 w)`` over ``|D^2 u|^2`` on checked
    cells with ``w > 1e-12``, relative to the peak of ``|D^2 u|^2``.

    The continuum inequality makes this 0; the discrete value is a
    consistency error.
    """
    grid = u.grid
    grad_u = stencils.centered_gradient(u.values, grid)
    w = stencils.dot(grad_u, grad_u)
    cells = stencils.checked_cells(grid) & (w > 1e-12)
    if not cells.any():
        return 0.0
    hsq = stencils.frobenius_sq(stencils.hessian(u.values, grid))
    grad_w = stencils.centered_gradient(w, grid)
    bound = stencils.dot(grad_w, grad_w) / (4.0 * np.where(cells, w, 1.0))
    scale = float(np.max(hsq[cells]))
    if scale == 0.0:
        return 0.0
    return max(0.0, float(np.max((bound - hsq)[cells])) / scale)
