"""Lagged-diffusivity linear systems and their conjugate-gradient solve."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as splinalg

from tvreg.core.fields import ScalarField
from tvreg.core.grid import Grid, interval
from tvreg.core.operators import face_masks, gradient_values, shift_back, shift_forward

logger = logging.getLogger("tvreg.solver")


def face_gradient_squared(u: ScalarField, scheme: str = "averaged") -> list[np.ndarray]:
    """``|grad u|^2`` evaluated on every face, one array per axis.

    ``averaged``: normal difference plus each transverse component averaged
    from the four transverse faces around the face. ``cell``: the squared
    magnitude of the forward gradient of the face's owning cell.
    """
    grid = u.grid
    masks = face_masks(grid)
    comps = gradient_values(u.values, grid, masks)
    out = []
    for k in range(grid.dim):
        total = comps[k] * comps[k]
        for j in range(grid.dim):
            if j == k:
                continue
            if scheme == "cell":
                total = total + comps[j] * comps[j]
            else:
                pair = comps[j] + shift_back(comps[j], j)
                avg = 0.25 * (pair + shift_forward(pair, k))
                total = total + avg * avg
        out.append(np.where(masks[k], total, 0.0))
    return out


def face_coefficients(u: ScalarField, eps: float, delta: float, scheme: str = "averaged") -> list[np.ndarray]:
    """``a = delta + (eps + |grad u|^2_face)^(-1/2)`` on active faces, 0 elsewhere."""
    if not eps > 0:
        raise ValueError(f"eps must be > 0, got {eps}")
    masks = face_masks(u.grid)
    squares = face_gradient_squared(u, scheme)
    return [np.where(m, delta + 1.0 / np.sqrt(eps + s), 0.0) for m, s in zip(masks, squares)]


@dataclass(frozen=True, eq=False)
class LinearSystem:
    """``-div(a grad v) + lam v`` with frozen face coefficients ``a``.

    ``matrix`` acts on interior cells in C order and is symmetric positive
    definite for ``lam > 0``.
    """
    grid: Grid
    coefficients: tuple[np.ndarray, ...]
    lam: float
    rhs: ScalarField
    matrix: sparse.csr_matrix

    def apply(self, v: ScalarField) -> ScalarField:
        return ScalarField(self.grid, self.matrix @ v.interior())

    @property
    def min_coefficient(self) -> float:
        vals = [c[m] for c, m in zip(self.coefficients, face_masks(self.grid)) if m.any()]
        return float(min(np.min(v) for v in vals)) if vals else float("inf")

    @property
    def max_coefficient(self) -> float:
        vals = [c[m] for c, m in zip(self.coefficients, face_masks(self.grid)) if m.any()]
        return float(max(np.max(v) for v in vals)) if vals else 0.0


def system_from_coefficients(
    grid: Grid,
    coefficients: list[np.ndarray] | tuple[np.ndarray, ...],
    lam: float,
    rhs: ScalarField,
) -> LinearSystem:
    """Assemble the sparse matrix for given face coefficients."""
    if not lam > 0:
        raise ValueError(f"lam must be > 0, got {lam}")
    masks = face_masks(grid)
    index = np.full(grid.shape, -1, dtype=np.int64)
    n = grid.n_interior
    index[grid.mask] = np.arange(n)
    diag = np.full(n, float(lam))
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    vals: list[np.ndarray] = []
    coeffs = []
    for axis, mask in enumerate(masks):
        a = np.where(mask, np.asarray(coefficients[axis], dtype=float), 0.0)
        coeffs.append(a)
        c = a[mask] / grid.h[axis] ** 2
        i = index[mask]
        j = np.roll(index, -1, axis=axis)[mask]
        np.add.at(diag, i, c)
        np.add.at(diag, j, c)
        rows.extend((i, j))
        cols.extend((j, i))
        vals.extend((-c, -c))
    rows.append(np.arange(n))
    cols.append(np.arange(n))
    vals.append(diag)
    matrix = sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    )
    return LinearSystem(grid, tuple(coeffs), float(lam), rhs, matrix)


def assemble_system(u_k: ScalarField, f: ScalarField, cfg) -> LinearSystem:
    """Freeze the diffusivity at ``u_k`` and assemble the linear system.

    Args:
        u_k: current iterate.
        f: right-hand side.
        cfg: :class:`~tvreg.solver.config.SolverConfig`.
    """
    coeffs = face_coefficients(u_k, cfg.eps, float(cfg.delta), cfg.face_gradient)
    return system_from_coefficients(u_k.grid, coeffs, cfg.lam, f)


@dataclass(frozen=True)
class LinearSolution:
    field: ScalarField
    iterations: int
    converged: bool
    relative_residual: float


def linear_solve(
    system: LinearSystem,
    rhs: ScalarField | None = None,
    tol: float = 1e-10,
    max_iter: int = 5000,
    x0: ScalarField | None = None,
) -> LinearSolution:
    """Jacobi-preconditioned conjugate gradients to relative residual ``tol``.

    Hitting ``max_iter`` is not an error: the last iterate comes back with
    ``converged=False``.
    """
    rhs = rhs if rhs is not None else system.rhs
    b = rhs.interior()
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return LinearSolution(ScalarField(system.grid, np.zeros(system.grid.shape)), 0, True, 0.0)
    precond = sparse.diags(1.0 / system.matrix.diagonal())
    count = 0

    def _tick(_: np.ndarray) -> None:
        nonlocal count
        count += 1

    start = x0.interior() if x0 is not None else None
    x, info = splinalg.cg(
        system.matrix, b, x0=start, rtol=tol, atol=0.0, maxiter=max_iter, M=precond, callback=_tick,
    )
    rel = float(np.linalg.norm(b - system.matrix @ x)) / b_norm
    converged = info == 0
    if not converged:
        logger.warning("CG stopped after %d iterations at relative residual %.3e", count, rel)
    return LinearSolution(ScalarField(system.grid, x), count, converged, rel)


@dataclass(frozen=True)
class ConditionRow:
    eps: float
    a_min: float
    a_max: float
    iterations: int
    converged: bool


def condition_sweep(
    n: int = 256,
    eps_values: tuple[float, ...] = (1e-1, 1e-2, 1e-3, 1e-4),
    delta: float = 0.0,
    lam: float = 1.0,
    tol: float = 1e-10,
    max_iter: int = 5000,
    seed: int = 0,
) -> list[ConditionRow]:
    """CG iteration counts for 1D systems whose coefficients span
    ``[delta, delta + eps^-1/2]``."""
    grid = interval(n)
    rng = np.random.default_rng(seed)
    slopes = rng.permutation(np.logspace(-4, 4, n))
    rhs = ScalarField(grid, rng.standard_normal(n))
    rows = []
    for eps in eps_values:
        coeffs = [delta + 1.0 / np.sqrt(eps + slopes**2)]
        system = system_from_coefficients(grid, coeffs, lam, rhs)
        sol = linear_solve(system, tol=tol, max_iter=max_iter)
        rows.append(ConditionRow(eps, system.min_coefficient, system.max_coefficient, sol.iterations, sol.converged))
        logger.info("condition sweep eps=%g: %d CG iterations", eps, sol.iterations)
    return rows
