"""Cell-centred difference stencils for the second-order Bernstein quantities.

Values near the box edge or the mask boundary are garbage; callers restrict
to :func:`checked_cells`.
"""

from __future__ import annotations

import numpy as np

from tvreg.core.grid import Grid
from tvreg.core.operators import gradient_values, shift_back

# w uses first differences of u; second differences of w reach two cells out.
STENCIL_WIDTH = 2


def checked_cells(grid: Grid) -> np.ndarray:
    return grid.core_mask(STENCIL_WIDTH)


def centered_gradient(values: np.ndarray, grid: Grid) -> list[np.ndarray]:
    """Average of the two faces of each cell along each axis (central difference)."""
    comps = gradient_values(values, grid)
    return [0.5 * (c + shift_back(c, axis)) for axis, c in enumerate(comps)]


def hessian(values: np.ndarray, grid: Grid) -> list[list[np.ndarray]]:
    """Central second differences; mixed terms use the 4-point cross stencil."""
    dim = grid.dim
    out: list[list[np.ndarray]] = [[np.zeros(grid.shape)] * dim for _ in range(dim)]
    for k in range(dim):
        hk = grid.h[k]
        out[k][k] = (np.roll(values, -1, k) - 2.0 * values + np.roll(values, 1, k)) / (hk * hk)
        for j in range(k + 1, dim):
            plus = np.roll(values, -1, k)
            minus = np.roll(values, 1, k)
            mixed = (
                np.roll(plus, -1, j) - np.roll(plus, 1, j)
                - np.roll(minus, -1, j) + np.roll(minus, 1, j)
            ) / (4.0 * hk * grid.h[j])
            out[k][j] = mixed
            out[j][k] = mixed
    return out


def trace(matrix: list[list[np.ndarray]]) -> np.ndarray:
    return sum(matrix[k][k] for k in range(len(matrix)))


def frobenius_sq(matrix: list[list[np.ndarray]]) -> np.ndarray:
    return sum(m * m for row in matrix for m in row)


def quadratic_form(matrix: list[list[np.ndarray]], a: list[np.ndarray], b: list[np.ndarray]) -> np.ndarray:
    """``sum_kj M_kj a_k b_j`` per cell."""
    dim = len(matrix)
    return sum(matrix[k][j] * a[k] * b[j] for k in range(dim) for j in range(dim))


def dot(a: list[np.ndarray], b: list[np.ndarray]) -> np.ndarray:
    return sum(x * y for x, y in zip(a, b))
