"""Immutable scalar and vector fields on a grid."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from tvreg.core.grid import Grid


def _readonly(values: np.ndarray) -> np.ndarray:
    values.flags.writeable = False
    return values


@dataclass(frozen=True, eq=False)
class ScalarField:
    """One real value per interior cell.

    ``values`` has the full grid shape; exterior cells of masked grids hold 0
    and are never read by the operators.
    """
    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        grid = self.grid
        raw = np.asarray(self.values, dtype=float)
        if raw.shape == grid.shape:
            arr = np.array(raw, dtype=float)
        elif raw.ndim == 1 and raw.size == grid.n_interior:
            arr = np.zeros(grid.shape)
            arr[grid.mask] = raw
        else:
            raise ValueError(
                f"field values of shape {raw.shape} do not match grid shape "
                f"{grid.shape} or interior count {grid.n_interior}"
            )
        arr[~grid.mask] = 0.0
        if not np.all(np.isfinite(arr)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", _readonly(arr))

    @classmethod
    def constant(cls, grid: Grid, value: float) -> ScalarField:
        return cls(grid, np.full(grid.shape, float(value)))

    @classmethod
    def from_function(cls, grid: Grid, fn: Callable[..., np.ndarray]) -> ScalarField:
        """Sample ``fn(*centers)`` at cell centres."""
        values = np.broadcast_to(np.asarray(fn(*grid.centers()), dtype=float), grid.shape)
        return cls(grid, values)

    def interior(self) -> np.ndarray:
        """Interior values in C order."""
        return self.values[self.grid.mask]

    def with_values(self, values: np.ndarray) -> ScalarField:
        return ScalarField(self.grid, values)

    def mean(self) -> float:
        return float(np.mean(self.interior()))

    def __add__(self, other: ScalarField | float) -> ScalarField:
        return self.with_values(self.values + _raw(other))

    def __sub__(self, other: ScalarField | float) -> ScalarField:
        return self.with_values(self.values - _raw(other))

    def __mul__(self, other: ScalarField | float) -> ScalarField:
        return self.with_values(self.values * _raw(other))

    __rmul__ = __mul__

    def __truediv__(self, other: float) -> ScalarField:
        return self.with_values(self.values / float(other))

    def __neg__(self) -> ScalarField:
        return self.with_values(-self.values)


def _raw(other: ScalarField | float) -> np.ndarray | float:
    return other.values if isinstance(other, ScalarField) else float(other)


@dataclass(frozen=True, eq=False)
class VectorField:
    """Per-axis face values with forward staggering.

    ``components[k][i]`` lives on the face between cells ``i`` and
    ``i + e_k``. Inactive faces (touching an exterior cell or the box edge)
    are forced to 0.
    """
    grid: Grid
    components: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        grid = self.grid
        if len(self.components) != grid.dim:
            raise ValueError(
                f"expected {grid.dim} components, got {len(self.components)}"
            )
        comps = []
        for axis, comp in enumerate(self.components):
            arr = np.array(comp, dtype=float)
            if arr.shape != grid.shape:
                raise ValueError(
                    f"component {axis} has shape {arr.shape}, expected {grid.shape}"
                )
            if not np.all(np.isfinite(arr)):
                raise ValueError("vector field values must be finite")
            arr[~grid.face_mask(axis)] = 0.0
            comps.append(_readonly(arr))
        object.__setattr__(self, "components", tuple(comps))

    @classmethod
    def zeros(cls, grid: Grid) -> VectorField:
        return cls(grid, tuple(np.zeros(grid.shape) for _ in range(grid.dim)))

    def magnitude(self) -> np.ndarray:
        """Cell magnitude ``sqrt(sum_k p_k[i]^2)`` of the forward faces of each cell."""
        total = np.zeros(self.grid.shape)
        for comp in self.components:
            total += comp * comp
        return np.sqrt(total)

    def __add__(self, other: VectorField) -> VectorField:
        return VectorField(self.grid, tuple(a + b for a, b in zip(self.components, other.components)))

    def __mul__(self, scale: float) -> VectorField:
        return VectorField(self.grid, tuple(a * float(scale) for a in self.components))

    __rmul__ = __mul__
