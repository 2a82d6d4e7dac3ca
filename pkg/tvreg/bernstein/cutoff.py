"""Polynomial cut-off profiles for localized gradient estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from tvreg.core.grid import Grid


class CutoffSupportError(ValueError):
    """The cut-off support does not sit inside the checked interior."""


@dataclass(frozen=True)
class CutoffProfile:
    """``phi = (1 - |x - x0|^2 / ((1 + rho) R)^2)_+^q``.

    ``exponent = 0`` gives the indicator of the outer ball, whose derivatives
    are taken as zero. Otherwise ``q >= 4`` keeps ``|grad phi|^2 <= C phi^(3/2)``
    and ``|D^2 phi| <= C phi^(1/2)``.
    """
    center: tuple[float, ...]
    radius: float
    rho: float
    exponent: int = 4

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if not self.radius > 0:
            raise ValueError(f"cutoff radius must be > 0, got {self.radius}")
        if not self.rho > 0:
            raise ValueError(f"rho must be > 0, got {self.rho}")
        if self.exponent != 0 and self.exponent < 4:
            raise ValueError(f"cutoff exponent must be 0 or >= 4, got {self.exponent}")

    @property
    def outer_radius(self) -> float:
        return (1.0 + self.rho) * self.radius

    def constants(self) -> tuple[float, float]:
        """``(C_grad, C_hess)`` with ``|grad phi|^2 <= C_grad phi^(3/2)`` and
        ``|D^2 phi| <= C_hess phi^(1/2)``."""
        q = self.exponent
        if q == 0:
            return 0.0, 0.0
        r2 = self.outer_radius**2
        dim = len(self.center)
        return 4.0 * q * q / r2, math.sqrt(dim) * (2.0 * q + 4.0 * q * (q - 1)) / r2

    def evaluate(self, grid: Grid) -> tuple[np.ndarray, list[np.ndarray], list[list[np.ndarray]]]:
        """``phi``, ``grad phi`` and ``D^2 phi`` at cell centres, all analytic."""
        if len(self.center) != grid.dim:
            raise ValueError(f"cutoff centre has {len(self.center)} coordinates, grid is {grid.dim}D")
        q = self.exponent
        r2 = self.outer_radius**2
        offsets = [x - c for x, c in zip(grid.centers(), self.center)]
        t = sum(o * o for o in offsets) / r2
        inside = (t < 1.0) & grid.mask
        base = np.where(inside, 1.0 - t, 0.0)
        zeros = np.zeros(grid.shape)
        if q == 0:
            phi = inside.astype(float)
            return phi, [zeros] * grid.dim, [[zeros] * grid.dim for _ in range(grid.dim)]
        phi = base**q
        d1 = np.where(inside, base ** (q - 1), 0.0)
        d2 = np.where(inside, base ** (q - 2), 0.0)
        grad = [-2.0 * q * d1 * o / r2 for o in offsets]
        hess = [
            [
                4.0 * q * (q - 1) * d2 * offsets[k] * offsets[j] / (r2 * r2)
                - (2.0 * q * d1 / r2 if j == k else 0.0)
                for j in range(grid.dim)
            ]
            for k in range(grid.dim)
        ]
        return phi, grad, hess
