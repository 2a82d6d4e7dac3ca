"""Discrete ROF energy and its epsilon/delta regularization."""

from __future__ import annotations

import numpy as np

from tvreg.core.fields import ScalarField
from tvreg.core.operators import gradient, require_same_grid


def energy_tv(u: ScalarField, f: ScalarField, mu: float) -> float:
    """``mu * TV(u) + 1/2 ||u - f||_2^2`` with cell-measure weights."""
    require_same_grid(u.grid, f.grid)
    grid = u.grid
    tv = np.sum(gradient(u).magnitude()[grid.mask])
    fidelity = np.sum((u.interior() - f.interior()) ** 2)
    return float((mu * tv + 0.5 * fidelity) * grid.cell_volume)


def energy_regularized(
    u: ScalarField,
    f: ScalarField,
    eps: float,
    delta: float,
    lam: float = 1.0,
) -> float:
    """Energy whose Euler-Lagrange equation is the regularized Neumann problem.

    ``sum[delta |grad u|^2 / 2 + sqrt(eps + |grad u|^2)] + lam/2 ||u - f/lam||^2``;
    with ``lam = 1`` this is the plain ``1/2 ||u - f||^2`` fidelity.
    """
    if eps < 0 or delta < 0:
        raise ValueError(f"eps and delta must be >= 0, got eps={eps}, delta={delta}")
    if lam <= 0:
        raise ValueError(f"lam must be > 0, got {lam}")
    require_same_grid(u.grid, f.grid)
    grid = u.grid
    sq = gradient(u).magnitude()[grid.mask] ** 2
    smooth = 0.5 * delta * sq + np.sqrt(eps + sq)
    fidelity = 0.5 * lam * (u.interior() - f.interior() / lam) ** 2
    return float((np.sum(smooth) + np.sum(fidelity)) * grid.cell_volume)
