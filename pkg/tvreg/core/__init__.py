"""Grids, fields and discrete operators."""

from tvreg.core.fields import ScalarField, VectorField
from tvreg.core.grid import (
    BoundaryCell,
    Grid,
    GridError,
    Interval,
    Masked,
    Rectangle,
    build_grid,
    corner_cells,
    disc,
    interval,
    lshape,
    rectangle,
)
from tvreg.core.operators import (
    boundary_normal_derivative,
    distance_field,
    divergence,
    field_norm,
    gradient,
    inner,
    laplacian,
    total_variation,
)

__all__ = [
    "BoundaryCell",
    "Grid",
    "GridError",
    "Interval",
    "Masked",
    "Rectangle",
    "ScalarField",
    "VectorField",
    "boundary_normal_derivative",
    "build_grid",
    "corner_cells",
    "disc",
    "distance_field",
    "divergence",
    "field_norm",
    "gradient",
    "inner",
    "interval",
    "laplacian",
    "lshape",
    "rectangle",
    "total_variation",
]
