"""Cell-centred grids on intervals, rectangles and masked regions."""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import ndimage

logger = logging.getLogger("tvreg.core")

MIN_CELLS = 3


class GridError(ValueError):
    """Raised when a domain description cannot be turned into a grid."""


@dataclass(frozen=True)
class Interval:
    """``n`` cells on ``[0, length]``."""
    n: int
    length: float = 1.0


@dataclass(frozen=True)
class Rectangle:
    """``nx`` by ``ny`` cells on ``[0, lx] x [0, ly]``."""
    nx: int
    ny: int
    lx: float = 1.0
    ly: float = 1.0


@dataclass(frozen=True, eq=False)
class Masked:
    """Boolean cell mask embedded in a box with spacing ``h``."""
    mask: np.ndarray
    h: float | tuple[float, ...]
    name: str = "mask"


DomainSpec = Union[Interval, Rectangle, Masked]


@dataclass(frozen=True)
class BoundaryCell:
    """An interior cell with an exterior neighbour across one face.

    ``sign`` is +1 when the outward normal points along +axis.
    """
    index: tuple[int, ...]
    axis: int
    sign: int

    @property
    def normal(self) -> tuple[int, ...]:
        dim = len(self.index)
        return tuple(self.sign if k == self.axis else 0 for k in range(dim))


@dataclass(frozen=True, eq=False)
class Grid:
    dim: int
    shape: tuple[int, ...]
    h: tuple[float, ...]
    mask: np.ndarray
    convex: bool
    boundary_cells: tuple[BoundaryCell, ...]
    kind: str
    name: str = ""

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.h))

    @property
    def lengths(self) -> tuple[float, ...]:
        return tuple(n * h for n, h in zip(self.shape, self.h))

    @property
    def n_interior(self) -> int:
        return int(self.mask.sum())

    @property
    def measure(self) -> float:
        """Lebesgue measure of the interior, ``|Omega|``."""
        return self.n_interior * self.cell_volume

    @property
    def h_min(self) -> float:
        return min(self.h)

    @property
    def grid_id(self) -> str:
        dims = "x".join(str(n) for n in self.shape)
        if self.kind == "interval":
            return f"interval-{dims}"
        if self.kind == "rectangle":
            return f"rect-{dims}"
        digest = hashlib.sha256(self.mask.tobytes()).hexdigest()[:8]
        return f"{self.name or 'mask'}-{dims}-{digest}"

    def centers(self) -> tuple[np.ndarray, ...]:
        """Cell-centre coordinates, one array of ``shape`` per axis."""
        axes = [(np.arange(n) + 0.5) * h for n, h in zip(self.shape, self.h)]
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def face_mask(self, axis: int) -> np.ndarray:
        """Active faces along ``axis``: entry ``i`` is the face between
        ``i`` and ``i + e_axis``, active when both cells are interior."""
        return self.mask & _neighbour(self.mask, axis, +1)

    def core_mask(self, width: int) -> np.ndarray:
        """Interior cells whose ``width``-neighbourhood (Chebyshev) is interior."""
        if width <= 0:
            return self.mask.copy()
        padded = np.pad(self.mask, width, constant_values=False)
        structure = np.ones((2 * width + 1,) * self.dim, dtype=bool)
        eroded = ndimage.binary_erosion(padded, structure=structure, border_value=0)
        crop = tuple(slice(width, width + n) for n in self.shape)
        return eroded[crop] & self.mask

    def same_as(self, other: Grid) -> bool:
        if self is other:
            return True
        return (
            self.shape == other.shape
            and self.h == other.h
            and bool(np.array_equal(self.mask, other.mask))
        )


def _neighbour(mask: np.ndarray, axis: int, offset: int) -> np.ndarray:
    """Mask value at ``i + offset * e_axis``; out-of-range counts as exterior."""
    out = np.zeros_like(mask, dtype=bool)
    n = mask.shape[axis]
    src = [slice(None)] * mask.ndim
    dst = [slice(None)] * mask.ndim
    if offset > 0:
        src[axis] = slice(offset, n)
        dst[axis] = slice(0, n - offset)
    else:
        src[axis] = slice(0, n + offset)
        dst[axis] = slice(-offset, n)
    out[tuple(dst)] = mask[tuple(src)]
    return out


def _boundary_cells(mask: np.ndarray) -> tuple[BoundaryCell, ...]:
    cells: list[BoundaryCell] = []
    for axis in range(mask.ndim):
        for sign in (-1, 1):
            hits = mask & ~_neighbour(mask, axis, sign)
            for idx in np.argwhere(hits):
                cells.append(BoundaryCell(tuple(int(i) for i in idx), axis, sign))
    cells.sort(key=lambda c: (c.index, c.axis, c.sign))
    return tuple(cells)


def _frozen(mask: np.ndarray) -> np.ndarray:
    mask.flags.writeable = False
    return mask


def _check_shape(shape: tuple[int, ...]) -> None:
    if any(n < MIN_CELLS for n in shape):
        raise GridError(
            f"grid needs at least {MIN_CELLS} cells per axis, got shape {shape}"
        )


def _check_spacing(h: tuple[float, ...]) -> None:
    if any(not np.isfinite(v) or v <= 0 for v in h):
        raise GridError(f"grid spacing must be positive and finite, got {h}")


def build_grid(spec: DomainSpec) -> Grid:
    """Build a :class:`Grid` from a domain description.

    Args:
        spec: ``Interval``, ``Rectangle`` or ``Masked``.

    Raises:
        GridError: too few cells, bad spacing, empty or disconnected mask.
    """
    if isinstance(spec, Interval):
        shape = (int(spec.n),)
        _check_shape(shape)
        h = (float(spec.length) / shape[0],)
        _check_spacing(h)
        mask = _frozen(np.ones(shape, dtype=bool))
        return Grid(1, shape, h, mask, True, _boundary_cells(mask), "interval")

    if isinstance(spec, Rectangle):
        shape = (int(spec.nx), int(spec.ny))
        _check_shape(shape)
        h = (float(spec.lx) / shape[0], float(spec.ly) / shape[1])
        _check_spacing(h)
        mask = _frozen(np.ones(shape, dtype=bool))
        return Grid(2, shape, h, mask, True, _boundary_cells(mask), "rectangle")

    if isinstance(spec, Masked):
        mask = np.asarray(spec.mask, dtype=bool)
        if mask.ndim not in (1, 2):
            raise GridError(f"mask must be 1D or 2D, got {mask.ndim}D")
        shape = tuple(int(n) for n in mask.shape)
        _check_shape(shape)
        h = spec.h if isinstance(spec.h, tuple) else (float(spec.h),) * mask.ndim
        h = tuple(float(v) for v in h)
        if len(h) != mask.ndim:
            raise GridError(f"spacing {h} does not match mask dimension {mask.ndim}")
        _check_spacing(h)
        if not mask.any():
            raise GridError("mask has no interior cells")
        _, components = ndimage.label(mask)
        if components != 1:
            raise GridError(f"mask interior is disconnected ({components} components)")
        mask = _frozen(mask.copy())
        convex = bool(mask.all())
        logger.debug("Masked grid %s: %d interior cells, convex=%s", spec.name, mask.sum(), convex)
        return Grid(mask.ndim, shape, h, mask, convex, _boundary_cells(mask), "masked", spec.name)

    raise TypeError(f"unsupported domain spec: {type(spec).__name__}")


def interval(n: int, length: float = 1.0) -> Grid:
    return build_grid(Interval(n, length))


def rectangle(nx: int, ny: int, lx: float = 1.0, ly: float = 1.0) -> Grid:
    return build_grid(Rectangle(nx, ny, lx, ly))


def lshape(n: int, length: float = 1.0) -> Grid:
    """Square of side ``length`` with its upper-right quadrant removed."""
    if n < 2 * MIN_CELLS or n % 2:
        raise GridError(f"L-shape needs an even cell count >= {2 * MIN_CELLS}, got {n}")
    mask = np.ones((n, n), dtype=bool)
    mask[n // 2:, n // 2:] = False
    return build_grid(Masked(mask, length / n, name="lshape"))


def disc(n: int, length: float = 1.0) -> Grid:
    """Disc inscribed in the square of side ``length``."""
    h = length / n
    c = (np.arange(n) + 0.5) * h - 0.5 * length
    x, y = np.meshgrid(c, c, indexing="ij")
    mask = x * x + y * y <= (0.5 * length) ** 2
    return build_grid(Masked(mask, h, name="disc"))


def corner_cells(grid: Grid) -> tuple[tuple[int, ...], ...]:
    """Interior cells touching a reentrant grid vertex.

    A vertex is reentrant when exactly three of its four incident cells are
    interior. Always empty in 1D.
    """
    if grid.dim != 2:
        return ()
    padded = np.pad(grid.mask, 1, constant_values=False).astype(np.int8)
    # vertex (a, b) sits between padded rows a, a+1 and columns b, b+1
    count = padded[:-1, :-1] + padded[1:, :-1] + padded[:-1, 1:] + padded[1:, 1:]
    found: set[tuple[int, ...]] = set()
    for a, b in np.argwhere(count == 3):
        for da in (0, 1):
            for db in (0, 1):
                i, j = int(a) + da - 1, int(b) + db - 1
                if 0 <= i < grid.shape[0] and 0 <= j < grid.shape[1] and grid.mask[i, j]:
                    found.add((i, j))
    return tuple(sorted(found))
