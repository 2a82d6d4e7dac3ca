"""Closed-form fields with hard-coded derivatives, and the sources that make
them exact solutions of the regularized equation."""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from tvreg.core.fields import ScalarField
from tvreg.core.grid import Grid

Coords = tuple[np.ndarray, ...]


@dataclass(frozen=True)
class ClosedForm:
    """A smooth field with its gradient and Hessian as explicit formulas.

    ``neumann`` marks fields whose normal derivative vanishes on the box
    ``[0, L_1] x ... x [0, L_d]`` they were built for.
    """
    name: str
    dim: int
    value: Callable[[Coords], np.ndarray]
    gradient: Callable[[Coords], list[np.ndarray]]
    hessian: Callable[[Coords], list[list[np.ndarray]]]
    neumann: bool = True
    params: dict[str, Any] = field(default_factory=dict)


def _zeros(x: Coords) -> np.ndarray:
    return np.zeros_like(x[0])


def constant(value: float = 1.0, dim: int = 1) -> ClosedForm:
    c = float(value)
    return ClosedForm(
        "constant",
        dim,
        value=lambda x: np.full_like(x[0], c),
        gradient=lambda x: [_zeros(x) for _ in range(dim)],
        hessian=lambda x: [[_zeros(x) for _ in range(dim)] for _ in range(dim)],
        params={"value": c},
    )


def affine(slope: tuple[float, ...] = (1.0,), offset: float = 0.0) -> ClosedForm:
    a = tuple(float(s) for s in slope)
    dim = len(a)
    return ClosedForm(
        "affine",
        dim,
        value=lambda x: offset + sum(ak * xk for ak, xk in zip(a, x)),
        gradient=lambda x: [np.full_like(x[0], ak) for ak in a],
        hessian=lambda x: [[_zeros(x) for _ in range(dim)] for _ in range(dim)],
        neumann=not any(a),
        params={"slope": a, "offset": float(offset)},
    )


def cosine(amplitude: float = 1.0, length: float = 1.0, mode: int = 1) -> ClosedForm:
    """``A cos(k pi x / L)`` on ``[0, L]``."""
    k = mode * math.pi / length
    amp = float(amplitude)
    return ClosedForm(
        "cos",
        1,
        value=lambda x: amp * np.cos(k * x[0]),
        gradient=lambda x: [-amp * k * np.sin(k * x[0])],
        hessian=lambda x: [[-amp * k * k * np.cos(k * x[0])]],
        params={"amplitude": amp, "length": float(length), "mode": int(mode)},
    )


def smoothstep(amplitude: float = 1.0, length: float = 1.0) -> ClosedForm:
    """``A (3 s^2 - 2 s^3)`` with ``s = x / L``."""
    amp = float(amplitude)
    L = float(length)
    return ClosedForm(
        "smoothstep",
        1,
        value=lambda x: amp * (3.0 * (x[0] / L) ** 2 - 2.0 * (x[0] / L) ** 3),
        gradient=lambda x: [amp * 6.0 * (x[0] / L) * (1.0 - x[0] / L) / L],
        hessian=lambda x: [[amp * (6.0 - 12.0 * x[0] / L) / (L * L)]],
        params={"amplitude": amp, "length": L},
    )


def cosine_product(amplitude: float = 1.0, lengths: tuple[float, float] = (1.0, 1.0)) -> ClosedForm:
    """``A cos(pi x / Lx) cos(pi y / Ly)``."""
    amp = float(amplitude)
    kx, ky = math.pi / lengths[0], math.pi / lengths[1]

    def grad(x: Coords) -> list[np.ndarray]:
        cx, sx = np.cos(kx * x[0]), np.sin(kx * x[0])
        cy, sy = np.cos(ky * x[1]), np.sin(ky * x[1])
        return [-amp * kx * sx * cy, -amp * ky * cx * sy]

    def hess(x: Coords) -> list[list[np.ndarray]]:
        cx, sx = np.cos(kx * x[0]), np.sin(kx * x[0])
        cy, sy = np.cos(ky * x[1]), np.sin(ky * x[1])
        mixed = amp * kx * ky * sx * sy
        return [[-amp * kx * kx * cx * cy, mixed], [mixed, -amp * ky * ky * cx * cy]]

    return ClosedForm(
        "cos-product",
        2,
        value=lambda x: amp * np.cos(kx * x[0]) * np.cos(ky * x[1]),
        gradient=grad,
        hessian=hess,
        params={"amplitude": amp, "lengths": tuple(float(v) for v in lengths)},
    )


def smoothstep_product(amplitude: float = 1.0, lengths: tuple[float, float] = (1.0, 1.0)) -> ClosedForm:
    """``A S(x / Lx) S(y / Ly)`` with ``S(s) = 3 s^2 - 2 s^3``."""
    amp = float(amplitude)
    lx, ly = float(lengths[0]), float(lengths[1])

    def parts(s: np.ndarray, L: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        t = s / L
        return 3.0 * t * t - 2.0 * t**3, 6.0 * t * (1.0 - t) / L, (6.0 - 12.0 * t) / (L * L)

    def grad(x: Coords) -> list[np.ndarray]:
        sx, dx, _ = parts(x[0], lx)
        sy, dy, _ = parts(x[1], ly)
        return [amp * dx * sy, amp * sx * dy]

    def hess(x: Coords) -> list[list[np.ndarray]]:
        sx, dx, ddx = parts(x[0], lx)
        sy, dy, ddy = parts(x[1], ly)
        mixed = amp * dx * dy
        return [[amp * ddx * sy, mixed], [mixed, amp * sx * ddy]]

    return ClosedForm(
        "smoothstep-product",
        2,
        value=lambda x: amp * parts(x[0], lx)[0] * parts(x[1], ly)[0],
        gradient=grad,
        hessian=hess,
        params={"amplitude": amp, "lengths": (lx, ly)},
    )


CATALOG: dict[str, Callable[..., ClosedForm]] = {
    "constant": constant,
    "affine": affine,
    "cos": cosine,
    "smoothstep": smoothstep,
    "cos-product": cosine_product,
    "smoothstep-product": smoothstep_product,
}


def closed_form(name: str, **params: Any) -> ClosedForm:
    """Look up a catalog entry by name and build it with ``params``."""
    try:
        factory = CATALOG[name]
    except KeyError:
        raise ValueError(f"unknown closed-form field {name!r}; catalog: {sorted(CATALOG)}") from None
    return factory(**params)


def regularized_operator(u_star: ClosedForm, x: Coords, eps: float, delta: float, lam: float) -> np.ndarray:
    """``-delta Lap u - div(grad u / sqrt(eps + |grad u|^2)) + lam u`` from the
    closed-form derivatives; the divergence expands to
    ``Lap u / sqrt(s) - (D^2 u grad u . grad u) / s^(3/2)`` with ``s = eps + |grad u|^2``."""
    grad = u_star.gradient(x)
    hess = u_star.hessian(x)
    dim = u_star.dim
    s = eps + sum(g * g for g in grad)
    lap = sum(hess[k][k] for k in range(dim))
    quad = sum(hess[k][j] * grad[k] * grad[j] for k in range(dim) for j in range(dim))
    return -delta * lap - (lap / np.sqrt(s) - quad / s**1.5) + lam * u_star.value(x)


def manufactured_source(
    u_star: ClosedForm | str,
    eps: float,
    delta: float,
    lam: float,
    grid: Grid,
) -> tuple[ScalarField, ScalarField]:
    """Sample ``u*`` and the source ``f*`` that makes it an exact solution.

    Raises:
        ValueError: unknown catalog name, or a field built for another dimension.
    """
    if isinstance(u_star, str):
        u_star = closed_form(u_star)
    if u_star.dim != grid.dim:
        raise ValueError(f"{u_star.name} is a {u_star.dim}D field, grid {grid.grid_id} is {grid.dim}D")
    if not eps > 0:
        raise ValueError(f"eps must be > 0, got {eps}")
    x = grid.centers()
    u = ScalarField(grid, u_star.value(x))
    f = ScalarField(grid, regularized_operator(u_star, x, eps, delta, lam))
    return u, f
