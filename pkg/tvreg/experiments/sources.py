"""Synthetic sources for experiments."""

from __future__ import annotations

import logging
import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy import ndimage

from tvreg.core.fields import ScalarField
from tvreg.core.grid import Grid
from tvreg.core.operators import field_norm, gradient

logger = logging.getLogger("tvreg.experiments")

SOURCE_KINDS = ("constant", "affine", "trig", "smoothed-noise", "step", "step-plus-trig")


def _number(params: Mapping[str, Any], name: str, default: float) -> float:
    raw = params.get(name, default)
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise ValueError(f"source parameter {name} must be a number, got {raw!r}") from None


def _vector(params: Mapping[str, Any], name: str, dim: int, default: float) -> tuple[float, ...]:
    raw = params.get(name)
    if raw is None:
        return (default,) * dim
    if isinstance(raw, str):
        parts = [p for p in raw.split(",") if p.strip()]
    elif isinstance(raw, (tuple, list)):
        parts = list(raw)
    else:
        parts = [raw]
    try:
        values = tuple(float(p) for p in parts)
    except (TypeError, ValueError):
        raise ValueError(f"source parameter {name} must be numbers, got {raw!r}") from None
    if len(values) != dim:
        raise ValueError(f"source parameter {name} needs {dim} components, got {len(values)}")
    return values


@dataclass(frozen=True)
class Source:
    """A generated source and the gradient norms known in closed form."""
    field: ScalarField
    kind: str
    params: dict[str, Any] = field(default_factory=dict)
    seed: int | None = None
    analytic: dict[float, float] = field(default_factory=dict)

    def gradient_norm(self, p: float) -> float:
        """Closed-form ``||grad f||_p`` when known, else the discrete norm."""
        p = float(p)
        if p in self.analytic:
            return self.analytic[p]
        return field_norm(gradient(self.field), p)


def _trig(x: tuple[np.ndarray, ...], lengths: tuple[float, ...], amplitude: float, mode: float) -> np.ndarray:
    out = np.full_like(x[0], amplitude)
    for xk, length in zip(x, lengths):
        out = out * np.cos(mode * math.pi * xk / length)
    return out


def _trig_norms(grid: Grid, amplitude: float, mode: float) -> dict[float, float]:
    if grid.kind not in ("interval", "rectangle") or mode != int(mode):
        return {}
    lengths = grid.lengths
    a = abs(amplitude) * abs(mode) * math.pi
    sup = a / min(lengths)
    box = math.prod(lengths)
    if grid.dim == 1:
        l2 = a / lengths[0] * math.sqrt(lengths[0] / 2.0)
    else:
        l2 = a * math.sqrt(sum(box / 4.0 / (length * length) for length in lengths))
    return {math.inf: sup, 2.0: l2}


def generate_source(
    kind: str,
    grid: Grid,
    params: Mapping[str, Any] | None = None,
    seed: int | None = None,
) -> Source:
    """Build a source field of the given kind.

    Kinds and parameters (defaults in brackets)::

        constant        value [1]
        affine          slope [1 per axis], offset [0]
        trig            amplitude [1], mode [1]: A prod_k cos(mode pi x_k / L_k)
        smoothed-noise  sigma [0.05], amplitude [1]: white noise mollified by a
                        Gaussian of width sigma, scaled to peak amplitude
        step            jump [1], position [0.5]: jump where x >= position * L
        step-plus-trig  step plus trig with amplitude [0.25]

    Raises:
        ValueError: unknown kind, bad parameter, or a random kind without seed.
    """
    params = dict(params or {})
    x = grid.centers()
    analytic: dict[float, float] = {}
    if kind == "constant":
        values = np.full(grid.shape, _number(params, "value", 1.0))
        analytic = {math.inf: 0.0, 2.0: 0.0, 1.0: 0.0}
    elif kind == "affine":
        slope = _vector(params, "slope", grid.dim, 1.0)
        values = _number(params, "offset", 0.0) + sum(a * xk for a, xk in zip(slope, x))
        norm = math.sqrt(sum(a * a for a in slope))
        analytic = {math.inf: norm, 2.0: norm * math.sqrt(grid.measure), 1.0: norm * grid.measure}
    elif kind == "trig":
        amplitude, mode = _number(params, "amplitude", 1.0), _number(params, "mode", 1.0)
        values = _trig(x, grid.lengths, amplitude, mode)
        analytic = _trig_norms(grid, amplitude, mode)
    elif kind == "smoothed-noise":
        if seed is None:
            raise ValueError("smoothed-noise needs a seed")
        sigma = _number(params, "sigma", 0.05)
        if not sigma > 0:
            raise ValueError(f"sigma must be > 0, got {sigma}")
        rng = np.random.default_rng(seed)
        noise = rng.standard_normal(grid.shape)
        smooth = ndimage.gaussian_filter(noise, sigma=[sigma / h for h in grid.h], mode="reflect")
        smooth = np.where(grid.mask, smooth, 0.0)
        peak = float(np.max(np.abs(smooth[grid.mask])))
        values = _number(params, "amplitude", 1.0) * smooth / (peak if peak > 0 else 1.0)
    elif kind in ("step", "step-plus-trig"):
        jump = _number(params, "jump", 1.0)
        position = _number(params, "position", 0.5) * grid.lengths[0]
        values = np.where(x[0] >= position, jump, 0.0)
        if kind == "step-plus-trig":
            values = values + _trig(x, grid.lengths, _number(params, "amplitude", 0.25), _number(params, "mode", 1.0))
    else:
        raise ValueError(f"unknown source kind {kind!r}; known: {list(SOURCE_KINDS)}")
    logger.debug("generated %s source on %s (seed=%s)", kind, grid.grid_id, seed)
    return Source(ScalarField(grid, values), kind, params, seed, analytic)
