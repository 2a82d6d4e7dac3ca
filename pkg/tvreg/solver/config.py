"""Solver configuration for the regularized Neumann problem."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from tvreg.core.fields import ScalarField

FACE_SCHEMES = ("averaged", "cell")

Stage = tuple[float, float]


def _normalize_schedule(schedule: Any) -> tuple[Stage, ...]:
    """Accept ``[eps, ...]`` or ``[(eps, delta), ...]``; bare eps means delta = eps."""
    stages: list[Stage] = []
    for entry in schedule or ():
        if isinstance(entry, (tuple, list)):
            if len(entry) != 2:
                raise ValueError(f"schedule entry must be (eps, delta), got {entry!r}")
            eps, delta = float(entry[0]), float(entry[1])
        else:
            eps = delta = float(entry)
        stages.append((eps, delta))
    return tuple(stages)


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of ``-delta Lap u - div(grad u / sqrt(eps + |grad u|^2)) + lam u = f``.

    ``delta`` defaults to ``eps``. When ``mu`` is set the zero-order
    coefficient is ``lam = 1 / mu`` and data ``g`` enters as ``f = g / mu``
    (see :meth:`source_from_data`).
    """
    eps: float = 1e-2
    delta: float | None = None
    lam: float = 1.0
    mu: float | None = None
    tol_outer: float = 1e-6
    tol_inner: float = 1e-10
    max_outer: int = 300
    max_inner: int = 5000
    schedule: tuple[Stage, ...] = ()
    face_gradient: str = "averaged"

    def __post_init__(self) -> None:
        if self.delta is None:
            object.__setattr__(self, "delta", self.eps)
        if self.mu is not None:
            if not self.mu > 0:
                raise ValueError(f"mu must be > 0, got {self.mu}")
            object.__setattr__(self, "lam", 1.0 / self.mu)
        if not (self.eps > 0 and math.isfinite(self.eps)):
            raise ValueError(f"eps must be > 0, got {self.eps}")
        if not self.delta >= 0:
            raise ValueError(f"delta must be >= 0, got {self.delta}")
        if not self.lam > 0:
            raise ValueError(f"lam must be > 0, got {self.lam}")
        if not (self.tol_outer > 0 and self.tol_inner > 0):
            raise ValueError(
                f"tolerances must be > 0, got outer={self.tol_outer}, inner={self.tol_inner}"
            )
        if self.max_outer < 1 or self.max_inner < 1:
            raise ValueError("iteration caps must be >= 1")
        if self.face_gradient not in FACE_SCHEMES:
            raise ValueError(
                f"face_gradient must be one of {FACE_SCHEMES}, got {self.face_gradient!r}"
            )
        stages = _normalize_schedule(self.schedule)
        for eps, delta in stages:
            if not eps > 0 or delta < 0:
                raise ValueError(f"schedule stage needs eps > 0 and delta >= 0, got ({eps}, {delta})")
        for (a, _), (b, _) in zip(stages, stages[1:]):
            if not b < a:
                raise ValueError(f"schedule must be strictly decreasing in eps: {a} then {b}")
        object.__setattr__(self, "schedule", stages)

    @classmethod
    def from_mu(cls, mu: float, **kwargs: Any) -> SolverConfig:
        return cls(mu=mu, **kwargs)

    def source_from_data(self, g: ScalarField) -> ScalarField:
        """Translate data ``g`` of the ``mu`` family into the source ``f = g / mu``."""
        if self.mu is None:
            raise ValueError("source_from_data needs a mu-parameterized config")
        return g / self.mu

    def at_stage(self, eps: float, delta: float) -> SolverConfig:
        return dataclasses.replace(self, eps=eps, delta=delta)

    def stages(self) -> tuple[Stage, ...]:
        return self.schedule or ((self.eps, float(self.delta)),)


def geometric_schedule(first: float, last: float, count: int) -> tuple[Stage, ...]:
    """``count`` log-spaced stages from ``first`` down to ``last`` with delta = eps."""
    if count < 1 or not first > 0 or not last > 0:
        raise ValueError("geometric_schedule needs count >= 1 and positive endpoints")
    values = np.geomspace(first, last, count) if count > 1 else np.array([first])
    return tuple((float(v), float(v)) for v in values)
