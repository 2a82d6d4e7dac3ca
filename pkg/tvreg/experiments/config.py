"""Experiment configuration: flat ``key = value`` files plus overrides.

Keys (all optional unless noted)::

    run_id            label stamped on every report            (default "run")
    domain            interval | rectangle | lshape | disc     (default interval)
    n                 cells per axis (nx for rectangles)       (default 256)
    ny                rectangle cells along y                  (default n)
    length, ly        box side lengths                         (default 1.0)
    source            constant | affine | trig | smoothed-noise | step | step-plus-trig | pgm
    source.<name>     parameter handed to the source generator (e.g. source.sigma = 0.05)
    image             PGM path, required for source = pgm
    seed              integer, required for random sources
    corpus            number of sources, seeds seed .. seed+corpus-1 (default 1)
    mu | lambda       exactly one, or neither for lambda = 1
    eps, delta        regularization (delta defaults to eps)
    schedule          comma list of decreasing eps values, delta = eps per stage
    oracle            auto (taut string in 1D) | dual (dual projection, any grid)
    tol_outer, tol_inner, max_outer, max_inner, face_gradient
    checks            comma list of report tags (default: every tag the domain supports)
    slack.gradient, slack.tv, boundary.factor
    sobolev.p, lp.p   comma lists of exponents ("inf" allowed)
    window.radii      comma list of radii for the R-sweep
    window.rho        expansion factor                         (default 0.2)
    window.center     comma list of coordinates (default box centre)
    mu_sweep          comma list of mu values
    mms.field, mms.n0, mms.levels, mms.eps, mms.delta, mms.lambda
"""

from __future__ import annotations

import dataclasses
import logging
import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from tvreg.checks.estimates import (
    TAG_BOUNDARY_SIGN,
    TAG_BV,
    TAG_GLOBAL_LIPSCHITZ,
    TAG_LOCAL_LIPSCHITZ,
    TAG_LP_CONTRACTION,
    TAG_MAX_PRINCIPLE,
    TAG_REGULARIZED_BV,
    TAG_SOBOLEV,
    TAG_TV_ENERGY,
)
from tvreg.checks.sweeps import ORACLE_KINDS
from tvreg.solver.config import FACE_SCHEMES, SolverConfig

logger = logging.getLogger("tvreg.experiments")

DOMAINS = ("interval", "rectangle", "lshape", "disc")
RANDOM_SOURCES = ("smoothed-noise",)
ALL_CHECKS = (
    TAG_GLOBAL_LIPSCHITZ,
    TAG_SOBOLEV,
    TAG_LOCAL_LIPSCHITZ,
    TAG_BV,
    TAG_MAX_PRINCIPLE,
    TAG_LP_CONTRACTION,
    TAG_REGULARIZED_BV,
    TAG_TV_ENERGY,
    TAG_BOUNDARY_SIGN,
)


class ConfigError(ValueError):
    """Invalid experiment configuration."""


def parse_config_text(text: str, origin: str = "<config>") -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment, blank lines are skipped."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{origin}:{lineno}: empty key")
        values[key] = value
    return values


def apply_overrides(values: Mapping[str, str], overrides: Iterable[str]) -> dict[str, str]:
    """Apply ``key=value`` overrides in order."""
    merged = dict(values)
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must look like key=value, got {item!r}")
        key, value = (part.strip() for part in item.split("=", 1))
        if not key:
            raise ConfigError(f"override {item!r} has an empty key")
        merged[key] = value
    return merged


def _float(values: Mapping[str, str], key: str, default: float | None) -> float | None:
    raw = values.get(key)
    if raw is None or raw == "":
        return default
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key} must be a number, got {raw!r}") from None


def _int(values: Mapping[str, str], key: str, default: int | None) -> int | None:
    raw = values.get(key)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {raw!r}") from None


def _floats(values: Mapping[str, str], key: str, default: tuple[float, ...] = ()) -> tuple[float, ...]:
    raw = values.get(key)
    if raw is None or raw.strip() == "":
        return default
    try:
        return tuple(float(part) for part in raw.split(",") if part.strip())
    except ValueError:
        raise ConfigError(f"{key} must be a comma list of numbers, got {raw!r}") from None


def _words(values: Mapping[str, str], key: str) -> tuple[str, ...] | None:
    raw = values.get(key)
    if raw is None:
        return None
    return tuple(part.strip() for part in raw.split(",") if part.strip())


def _num(value: float) -> str:
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(float(value))


@dataclass(frozen=True)
class ExperimentConfig:
    run_id: str = "run"
    domain: str = "interval"
    n: int = 256
    ny: int | None = None
    length: float = 1.0
    ly: float | None = None
    source: str = "trig"
    source_params: dict[str, str] = field(default_factory=dict)
    image: str | None = None
    seed: int | None = None
    corpus: int = 1
    mu: float | None = None
    lam: float | None = None
    eps: float = 1e-2
    delta: float | None = None
    schedule: tuple[float, ...] = ()
    oracle: str = "auto"
    tol_outer: float = 1e-6
    tol_inner: float = 1e-10
    max_outer: int = 300
    max_inner: int = 5000
    face_gradient: str = "averaged"
    checks: tuple[str, ...] | None = None
    gradient_slack: float = 0.05
    tv_slack: float = 1e-3
    boundary_factor: float = 10.0
    sobolev_p: tuple[float, ...] = (2.0, 4.0, 8.0, math.inf)
    lp_p: tuple[float, ...] = (2.0, math.inf)
    window_radii: tuple[float, ...] = ()
    window_rho: float = 0.2
    window_center: tuple[float, ...] | None = None
    mu_sweep: tuple[float, ...] = ()
    mms_field: str = "cos"
    mms_n0: int = 16
    mms_levels: int = 3
    mms_eps: float = 1.0
    mms_delta: float = 0.0
    mms_lam: float = 1.0
    out: str | None = None

    def __post_init__(self) -> None:
        if self.domain not in DOMAINS:
            raise ConfigError(f"domain must be one of {DOMAINS}, got {self.domain!r}")
        if self.mu is not None and self.lam is not None:
            raise ConfigError("set either mu or lambda, not both")
        if self.source in RANDOM_SOURCES and self.seed is None:
            raise ConfigError(f"source {self.source!r} is random and needs a seed")
        if self.source == "pgm" and not self.image:
            raise ConfigError("source = pgm needs an image path")
        if self.corpus < 1:
            raise ConfigError(f"corpus must be >= 1, got {self.corpus}")
        if self.corpus > 1 and self.source not in RANDOM_SOURCES:
            raise ConfigError(f"corpus = {self.corpus} needs a random source, got {self.source!r}")
        if self.face_gradient not in FACE_SCHEMES:
            raise ConfigError(f"face_gradient must be one of {FACE_SCHEMES}, got {self.face_gradient!r}")
        if self.oracle not in ORACLE_KINDS:
            raise ConfigError(f"oracle must be one of {ORACLE_KINDS}, got {self.oracle!r}")
        if self.checks is not None:
            unknown = sorted(set(self.checks) - set(ALL_CHECKS))
            if unknown:
                raise ConfigError(f"unknown checks {unknown}; known: {list(ALL_CHECKS)}")
        if self.mms_levels < 2:
            raise ConfigError(f"mms.levels must be >= 2, got {self.mms_levels}")
        try:
            self.solver_config()
        except ValueError as exc:
            raise ConfigError(f"invalid solver settings: {exc}") from exc

    @property
    def random_source(self) -> bool:
        return self.source in RANDOM_SOURCES

    def solver_config(self) -> SolverConfig:
        kwargs: dict[str, Any] = {
            "eps": self.eps,
            "delta": self.delta,
            "tol_outer": self.tol_outer,
            "tol_inner": self.tol_inner,
            "max_outer": self.max_outer,
            "max_inner": self.max_inner,
            "schedule": self.schedule,
            "face_gradient": self.face_gradient,
        }
        if self.mu is not None:
            return SolverConfig(mu=self.mu, **kwargs)
        return SolverConfig(lam=self.lam if self.lam is not None else 1.0, **kwargs)

    def requested_checks(self, dim: int, convex: bool) -> tuple[str, ...]:
        """The explicit list, or every tag whose hypothesis the domain meets."""
        if self.checks is not None:
            return self.checks
        tags = []
        for tag in ALL_CHECKS:
            if tag in (TAG_BV, TAG_REGULARIZED_BV) and dim != 1:
                continue
            if tag == TAG_SOBOLEV and not convex:
                continue
            if tag == TAG_LOCAL_LIPSCHITZ and not self.window_radii:
                continue
            tags.append(tag)
        return tuple(tags)

    def with_overrides(self, overrides: Iterable[str]) -> ExperimentConfig:
        return ExperimentConfig.from_mapping(apply_overrides(self.to_mapping(), overrides))

    @classmethod
    def from_mapping(cls, values: Mapping[str, str]) -> ExperimentConfig:
        known = {
            "run_id", "domain", "n", "ny", "length", "ly", "source", "image", "seed", "corpus",
            "mu", "lambda", "eps", "delta", "schedule", "oracle", "tol_outer", "tol_inner", "max_outer",
            "max_inner", "face_gradient", "checks", "slack.gradient", "slack.tv", "boundary.factor",
            "sobolev.p", "lp.p", "window.radii", "window.rho", "window.center", "mu_sweep",
            "mms.field", "mms.n0", "mms.levels", "mms.eps", "mms.delta", "mms.lambda", "out",
        }
        unknown = sorted(k for k in values if k not in known and not k.startswith("source."))
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        d = cls()
        center = _floats(values, "window.center")
        return cls(
            run_id=values.get("run_id", d.run_id),
            domain=values.get("domain", d.domain),
            n=_int(values, "n", d.n),
            ny=_int(values, "ny", None),
            length=_float(values, "length", d.length),
            ly=_float(values, "ly", None),
            source=values.get("source", d.source),
            source_params={k[len("source."):]: v for k, v in sorted(values.items()) if k.startswith("source.")},
            image=values.get("image") or None,
            seed=_int(values, "seed", None),
            corpus=_int(values, "corpus", d.corpus),
            mu=_float(values, "mu", None),
            lam=_float(values, "lambda", None),
            eps=_float(values, "eps", d.eps),
            delta=_float(values, "delta", None),
            schedule=_floats(values, "schedule"),
            oracle=values.get("oracle", d.oracle),
            tol_outer=_float(values, "tol_outer", d.tol_outer),
            tol_inner=_float(values, "tol_inner", d.tol_inner),
            max_outer=_int(values, "max_outer", d.max_outer),
            max_inner=_int(values, "max_inner", d.max_inner),
            face_gradient=values.get("face_gradient", d.face_gradient),
            checks=_words(values, "checks"),
            gradient_slack=_float(values, "slack.gradient", d.gradient_slack),
            tv_slack=_float(values, "slack.tv", d.tv_slack),
            boundary_factor=_float(values, "boundary.factor", d.boundary_factor),
            sobolev_p=_floats(values, "sobolev.p", d.sobolev_p),
            lp_p=_floats(values, "lp.p", d.lp_p),
            window_radii=_floats(values, "window.radii"),
            window_rho=_float(values, "window.rho", d.window_rho),
            window_center=center or None,
            mu_sweep=_floats(values, "mu_sweep"),
            mms_field=values.get("mms.field", d.mms_field),
            mms_n0=_int(values, "mms.n0", d.mms_n0),
            mms_levels=_int(values, "mms.levels", d.mms_levels),
            mms_eps=_float(values, "mms.eps", d.mms_eps),
            mms_delta=_float(values, "mms.delta", d.mms_delta),
            mms_lam=_float(values, "mms.lambda", d.mms_lam),
            out=values.get("out") or None,
        )

    def to_mapping(self) -> dict[str, str]:
        """Key/value form that :meth:`from_mapping` reads back to an equal config."""
        out: dict[str, str] = {
            "run_id": self.run_id,
            "domain": self.domain,
            "n": str(self.n),
            "length": _num(self.length),
            "source": self.source,
            "corpus": str(self.corpus),
            "eps": _num(self.eps),
            "oracle": self.oracle,
            "tol_outer": _num(self.tol_outer),
            "tol_inner": _num(self.tol_inner),
            "max_outer": str(self.max_outer),
            "max_inner": str(self.max_inner),
            "face_gradient": self.face_gradient,
            "slack.gradient": _num(self.gradient_slack),
            "slack.tv": _num(self.tv_slack),
            "boundary.factor": _num(self.boundary_factor),
            "sobolev.p": ",".join(_num(p) for p in self.sobolev_p),
            "lp.p": ",".join(_num(p) for p in self.lp_p),
            "window.rho": _num(self.window_rho),
            "mms.field": self.mms_field,
            "mms.n0": str(self.mms_n0),
            "mms.levels": str(self.mms_levels),
            "mms.eps": _num(self.mms_eps),
            "mms.delta": _num(self.mms_delta),
            "mms.lambda": _num(self.mms_lam),
        }
        optional = {
            "ny": None if self.ny is None else str(self.ny),
            "ly": None if self.ly is None else _num(self.ly),
            "image": self.image,
            "seed": None if self.seed is None else str(self.seed),
            "mu": None if self.mu is None else _num(self.mu),
            "lambda": None if self.lam is None else _num(self.lam),
            "delta": None if self.delta is None else _num(self.delta),
            "schedule": ",".join(_num(v) for v in self.schedule) or None,
            "checks": None if self.checks is None else ",".join(self.checks),
            "window.radii": ",".join(_num(v) for v in self.window_radii) or None,
            "window.center": None if self.window_center is None else ",".join(_num(v) for v in self.window_center),
            "mu_sweep": ",".join(_num(v) for v in self.mu_sweep) or None,
            "out": self.out,
        }
        out.update({k: v for k, v in optional.items() if v is not None})
        out.update({f"source.{k}": v for k, v in self.source_params.items()})
        return dict(sorted(out.items()))

    def to_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.to_mapping().items())

    def replace(self, **changes: Any) -> ExperimentConfig:
        return dataclasses.replace(self, **changes)


def load_config(path: str | Path | None = None, overrides: Iterable[str] = ()) -> ExperimentConfig:
    """Read a config file (optional), apply overrides, validate.

    Raises:
        ConfigError: unreadable file, syntax error, unknown key or invalid value.
    """
    values: dict[str, str] = {}
    if path is not None:
        p = Path(path)
        try:
            text = p.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {p}: {exc}") from exc
        values = parse_config_text(text, origin=str(p))
    values = apply_overrides(values, overrides)
    config = ExperimentConfig.from_mapping(values)
    logger.debug("loaded config with %d keys", len(values))
    return config
