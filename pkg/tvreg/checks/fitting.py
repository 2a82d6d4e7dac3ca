"""Constant fitting across report corpora."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from tvreg.checks.estimates import (
    TAG_GLOBAL_LIPSCHITZ,
    TAG_LOCAL_LIPSCHITZ,
    TAG_LP_CONTRACTION,
    TAG_SOBOLEV,
)
from tvreg.checks.report import CorpusError, EstimateReport

logger = logging.getLogger("tvreg.checks")

LINEAR_TAGS = (TAG_GLOBAL_LIPSCHITZ, TAG_SOBOLEV, TAG_LP_CONTRACTION)
# these hold with c1 = 1 per report; their fit ratio only records the spread of the data
INFORMATIONAL_TAGS = (TAG_SOBOLEV, TAG_LP_CONTRACTION)
SCALE_TAGS = (TAG_LOCAL_LIPSCHITZ,)
MIN_REPORTS = 5
MAX_RATIO = 10.0


@dataclass(frozen=True)
class FitResult:
    """Fitted constants of one tag over one grid.

    Linear tags fit ``lam * lhs <= c1 (lam * rhs + c0)``; scale tags fit
    ``K``. ``ratio`` is max/min of the per-report constants and the fit is
    stable when it stays within ``max_ratio``. Informational fits never
    decide a verdict.
    """
    tag: str
    grid_id: str
    count: int
    c0: float | None
    c1: float | None
    K: float | None
    ratio: float
    max_ratio: float
    informational: bool = False

    @property
    def stable(self) -> bool:
        return bool(self.ratio <= self.max_ratio)

    def to_report(self, run_id: str = "") -> EstimateReport:
        """Summary row tagged ``<tag>-fit``: ``lhs`` is the ratio, ``rhs`` the limit.

        The ``pass`` cell stays empty for informational fits.
        """
        return EstimateReport(
            run_id=run_id,
            theorem_tag=f"{self.tag}-fit",
            lhs=self.ratio,
            rhs=self.max_ratio,
            slack=0.0,
            passed=None if self.informational else self.stable,
            grid_id=self.grid_id,
            c0=self.c0,
            c1=self.c1,
            C=self.K,
            K=self.K,
        )


def _ratio(values: np.ndarray) -> float:
    positive = values[values > 0]
    if positive.size < 2:
        return 1.0
    return float(np.max(positive) / np.min(positive))


def _fit_linear(reports: list[EstimateReport]) -> tuple[float, float, float]:
    lam = np.array([r.lam if r.lam is not None else 1.0 for r in reports])
    x = np.array([r.rhs for r in reports]) * lam
    y = np.array([r.lhs for r in reports]) * lam
    if np.ptp(x) > 0:
        design = np.column_stack([x, np.ones_like(x)])
        (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
        c0 = max(0.0, float(intercept / slope)) if slope > 0 else 0.0
    else:
        c0 = 0.0
    base = x + c0
    if not np.any(base > 0):
        # all data flat: no gradient to bound
        c0 = float(np.max(y))
        return c0, 1.0 if c0 > 0 else 0.0, 1.0
    implied = np.where(base > 0, y / np.where(base > 0, base, 1.0), 0.0)
    return c0, float(np.max(implied)), _ratio(implied)


def fit_constants(
    corpus: Sequence[EstimateReport],
    tag: str,
    min_reports: int = MIN_REPORTS,
    max_ratio: float = MAX_RATIO,
) -> FitResult:
    """Fit the constants of ``tag`` over the reports of one grid.

    Gradient-bound tags fit ``(c0, c1)``: ``c0`` from a least-squares line
    through ``(lam * rhs, lam * lhs)`` clamped at 0, then the smallest
    ``c1`` that bounds every report. Local tags take ``K = max K(R)``.

    Raises:
        CorpusError: fewer than ``min_reports`` reports of ``tag``, reports
            from several grids, or a tag that has no fit.
    """
    reports = [r for r in corpus if r.theorem_tag == tag]
    if len(reports) < min_reports:
        raise CorpusError(f"fitting {tag!r} needs at least {min_reports} reports, got {len(reports)}")
    grids = sorted({r.grid_id for r in reports})
    if len(grids) != 1:
        raise CorpusError(f"fit corpus for {tag!r} mixes grids: {grids}")
    if tag in LINEAR_TAGS:
        c0, c1, ratio = _fit_linear(reports)
        result = FitResult(
            tag, grids[0], len(reports), c0, c1, None, ratio, max_ratio, informational=tag in INFORMATIONAL_TAGS,
        )
    elif tag in SCALE_TAGS:
        ks = np.array([r.K if r.K is not None else 0.0 for r in reports])
        result = FitResult(tag, grids[0], len(reports), None, None, float(np.max(ks)), _ratio(ks), max_ratio)
    else:
        raise CorpusError(f"no constant fit defined for tag {tag!r}")
    logger.info(
        "fit %s on %s over %d reports: c0=%s c1=%s K=%s ratio=%.3g",
        tag, result.grid_id, result.count, result.c0, result.c1, result.K, result.ratio,
    )
    return result
