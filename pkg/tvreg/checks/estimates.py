"""Norm inequalities for discrete minimizers turned into reports."""

from __future__ import annotations

import logging
import math

import numpy as np

from tvreg.bernstein.boundary import boundary_sign_check, gamma_bound
from tvreg.checks.report import (
    EstimateReport,
    HypothesisError,
    LocalWindow,
    Provenance,
    make_report,
)
from tvreg.core.fields import ScalarField
from tvreg.core.operators import field_norm, gradient, require_same_grid, total_variation

logger = logging.getLogger("tvreg.checks")

GRADIENT_SLACK = 0.05
TV_SLACK = 1e-3
MAX_PRINCIPLE_TOL = 1e-8

TAG_GLOBAL_LIPSCHITZ = "global-lipschitz"
TAG_SOBOLEV = "sobolev"
TAG_LOCAL_LIPSCHITZ = "local-lipschitz"
TAG_BV = "bv"
TAG_MAX_PRINCIPLE = "max-principle"
TAG_LP_CONTRACTION = "lp-contraction"
TAG_REGULARIZED_BV = "regularized-bv"
TAG_TV_ENERGY = "tv-energy"
TAG_BOUNDARY_SIGN = "boundary-sign"


def _check_lam(lam: float) -> None:
    if not lam > 0:
        raise ValueError(f"lam must be > 0, got {lam}")


def _exponent(p: float) -> float:
    p = float(p)
    if math.isnan(p):
        raise ValueError("norm exponent is NaN")
    return p


def check_global_lipschitz(
    u: ScalarField,
    f: ScalarField,
    lam: float = 1.0,
    slack: float = GRADIENT_SLACK,
    provenance: Provenance | None = None,
) -> EstimateReport:
    """``||grad u||_inf <= ||grad f||_inf / lam``.

    On nonconvex grids the pair is reported with ``passed=None``; the
    constants are fitted across a corpus by
    :func:`~tvreg.checks.fitting.fit_constants`.
    """
    require_same_grid(u.grid, f.grid)
    _check_lam(lam)
    lhs = field_norm(gradient(u), math.inf)
    rhs = field_norm(gradient(f), math.inf) / lam
    if u.grid.convex:
        return make_report(TAG_GLOBAL_LIPSCHITZ, lhs, rhs, slack, u.grid, provenance, lam=lam, c0=0.0, c1=1.0)
    logger.debug("global Lipschitz check on nonconvex %s deferred to corpus fit", u.grid.grid_id)
    return make_report(TAG_GLOBAL_LIPSCHITZ, lhs, rhs, slack, u.grid, provenance, passed=None, lam=lam)


def check_sobolev(
    u: ScalarField,
    f: ScalarField,
    p: float,
    lam: float = 1.0,
    slack: float = GRADIENT_SLACK,
    provenance: Provenance | None = None,
) -> EstimateReport:
    """``||grad u||_p <= ||grad f||_p / lam`` for ``p`` in ``[2, inf]`` on convex grids.

    ``p = 1`` on a 1D grid is the BV estimate and goes to :func:`check_bv_1d`.

    Raises:
        HypothesisError: nonconvex grid, or ``p < 2`` outside that 1D case.
    """
    require_same_grid(u.grid, f.grid)
    _check_lam(lam)
    p = _exponent(p)
    if p == 1.0 and u.grid.dim == 1:
        return check_bv_1d(u, f, lam=lam, provenance=provenance)
    if p < 2:
        raise HypothesisError(f"gradient norm preservation is only claimed for p >= 2, got p={p:g}")
    if not u.grid.convex:
        raise HypothesisError(f"gradient norm preservation needs a convex domain, {u.grid.grid_id} is not")
    lhs = field_norm(gradient(u), p)
    rhs = field_norm(gradient(f), p) / lam
    return make_report(TAG_SOBOLEV, lhs, rhs, slack, u.grid, provenance, lam=lam, p=p, c0=0.0, c1=1.0)


def local_lipschitz_constant(lhs: float, rhs: float, radius: float, lam: float, mu: float) -> float:
    """``K(R) = max(0, sup_{B_R} |grad u| - sup_{B_(1+rho)R} |grad f| / lam) R^2 lam / mu``."""
    return max(0.0, lhs - rhs) * radius * radius * lam / mu


def check_local_lipschitz(
    u: ScalarField,
    f: ScalarField,
    window: LocalWindow,
    lam: float = 1.0,
    mu: float = 1.0,
    slack: float = GRADIENT_SLACK,
    provenance: Provenance | None = None,
) -> EstimateReport:
    """Local gradient bound on ``B_R`` from the data on ``B_(1+rho)R``.

    The report carries ``K(R)``; its verdict is deferred to an R-sweep fit.

    Raises:
        WindowError: the window leaves the domain.
    """
    require_same_grid(u.grid, f.grid)
    _check_lam(lam)
    if not mu > 0:
        raise ValueError(f"mu must be > 0, got {mu}")
    inner, outer = window.validate(u.grid)
    lhs = float(np.max(gradient(u).magnitude()[inner]))
    rhs = float(np.max(gradient(f).magnitude()[outer])) / lam
    K = local_lipschitz_constant(lhs, rhs, window.radius, lam, mu)
    return make_report(
        TAG_LOCAL_LIPSCHITZ, lhs, rhs, slack, u.grid, provenance,
        passed=None, lam=lam, K=K, C=K, R=window.radius, rho=window.rho,
    )


def _require_1d(u: ScalarField, what: str) -> None:
    if u.grid.dim != 1:
        raise ValueError(f"{what} needs a 1D grid, got {u.grid.grid_id}")


def check_bv_1d(
    u: ScalarField,
    f: ScalarField,
    lam: float = 1.0,
    slack: float = TV_SLACK,
    provenance: Provenance | None = None,
) -> EstimateReport:
    """``TV(u) <= TV(f / lam)`` and ``||u||_1 + TV(u) <= ||f / lam||_1 + TV(f / lam)``.

    The report holds the total variations; it passes only when both hold.
    """
    require_same_grid(u.grid, f.grid)
    _require_1d(u, "the BV estimate")
    _check_lam(lam)
    data = f / lam
    tv_u, tv_f = total_variation(u), total_variation(data)
    bv_u = field_norm(u, 1) + tv_u
    bv_f = field_norm(data, 1) + tv_f
    passed = bool(tv_u <= tv_f * (1.0 + slack) and bv_u <= bv_f * (1.0 + slack))
    return make_report(TAG_BV, tv_u, tv_f, slack, u.grid, provenance, passed=passed, lam=lam, p=1.0)


def check_max_principle(
    u: ScalarField,
    f: ScalarField,
    lam: float = 1.0,
    provenance: Provenance | None = None,
) -> EstimateReport:
    """``||u||_inf <= ||f||_inf / lam + 1e-8``."""
    require_same_grid(u.grid, f.grid)
    _check_lam(lam)
    lhs = field_norm(u, math.inf)
    rhs = field_norm(f, math.inf) / lam + MAX_PRINCIPLE_TOL
    return make_report(TAG_MAX_PRINCIPLE, lhs, rhs, 0.0, u.grid, provenance, lam=lam, p=math.inf)


def check_lp_contraction(
    u: ScalarField,
    f: ScalarField,
    p: float,
    lam: float = 1.0,
    slack: float = GRADIENT_SLACK,
    provenance: Provenance | None = None,
) -> EstimateReport:
    """``||u||_p <= ||f||_p / lam`` for ``p`` in ``[2, inf]``, any domain."""
    require_same_grid(u.grid, f.grid)
    _check_lam(lam)
    p = _exponent(p)
    if p < 2:
        raise HypothesisError(f"Lp contraction is checked for p >= 2, got p={p:g}")
    lhs = field_norm(u, p)
    rhs = field_norm(f, p) / lam
    return make_report(TAG_LP_CONTRACTION, lhs, rhs, slack, u.grid, provenance, lam=lam, p=p)


def check_regularized_bv(
    u: ScalarField,
    f: ScalarField,
    eps: float,
    lam: float = 1.0,
    slack: float = TV_SLACK,
    provenance: Provenance | None = None,
) -> EstimateReport:
    """``TV(u) <= TV(f) / lam + sqrt(eps) |Omega|`` for a regularized 1D solution."""
    require_same_grid(u.grid, f.grid)
    _require_1d(u, "the regularized BV estimate")
    _check_lam(lam)
    if not eps >= 0:
        raise ValueError(f"eps must be >= 0, got {eps}")
    lhs = total_variation(u)
    rhs = total_variation(f) / lam + math.sqrt(eps) * u.grid.measure
    return make_report(TAG_REGULARIZED_BV, lhs, rhs, slack, u.grid, provenance, lam=lam, p=1.0)


def check_tv_energy_bound(
    u: ScalarField,
    g: ScalarField,
    mu: float,
    provenance: Provenance | None = None,
) -> EstimateReport:
    """``TV(u) <= ||g||_2^2 / (2 mu)``, the comparison of ``u`` with 0."""
    require_same_grid(u.grid, g.grid)
    if not mu > 0:
        raise ValueError(f"mu must be > 0, got {mu}")
    lhs = total_variation(u)
    rhs = field_norm(g, 2) ** 2 / (2.0 * mu)
    return make_report(TAG_TV_ENERGY, lhs, rhs, 0.0, u.grid, provenance, lam=1.0 / mu, p=2.0)


def check_boundary_sign(
    u: ScalarField,
    gamma: float | None = None,
    factor: float = 10.0,
    provenance: Provenance | None = None,
) -> EstimateReport:
    """Outward difference of ``z = w exp(gamma d)`` on the boundary ``<= factor * h``.

    ``gamma`` defaults to :func:`~tvreg.bernstein.boundary.gamma_bound`.
    Reentrant-corner cells are excluded.
    """
    gamma = gamma_bound(u.grid) if gamma is None else float(gamma)
    result = boundary_sign_check(u, gamma)
    rhs = factor * max(u.grid.h)
    return make_report(TAG_BOUNDARY_SIGN, result.max_derivative, rhs, 0.0, u.grid, provenance, C=gamma)
