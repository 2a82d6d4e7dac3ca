"""Bernstein quantities, cut-offs, boundary checks and manufactured solutions."""

from tvreg.bernstein.boundary import BoundarySignReport, boundary_sign_check, gamma_bound
from tvreg.bernstein.cutoff import CutoffProfile, CutoffSupportError
from tvreg.bernstein.manufactured import CATALOG, ClosedForm, closed_form, manufactured_source
from tvreg.bernstein.quantities import (
    BernsteinFields,
    LocalizedReport,
    MarginReport,
    bernstein_fields,
    cauchy_schwarz_gap,
    checked_sup,
    divergence_form_residual,
    elliptic_operator_L,
    eqw_residual,
    localized_inequality_check,
    squared_gradient,
    subsolution_margin,
    weighted_field,
)

__all__ = [
    "CATALOG",
    "BernsteinFields",
    "BoundarySignReport",
    "ClosedForm",
    "CutoffProfile",
    "CutoffSupportError",
    "LocalizedReport",
    "MarginReport",
    "bernstein_fields",
    "boundary_sign_check",
    "cauchy_schwarz_gap",
    "checked_sup",
    "closed_form",
    "divergence_form_residual",
    "elliptic_operator_L",
    "eqw_residual",
    "gamma_bound",
    "localized_inequality_check",
    "manufactured_source",
    "squared_gradient",
    "subsolution_margin",
    "weighted_field",
]
