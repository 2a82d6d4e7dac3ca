import math

import numpy as np
import pytest

from tvreg.bernstein import (
    CutoffProfile,
    CutoffSupportError,
    bernstein_fields,
    boundary_sign_check,
    cauchy_schwarz_gap,
    checked_sup,
    closed_form,
    divergence_form_residual,
    elliptic_operator_L,
    eqw_residual,
    gamma_bound,
    localized_inequality_check,
    manufactured_source,
    squared_gradient,
    subsolution_margin,
    weighted_field,
)
from tvreg.bernstein.stencils import checked_cells
from tvreg.core import ScalarField, distance_field, interval, rectangle


def _sup(field):
    return float(np.max(np.abs(field.values[checked_cells(field.grid)])))


def test_squared_gradient_of_affine():
    grid = interval(16)
    u = ScalarField.from_function(grid, lambda x: 2.0 * x)
    assert checked_sup(squared_gradient(u)) == pytest.approx(4.0)


def test_operator_collapses_for_flat_u():
    grid = interval(16)
    u = ScalarField.constant(grid, 0.0)
    w = ScalarField.from_function(grid, lambda x: x * x)
    lw = elliptic_operator_L(w, u, eps=1.0, delta=0.5)
    cells = checked_cells(grid)
    assert lw.values[cells] == pytest.approx(np.full(cells.sum(), -1.5 * 2.0))
    assert np.all(lw.values[~cells] == 0.0)


def test_operator_vanishes_on_constants(square, rng):
    u = ScalarField(square, rng.standard_normal(square.shape))
    w = ScalarField.constant(square, 3.0)
    assert _sup(elliptic_operator_L(w, u, 1e-2, 1e-2)) == pytest.approx(0.0, abs=1e-9)


def test_identities_vanish_for_constant_solution(square):
    u = ScalarField.constant(square, 0.5)
    f = ScalarField.constant(square, 0.5)
    assert np.all(eqw_residual(u, f, 1e-2, 1e-2, 1.0).values == 0.0)
    assert np.all(divergence_form_residual(u, f, 1e-2, 1e-2, 1.0).values == 0.0)
    margin = subsolution_margin(u, f, 1e-2, 1e-2, 1.0)
    assert margin.max_violation == 0.0
    assert margin.violating_cells == 0
    assert margin.argmax is None
    assert margin.fraction_above(0.0) == 0.0


def test_eqw_residual_converges_in_1d():
    errors = []
    for n in (16, 32, 64):
        u, f = manufactured_source("cos", 1.0, 0.0, 1.0, interval(n))
        errors.append(_sup(eqw_residual(u, f, 1.0, 0.0, 1.0)))
    for coarse, fine in zip(errors, errors[1:]):
        assert math.log2(coarse / fine) >= 0.8


def test_eqw_and_divergence_form_converge_in_2d():
    eqw, div = [], []
    for n in (16, 32):
        grid = rectangle(n, n)
        u, f = manufactured_source("cos-product", 0.5, 0.1, 1.0, grid)
        eqw.append(_sup(eqw_residual(u, f, 0.5, 0.1, 1.0)))
        div.append(float(np.max(np.abs(divergence_form_residual(u, f, 0.5, 0.1, 1.0).values))))
    assert eqw[1] < eqw[0] / 1.7
    assert div[1] < div[0] / 1.7


def test_manufactured_source_validation():
    with pytest.raises(ValueError, match="unknown"):
        closed_form("bessel")
    with pytest.raises(ValueError):
        manufactured_source("cos-product", 1.0, 0.0, 1.0, interval(16))
    with pytest.raises(ValueError):
        manufactured_source("cos", 0.0, 0.0, 1.0, interval(16))


def test_manufactured_constant_source():
    u, f = manufactured_source(closed_form("constant", value=2.0), 1e-2, 1e-2, 3.0, interval(8))
    assert f.values == pytest.approx(np.full(8, 6.0))
    assert u.values == pytest.approx(np.full(8, 2.0))


def test_cauchy_schwarz_gap_shrinks_under_refinement():
    gaps = []
    for n in (16, 64):
        u, _ = manufactured_source("cos", 1.0, 0.0, 1.0, interval(n))
        gaps.append(cauchy_schwarz_gap(u))
    assert gaps[1] <= gaps[0] + 1e-12


def test_weighted_field():
    grid = interval(8)
    w = ScalarField.constant(grid, 2.0)
    d = distance_field(grid)
    assert weighted_field(w, d, 0.0) is w
    z = weighted_field(w, d, 1.5)
    assert z.values == pytest.approx(2.0 * np.exp(1.5 * d.values))
    with pytest.raises(ValueError):
        weighted_field(w, d, -1.0)


def test_bernstein_fields_bundle(square, rng):
    u = ScalarField(square, rng.standard_normal(square.shape))
    fields = bernstein_fields(u, 1e-2, 1e-2)
    assert fields.gamma == 0.0
    assert fields.z.values == pytest.approx(fields.w.values)
    assert np.all(fields.hessian_norm_sq.values >= 0.0)


def test_cutoff_profile_shape_and_bounds():
    grid = rectangle(32, 32)
    cutoff = CutoffProfile((0.5, 0.5), 0.2, 0.5)
    phi, grad, hess = cutoff.evaluate(grid)
    assert phi.max() <= 1.0
    assert phi.max() > 0.95
    assert phi[0, 0] == 0.0
    c_grad, c_hess = cutoff.constants()
    grad_sq = sum(g * g for g in grad)
    assert np.all(grad_sq <= c_grad * phi**1.5 * (1 + 1e-9) + 1e-15)
    hess_norm = np.sqrt(sum(h * h for row in hess for h in row))
    assert np.all(hess_norm <= c_hess * np.sqrt(phi) * (1 + 1e-9) + 1e-15)


def test_cutoff_profile_validation():
    with pytest.raises(ValueError):
        CutoffProfile((0.5,), 0.2, 0.5, exponent=2)
    with pytest.raises(ValueError):
        CutoffProfile((0.5,), -0.2, 0.5)
    indicator = CutoffProfile((0.5,), 0.2, 0.5, exponent=0)
    assert indicator.constants() == (0.0, 0.0)
    phi, grad, _ = indicator.evaluate(interval(32))
    assert set(np.unique(phi)) <= {0.0, 1.0}
    assert np.all(grad[0] == 0.0)


def test_localized_check_on_constant_solution(square):
    u = ScalarField.constant(square, 1.0)
    report = localized_inequality_check(u, u, 1e-2, 1e-2, 1.0, CutoffProfile((0.5, 0.5), 0.2, 0.5))
    assert report.max_violation == 0.0
    assert report.argmax is None
    assert 0 < report.checked_cells < report.support_cells


def test_localized_check_rejects_support_touching_the_boundary(square):
    u = ScalarField.constant(square, 1.0)
    with pytest.raises(CutoffSupportError):
        localized_inequality_check(u, u, 1e-2, 1e-2, 1.0, CutoffProfile((0.1, 0.5), 0.2, 0.5))
    with pytest.raises(CutoffSupportError):
        localized_inequality_check(u, u, 1e-2, 1e-2, 1.0, CutoffProfile((5.0, 5.0), 0.1, 0.1))


def test_gamma_bound(ell):
    assert gamma_bound(rectangle(16, 16)) == 0.0
    assert gamma_bound(ell) > 0.0


def test_boundary_sign_check_excludes_reentrant_corners(ell):
    u = ScalarField.constant(ell, 1.0)
    report = boundary_sign_check(u, gamma_bound(ell))
    assert len(report.excluded) == 3
    assert report.max_derivative == 0.0
    assert len(report.derivatives) == len(ell.boundary_cells)


@pytest.mark.parametrize("name, eps, delta, grids", [
    ("cos", 1.0, 0.0, [interval(n) for n in (16, 32, 64)]),
    ("cos-product", 0.5, 0.1, [rectangle(n, n) for n in (16, 32)]),
])
def test_subsolution_and_localized_violations_decay(name, eps, delta, grids):
    margins, localized = [], []
    for grid in grids:
        u, f = manufactured_source(name, eps, delta, 1.0, grid)
        margin = subsolution_margin(u, f, eps, delta, 1.0)
        assert margin.checked_cells > 0
        margins.append(margin.max_violation)
        center = tuple(0.5 * length for length in grid.lengths)
        localized.append(localized_inequality_check(u, f, eps, delta, 1.0, CutoffProfile(center, 0.2, 0.5)).max_violation)
    assert all(v >= 0.0 for v in margins + localized)
    assert margins[-1] <= margins[0] + 1e-9
    assert localized[-1] <= localized[0] + 1e-9
