import dataclasses
import math

import numpy as np
import pytest

from tvreg.checks import (
    CorpusError,
    EstimateReport,
    HypothesisError,
    LocalWindow,
    Provenance,
    WindowError,
    check_boundary_sign,
    check_bv_1d,
    check_global_lipschitz,
    check_local_lipschitz,
    check_lp_contraction,
    check_max_principle,
    check_regularized_bv,
    check_sobolev,
    check_tv_energy_bound,
    fit_constants,
    mu_invariance_sweep,
)
from tvreg.checks.report import make_report, verdict
from tvreg.checks.sweeps import outer_budget
from tvreg.core import ScalarField, interval, rectangle
from tvreg.experiments import generate_source
from tvreg.solver import SolverConfig, continuation_solve


def _report(tag="global-lipschitz", lhs=1.0, rhs=1.0, grid_id="rect-16x16", **extra):
    return EstimateReport(
        run_id="r", theorem_tag=tag, lhs=lhs, rhs=rhs, slack=0.05, passed=None, grid_id=grid_id, **extra
    )


def test_verdict_applies_relative_slack():
    assert verdict(1.0, 1.0, 0.0)
    assert verdict(1.04, 1.0, 0.05)
    assert not verdict(1.06, 1.0, 0.05)


def test_report_row_round_trip():
    report = _report(lhs=0.1, rhs=1.0 / 3.0, lam=2.0, p=math.inf, K=0.25, mu=0.5)
    row = report.to_row()
    assert row["pass"] == ""
    assert row["lambda"] == "2.0"
    assert EstimateReport.from_row(row) == report
    decided = dataclasses.replace(report, passed=False)
    assert EstimateReport.from_row(decided.to_row()).failed


def test_report_row_rejects_bad_cells():
    row = _report().to_row()
    with pytest.raises(ValueError, match="pass"):
        EstimateReport.from_row({**row, "pass": "maybe"})
    del row["rho"]
    with pytest.raises(ValueError, match="missing"):
        EstimateReport.from_row(row)


def test_make_report_prefers_provenance_lambda(square):
    report = make_report("x", 1.0, 2.0, 0.0, square, Provenance(run_id="a", lam=3.0), lam=1.0)
    assert report.lam == 3.0
    assert report.passed is True
    assert report.grid_id == square.grid_id


def test_global_lipschitz_on_convex_and_nonconvex_grids(square, ell, rng):
    f = ScalarField(square, rng.standard_normal(square.shape))
    report = check_global_lipschitz(f * 0.5, f)
    assert report.passed is True
    assert report.lhs == pytest.approx(0.5 * report.rhs)
    g = ScalarField(ell, rng.standard_normal(ell.shape))
    deferred = check_global_lipschitz(g, g)
    assert deferred.passed is None
    assert not deferred.failed


def test_global_lipschitz_fails_on_steeper_solution(square, rng):
    f = ScalarField(square, rng.standard_normal(square.shape))
    assert check_global_lipschitz(f * 2.0, f).failed


def test_sobolev_hypotheses(square, ell, line, rng):
    f = ScalarField(square, rng.standard_normal(square.shape))
    assert check_sobolev(f, f, 2).passed is True
    assert check_sobolev(f, f, math.inf).p == math.inf
    with pytest.raises(HypothesisError):
        check_sobolev(f, f, 1.5)
    g = ScalarField(ell, rng.standard_normal(ell.shape))
    with pytest.raises(HypothesisError):
        check_sobolev(g, g, 2)
    h = ScalarField(line, rng.standard_normal(line.shape))
    assert check_sobolev(h, h, 1).theorem_tag == "bv"


def test_local_lipschitz_window(square, rng):
    f = ScalarField(square, rng.standard_normal(square.shape))
    window = LocalWindow((0.5, 0.5), 0.2, 0.5)
    report = check_local_lipschitz(f, f, window)
    assert report.passed is None
    assert report.K == 0.0
    assert report.R == 0.2
    steep = check_local_lipschitz(f * 3.0, f, window, lam=1.0, mu=1.0)
    assert steep.K > 0.0
    with pytest.raises(WindowError):
        check_local_lipschitz(f, f, LocalWindow((0.1, 0.5), 0.2, 0.5))
    with pytest.raises(WindowError):
        LocalWindow((0.5, 0.5), 0.0, 0.5)
    with pytest.raises(WindowError):
        LocalWindow((0.5,), 0.1, 0.5).validate(square)


def test_local_window_rejects_exterior_cells(ell):
    with pytest.raises(WindowError, match="exterior"):
        LocalWindow((0.75, 0.75), 0.1, 0.5).validate(ell)


def test_bv_and_regularized_bv(step_1d, square):
    assert check_bv_1d(step_1d * 0.5, step_1d).passed is True
    assert check_bv_1d(step_1d * 2.0, step_1d).failed
    assert check_regularized_bv(step_1d, step_1d, 1e-2).passed is True
    u = ScalarField.constant(square, 1.0)
    with pytest.raises(ValueError, match="1D"):
        check_bv_1d(u, u)


def test_max_principle_and_lp_contraction(square, rng):
    f = ScalarField(square, rng.standard_normal(square.shape))
    assert check_max_principle(f * 0.5, f).passed is True
    assert check_max_principle(f * 2.0, f).failed
    assert check_lp_contraction(f * 0.5, f, 2).passed is True
    with pytest.raises(HypothesisError):
        check_lp_contraction(f, f, 1)
    with pytest.raises(ValueError):
        check_max_principle(f, f, lam=0.0)


def test_tv_energy_bound_for_zero(step_1d):
    report = check_tv_energy_bound(ScalarField.constant(step_1d.grid, 0.0), step_1d, 0.1)
    assert report.lhs == 0.0
    assert report.passed is True
    assert report.lam == pytest.approx(10.0)


def test_boundary_sign_on_constant(square):
    report = check_boundary_sign(ScalarField.constant(square, 2.0))
    assert report.lhs == 0.0
    assert report.C == 0.0
    assert report.passed is True


def test_fit_constants_linear():
    corpus = [_report(lhs=2.0 * x, rhs=x, lam=1.0) for x in (0.5, 1.0, 1.5, 2.0, 3.0)]
    fit = fit_constants(corpus, "global-lipschitz")
    assert fit.count == 5
    assert fit.c0 == pytest.approx(0.0, abs=1e-9)
    assert fit.c1 == pytest.approx(2.0)
    assert fit.stable
    row = fit.to_report("corpus")
    assert row.theorem_tag == "global-lipschitz-fit"
    assert row.passed is True


def test_fit_constants_scale_tag():
    corpus = [_report(tag="local-lipschitz", K=k) for k in (0.1, 0.2, 0.5)]
    fit = fit_constants(corpus, "local-lipschitz", min_reports=3)
    assert fit.K == 0.5
    assert fit.ratio == pytest.approx(5.0)
    assert fit.stable
    wild = [_report(tag="local-lipschitz", K=k) for k in (0.01, 0.5, 1.0)]
    assert fit_constants(wild, "local-lipschitz", min_reports=3).to_report().failed


def test_fit_constants_errors():
    with pytest.raises(CorpusError, match="at least"):
        fit_constants([_report()] * 4, "global-lipschitz")
    mixed = [_report(grid_id=f"g{k % 2}") for k in range(6)]
    with pytest.raises(CorpusError, match="mixes"):
        fit_constants(mixed, "global-lipschitz")
    with pytest.raises(CorpusError, match="no constant fit"):
        fit_constants([_report(tag="bv")] * 5, "bv")


def test_mu_sweep_compares_against_the_data():
    grid = interval(32)
    g = ScalarField.from_function(grid, lambda x: np.where(x >= 0.5, 1.0, 0.0))
    result = mu_invariance_sweep(g, (0.05, 0.1), cfg=SolverConfig(eps=1e-2))
    assert [row.mu for row in result.rows] == [0.05, 0.1]
    assert [row.lam for row in result.rows] == pytest.approx([20.0, 10.0])
    rhs = result.rhs_values("global-lipschitz")
    assert len(rhs) == 2
    assert rhs[0] == rhs[1]
    assert len(result.reports) == 2 * 4 + 1
    assert result.reports[-1].theorem_tag == "tv-monotone"
    assert all(row.oracle_distance is not None for row in result.rows)


def test_mu_sweep_validation(step_1d):
    with pytest.raises(ValueError):
        mu_invariance_sweep(step_1d, ())
    with pytest.raises(ValueError):
        mu_invariance_sweep(step_1d, (0.1, -1.0))
    with pytest.raises(ValueError):
        mu_invariance_sweep(step_1d, (0.1,), grid=rectangle(8, 8))


def test_outer_budget_grows_with_lambda():
    base = SolverConfig(max_outer=300)
    assert outer_budget(base, 0.1) == 300
    assert outer_budget(base, 1.0) == 300
    assert outer_budget(base, 10.0) == 3000


def test_convex_solve_meets_gradient_bounds():
    grid = rectangle(24, 24)
    f = generate_source("trig", grid).field
    u = continuation_solve(f, SolverConfig(eps=1e-2)).u
    assert check_global_lipschitz(u, f).passed is True
    for p in (2, 4, 8, math.inf):
        report = check_sobolev(u, f, p)
        assert report.passed is True, (p, report.lhs, report.rhs)
    assert check_max_principle(u, f).passed is True


def test_boundary_sign_on_a_solved_convex_problem():
    grid = rectangle(32, 32)
    f = generate_source("affine", grid, {"slope": "1,0"}).field
    u = continuation_solve(f, SolverConfig(eps=1e-2)).u
    report = check_boundary_sign(u)
    assert report.C == 0.0
    assert report.passed is True
    assert report.lhs <= 10.0 * grid.h_min


def test_r_sweep_with_flat_data_near_the_window():
    grid = interval(256)
    f = generate_source("step", grid, {"position": 0.75}).field
    u = continuation_solve(f, SolverConfig(eps=1e-2)).u
    reports = [check_local_lipschitz(u, f, LocalWindow((0.3,), radius, 0.2)) for radius in (0.05, 0.1, 0.2)]
    ks = [r.K for r in reports]
    # f is flat on every outer ball while u still slopes towards the jump
    assert all(r.rhs == 0.0 for r in reports)
    assert all(k > 0.0 for k in ks)
    fit = fit_constants(reports, "local-lipschitz", min_reports=3)
    assert fit.K == max(ks)
    assert fit.ratio == pytest.approx(max(ks) / min(ks))
    # nested balls: sup |grad u| cannot shrink while R^2 grows 16-fold
    assert fit.ratio >= 16.0 * (1 - 1e-12)
    assert fit.to_report().failed
