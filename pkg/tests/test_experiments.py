import math

import numpy as np
import pytest

from tvreg.checks.report import CSV_COLUMNS
from tvreg.core import ScalarField, interval, lshape
from tvreg.core.operators import field_norm, gradient
from tvreg.experiments import (
    ConfigError,
    ExperimentConfig,
    PgmError,
    StageError,
    emit_reports,
    generate_source,
    load_config,
    load_pgm,
    mms_study,
    read_field,
    read_pgm,
    read_reports,
    run_mms,
    run_suite,
)
from tvreg.experiments.config import parse_config_text
from tvreg.experiments.emit import write_field
from tvreg.runtime import metrics

SMALL = ["domain=interval", "n=32", "source=constant", "source.value=0.5"]


def test_parse_config_text(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(
        "# smoothing run\nrun_id = smooth\ndomain = rectangle\nn = 32  # per axis\n\n"
        "source = smoothed-noise\nsource.sigma = 0.1\nseed = 7\nmu = 0.5\nchecks = sobolev, max-principle\n"
        "sobolev.p = 2,inf\n"
    )
    config = load_config(path, ["n=16"])
    assert config.run_id == "smooth"
    assert config.n == 16
    assert config.source_params == {"sigma": "0.1"}
    assert config.mu == 0.5
    assert config.solver_config().lam == pytest.approx(2.0)
    assert config.checks == ("sobolev", "max-principle")
    assert config.sobolev_p == (2.0, math.inf)


@pytest.mark.parametrize(
    "overrides, message",
    [
        (["colour=red"], "unknown config keys"),
        (["mu=1", "lambda=2"], "not both"),
        (["source=smoothed-noise"], "needs a seed"),
        (["source=pgm"], "image"),
        (["corpus=3"], "random source"),
        (["checks=global-lipschitz,magic"], "unknown checks"),
        (["n=many"], "integer"),
        (["eps=-1"], "solver"),
        (["mms.levels=1"], "mms.levels"),
        (["domain=torus"], "domain"),
        (["novalue"], "key=value"),
    ],
)
def test_config_validation(overrides, message):
    with pytest.raises(ConfigError, match=message):
        load_config(None, overrides)


def test_config_syntax_error_names_the_line():
    with pytest.raises(ConfigError, match="<config>:2"):
        parse_config_text("n = 3\nbroken line\n")


def test_config_text_round_trip():
    config = load_config(None, SMALL + ["schedule=1e-1,1e-2", "window.radii=0.1,0.2", "mu=0.25", "checks="])
    again = load_config(None, [line.replace(" = ", "=", 1) for line in config.to_text().splitlines()])
    assert again == config
    assert again.checks == ()


def test_requested_checks_follow_the_domain():
    config = ExperimentConfig()
    one_d = config.requested_checks(1, True)
    assert "bv" in one_d
    assert "local-lipschitz" not in one_d
    l_shaped = config.requested_checks(2, False)
    assert "sobolev" not in l_shaped
    assert "bv" not in l_shaped
    assert "local-lipschitz" in config.replace(window_radii=(0.1,)).requested_checks(2, True)
    assert config.replace(checks=("bv",)).requested_checks(2, True) == ("bv",)


def test_replace_revalidates():
    with pytest.raises(ConfigError):
        ExperimentConfig().replace(source="smoothed-noise")


def test_affine_source_knows_its_norms():
    source = generate_source("affine", interval(16), {"slope": "2"})
    assert source.gradient_norm(math.inf) == 2.0
    assert field_norm(gradient(source.field), math.inf) == pytest.approx(2.0)
    assert source.gradient_norm(2.0) == pytest.approx(2.0)


def test_smoothed_noise_is_seeded(square):
    a = generate_source("smoothed-noise", square, {"sigma": 0.1}, seed=3)
    b = generate_source("smoothed-noise", square, {"sigma": 0.1}, seed=3)
    c = generate_source("smoothed-noise", square, {"sigma": 0.1}, seed=4)
    assert np.array_equal(a.field.values, b.field.values)
    assert not np.array_equal(a.field.values, c.field.values)
    assert np.max(np.abs(a.field.values)) == pytest.approx(1.0)
    with pytest.raises(ValueError, match="seed"):
        generate_source("smoothed-noise", square)
    with pytest.raises(ValueError, match="unknown source"):
        generate_source("plasma", square)


def test_step_source():
    source = generate_source("step", interval(8), {"jump": 2, "position": 0.5})
    assert source.field.values.tolist() == [0.0] * 4 + [2.0] * 4


def test_read_ascii_pgm_is_column_major(tmp_path):
    path = tmp_path / "tiny.pgm"
    path.write_text("P2\n# made by hand\n2 2\n255\n0 255\n51 102\n")
    values = read_pgm(path)
    assert values.shape == (2, 2)
    assert values[0, 0] == 0.0
    assert values[1, 0] == 1.0
    assert values[0, 1] == pytest.approx(0.2)
    assert values[1, 1] == pytest.approx(0.4)
    with pytest.raises(PgmError, match="smaller"):
        load_pgm(path)


def test_load_binary_16_bit_pgm(tmp_path):
    path = tmp_path / "wide.pgm"
    raster = (np.arange(9) * 100).astype(">u2").tobytes()
    path.write_bytes(b"P5 3 3 1000\n" + raster)
    field = load_pgm(path)
    assert field.grid.shape == (3, 3)
    assert field.grid.h == pytest.approx((1 / 3, 1 / 3))
    assert field.values[1, 0] == pytest.approx(0.1)
    assert field.values[0, 1] == pytest.approx(0.3)


@pytest.mark.parametrize(
    "payload, message",
    [
        (b"P5 3 3 255\n\x00\x01\x02\x03\x04", "truncated"),
        (b"P6 3 3 255\n" + bytes(27), "unsupported"),
        (b"P2 3 3 70000\n" + b"1 " * 9, "65535"),
        (b"P2 3 3 255\n1 2 3 4", "truncated"),
        (b"P2 3 3 255\n" + b"300 " * 9, "exceeds"),
        (b"P2 3 x 255\n", "height"),
    ],
)
def test_malformed_pgm(tmp_path, payload, message):
    path = tmp_path / "bad.pgm"
    path.write_bytes(payload)
    with pytest.raises(PgmError, match=message):
        read_pgm(path)


def test_constant_suite_passes(tmp_path):
    bundle = run_suite(load_config(None, SMALL))
    assert bundle.reports
    assert bundle.failed_reports == []
    assert bundle.solves_converged
    assert bundle.exit_code == 0
    tags = {r.theorem_tag for r in bundle.reports}
    assert {"global-lipschitz", "bv", "max-principle", "boundary-sign"} <= tags
    assert set(bundle.fields) == {"source", "solution"}


def test_emission_is_deterministic(tmp_path):
    config = load_config(None, SMALL + ["source=trig", "checks=max-principle,bv"])
    first = emit_reports(run_suite(config), tmp_path / "a")
    second = emit_reports(run_suite(config), tmp_path / "b")
    assert [p.relative_to(tmp_path / "a") for p in first] == [p.relative_to(tmp_path / "b") for p in second]
    for a, b in zip(first, second):
        assert a.read_bytes() == b.read_bytes()
    reports = read_reports(tmp_path / "a" / "reports.csv")
    assert [r.theorem_tag for r in reports] == ["max-principle", "bv"]
    assert (tmp_path / "a" / "config.txt").read_text().startswith("# tvreg ")


def test_no_checks_gives_header_only_reports(tmp_path):
    bundle = run_suite(load_config(None, SMALL + ["checks="]))
    emit_reports(bundle, tmp_path)
    assert (tmp_path / "reports.csv").read_text() == ",".join(CSV_COLUMNS) + "\n"
    shape, h, values = read_field(tmp_path / "fields" / "solution.txt")
    assert shape == (32,)
    assert h == (1 / 32,)
    assert np.array_equal(values, bundle.fields["solution"].values)
    assert (tmp_path / "traces.csv").read_text().startswith("trace,eps,delta,iteration")


def test_masked_field_writes_nan_outside(tmp_path):
    grid = lshape(8)
    path = write_field(tmp_path / "ell.txt", ScalarField.constant(grid, 1.0))
    assert path.read_text().splitlines()[2] == "# kind masked"
    shape, _, values = read_field(path)
    assert shape == (8, 8)
    assert np.isnan(values).sum() == 16
    broken = tmp_path / "broken.txt"
    broken.write_text("# dims 3\n# h 0.5\n1.0\n")
    with pytest.raises(ValueError, match="disagree"):
        read_field(broken)


def test_missing_image_is_a_grid_stage_error(tmp_path):
    config = load_config(None, ["source=pgm", f"image={tmp_path / 'absent.pgm'}"])
    with pytest.raises(StageError) as info:
        run_suite(config)
    assert info.value.stage == "grid"


def test_mms_study_observes_second_order():
    study = mms_study("cos", n0=16, levels=3)
    assert [lv.n for lv in study.levels] == [16, 32, 64]
    residual_order, eqw_order = study.reports[0], study.reports[1]
    assert residual_order.theorem_tag == "residual-order"
    assert residual_order.passed is True
    assert eqw_order.passed is True
    orders = study.orders("eqw")
    assert orders[0] is None
    assert all(order > 1.5 for order in orders[1:])
    assert study.levels[-1].solve_error < study.levels[0].solve_error
    columns, rows = study.table()
    assert len(rows) == 3
    assert columns[0] == "n"
    with pytest.raises(ValueError, match="2 levels"):
        mms_study("cos", levels=1)


def test_run_mms_bundle():
    bundle = run_mms(ExperimentConfig(mms_levels=2))
    assert "h_refinement" in bundle.plotdata
    assert [r.theorem_tag for r in bundle.reports] == ["residual-order", "eqw-order", "subsolution-refinement"]
    with pytest.raises(StageError) as info:
        run_mms(ExperimentConfig(mms_field="bessel"))
    assert info.value.stage == "refinement"


def _rows(bundle, tag):
    return [r for r in bundle.reports if r.theorem_tag == tag]


def test_convex_corpus_fits_only_gate_on_lipschitz_constants():
    config = load_config(None, ["domain=rectangle", "n=24", "source=smoothed-noise", "seed=0", "corpus=6"])
    bundle = run_suite(config)
    assert bundle.failed_reports == []
    assert bundle.exit_code == 0
    assert all(r.passed is True for r in _rows(bundle, "global-lipschitz"))
    assert all(r.passed is True for r in _rows(bundle, "sobolev"))
    assert [r.passed for r in _rows(bundle, "global-lipschitz-fit")] == [True]
    informational = _rows(bundle, "sobolev-fit") + _rows(bundle, "lp-contraction-fit")
    assert len(informational) == 4 + 2
    assert all(r.passed is None for r in informational)


def test_lshape_corpus_fit_passes():
    config = load_config(
        None, ["domain=lshape", "n=24", "source=smoothed-noise", "seed=0", "corpus=10", "eps=1e-3"],
    )
    bundle = run_suite(config)
    assert bundle.exit_code == 0, [(r.run_id, r.theorem_tag) for r in bundle.failed_reports]
    assert all(r.passed is None for r in _rows(bundle, "global-lipschitz"))
    (fit,) = _rows(bundle, "global-lipschitz-fit")
    assert fit.passed is True
    assert fit.lhs <= 10.0
    assert _rows(bundle, "sobolev") == []


def test_r_sweep_on_a_convex_solve_is_stable():
    config = load_config(
        None, ["domain=rectangle", "n=32", "source=trig", "window.radii=0.1,0.2,0.4", "checks=local-lipschitz"],
    )
    bundle = run_suite(config)
    assert [r.R for r in _rows(bundle, "local-lipschitz")] == [0.1, 0.2, 0.4]
    (fit,) = _rows(bundle, "local-lipschitz-fit")
    assert fit.passed is True
    assert fit.lhs <= 10.0
    columns, rows = bundle.plotdata["r_sweep"]
    assert columns[1] == "R"
    assert len(rows) == 3


def test_dual_oracle_distances_on_a_rectangle():
    config = load_config(None, ["domain=rectangle", "n=12", "source=trig", "checks=max-principle", "oracle=dual"])
    first = run_suite(config)
    columns, rows = first.plotdata["continuation"]
    assert columns[-1] == "relative_oracle_distance"
    assert len(rows) == 1
    assert rows[0][4] is not None and rows[0][4] >= 0.0
    second = run_suite(config)
    assert second.plotdata["continuation"] == first.plotdata["continuation"]
    snap = metrics.snapshot()
    assert snap["total_oracle_calls"] == 2
    assert snap["total_oracle_cache_hits"] == 1


def test_default_oracle_skips_2d_grids():
    bundle = run_suite(load_config(None, ["domain=rectangle", "n=8", "source=trig", "checks=max-principle"]))
    assert "continuation" not in bundle.plotdata
    with pytest.raises(ConfigError, match="oracle"):
        load_config(None, ["oracle=exact"])
