from click.testing import CliRunner

from tvreg import __version__
from tvreg.cli import main

SMALL = ["--set", "domain=interval", "--set", "n=32", "--set", "source=constant"]


def _invoke(*args):
    return CliRunner().invoke(main, list(args))


def test_version():
    result = _invoke("--version")
    assert result.exit_code == 0
    assert __version__ in result.output


def test_check_on_constant_data_passes(tmp_path):
    out = tmp_path / "out"
    result = _invoke("check", *SMALL, "--out", str(out))
    assert result.exit_code == 0, result.output
    assert "0 failed" in result.output
    assert (out / "reports.csv").exists()
    assert (out / "fields" / "solution.txt").exists()


def test_solve_writes_no_reports(tmp_path):
    result = _invoke("solve", *SMALL, "--out", str(tmp_path))
    assert result.exit_code == 0, result.output
    assert "Reports: 0" in result.output
    assert (tmp_path / "reports.csv").read_text().count("\n") == 1
    assert (tmp_path / "traces.csv").exists()


def test_config_file_and_seed(tmp_path):
    config = tmp_path / "noise.cfg"
    config.write_text("domain = interval\nn = 32\nsource = smoothed-noise\nchecks = max-principle\n")
    result = _invoke("solve", "--config", str(config), "--seed", "3", "--out", str(tmp_path / "out"))
    assert "Output:" in result.output, result.output
    assert "seed = 3" in (tmp_path / "out" / "config.txt").read_text()


def test_invalid_config_is_reported():
    result = _invoke("check", "--set", "colour=red")
    assert result.exit_code == 1
    assert "unknown config keys" in result.output


def test_sweep_needs_something_to_sweep():
    result = _invoke("sweep", *SMALL)
    assert result.exit_code == 1
    assert "nothing to sweep" in result.output


def test_mu_sweep_table(tmp_path):
    result = _invoke("sweep", *SMALL, "--set", "mu_sweep=0.5,1", "--out", str(tmp_path))
    assert result.exit_code == 0, result.output
    lines = (tmp_path / "plotdata" / "mu_sweep.csv").read_text().splitlines()
    assert lines[0] == "mu,lambda,tv,energy,converged,oracle_distance"
    assert len(lines) == 3


def test_mms_writes_refinement_table(tmp_path):
    result = _invoke("mms", "--set", "mms.levels=2", "--out", str(tmp_path))
    assert "Reports: 3" in result.output
    table = (tmp_path / "plotdata" / "h_refinement.csv").read_text().splitlines()
    assert table[0].startswith("n,h,residual,residual_order")
    assert len(table) == 3


def test_readme_mu_sweep_converges(tmp_path):
    result = _invoke("sweep", "--set", "source=trig", "--set", "mu_sweep=0.1,1,10", "--out", str(tmp_path))
    assert result.exit_code == 0, result.output
    assert "did not converge" not in result.output
    rows = (tmp_path / "plotdata" / "mu_sweep.csv").read_text().splitlines()[1:]
    assert [row.split(",")[4] for row in rows] == ["true"] * 3
