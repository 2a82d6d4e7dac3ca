"""tvreg CLI: `tvreg solve|check|sweep|mms [--config] [--set] [--out] [--seed]`."""

from __future__ import annotations

import logging
import sys
from collections.abc import Callable
from pathlib import Path

import click

from tvreg import __version__
from tvreg.checks.estimates import TAG_LOCAL_LIPSCHITZ
from tvreg.experiments.config import ConfigError, ExperimentConfig, load_config
from tvreg.experiments.emit import emit_reports
from tvreg.experiments.pgm import PgmError
from tvreg.experiments.refinement import run_mms
from tvreg.experiments.suite import ReportBundle, StageError, run_suite
from tvreg.runtime import metrics

logger = logging.getLogger("tvreg.cli")

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
DEFAULT_OUT = "out"


def _experiment_options(fn: Callable) -> Callable:
    """Options shared by every subcommand."""
    options = [
        click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                     default=None, help="key = value experiment file"),
        click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE",
                     help="Override a config key (repeatable, applied in order)"),
        click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
                     help=f"Output directory (default: config 'out' or ./{DEFAULT_OUT})"),
        click.option("--seed", type=int, default=None, help="Seed for random sources"),
        click.option("--log-level", default="INFO", show_default=True,
                     type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False)),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _configure_logging(level: str) -> None:
    logging.basicConfig(level=level.upper(), format=LOG_FORMAT, stream=sys.stdout, force=True)


def _load(config_path: str | None, overrides: tuple[str, ...], seed: int | None) -> ExperimentConfig:
    extra = list(overrides)
    if seed is not None:
        extra.append(f"seed={seed}")
    try:
        return load_config(config_path, extra)
    except ConfigError as exc:
        raise click.ClickException(str(exc)) from exc


def _execute(
    config: ExperimentConfig,
    out_dir: str | None,
    runner: Callable[[ExperimentConfig], ReportBundle],
) -> None:
    """Run, emit, log metrics and exit with the bundle's status."""
    metrics.reset()
    try:
        bundle = runner(config)
    except (StageError, ConfigError, PgmError) as exc:
        raise click.ClickException(str(exc)) from exc
    target = Path(out_dir or config.out or DEFAULT_OUT)
    try:
        paths = emit_reports(bundle, target)
    except OSError as exc:
        raise click.ClickException(f"cannot write outputs to {target}: {exc}") from exc
    failed = bundle.failed_reports
    click.echo(f"  Reports: {len(bundle.reports)} ({len(failed)} failed)")
    for report in failed:
        click.echo(f"  FAIL {report.run_id} {report.theorem_tag}: {report.lhs!r} > {report.rhs!r}")
    if not bundle.solves_converged:
        click.echo("  Some solves did not converge")
    click.echo(f"  Output: {target} ({len(paths)} files)")
    logger.info("metrics %s", metrics.snapshot())
    sys.exit(bundle.exit_code)


def _replace(config: ExperimentConfig, **changes) -> ExperimentConfig:
    try:
        return config.replace(**changes)
    except ConfigError as exc:
        raise click.ClickException(str(exc)) from exc


@click.group()
@click.version_option(__version__, prog_name="tvreg")
def main():
    """tvreg - regularized TV solver and regularity checks."""
    pass


@main.command()
@_experiment_options
def solve(config_path, overrides, out_dir, seed, log_level):
    """Solve the configured source(s) and write fields and traces, no checks."""
    _configure_logging(log_level)
    config = _replace(_load(config_path, overrides, seed), checks=(), mu_sweep=())
    _execute(config, out_dir, run_suite)


@main.command()
@_experiment_options
def check(config_path, overrides, out_dir, seed, log_level):
    """Solve and run every requested regularity check."""
    _configure_logging(log_level)
    _execute(_load(config_path, overrides, seed), out_dir, run_suite)


@main.command()
@_experiment_options
def sweep(config_path, overrides, out_dir, seed, log_level):
    """Run the mu-sweep and the R-sweep of the local Lipschitz bound."""
    _configure_logging(log_level)
    config = _load(config_path, overrides, seed)
    if not config.mu_sweep and not config.window_radii:
        raise click.ClickException("nothing to sweep: set mu_sweep and/or window.radii")
    checks = (TAG_LOCAL_LIPSCHITZ,) if config.window_radii else ()
    _execute(_replace(config, checks=checks), out_dir, run_suite)


@main.command()
@_experiment_options
def mms(config_path, overrides, out_dir, seed, log_level):
    """Manufactured-solution refinement study (keys mms.*)."""
    _configure_logging(log_level)
    _execute(_load(config_path, overrides, seed), out_dir, run_mms)


if __name__ == "__main__":
    main()
