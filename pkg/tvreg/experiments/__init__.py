"""Experiment configs, sources, suite execution and report emission."""

from tvreg.experiments.config import ConfigError, ExperimentConfig, load_config
from tvreg.experiments.emit import emit_reports, read_field, read_reports
from tvreg.experiments.pgm import PgmError, load_pgm, read_pgm
from tvreg.experiments.refinement import MmsStudy, mms_study, run_mms
from tvreg.experiments.sources import SOURCE_KINDS, Source, generate_source
from tvreg.experiments.suite import ReportBundle, StageError, build_domain, run_suite

__all__ = [
    "SOURCE_KINDS",
    "ConfigError",
    "ExperimentConfig",
    "MmsStudy",
    "PgmError",
    "ReportBundle",
    "Source",
    "StageError",
    "build_domain",
    "emit_reports",
    "generate_source",
    "load_config",
    "load_pgm",
    "mms_study",
    "read_field",
    "read_pgm",
    "read_reports",
    "run_mms",
    "run_suite",
]
