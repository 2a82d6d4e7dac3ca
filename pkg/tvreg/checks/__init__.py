"""Machine-checkable inequality reports over solver output."""

from tvreg.checks.estimates import (
    check_boundary_sign,
    check_bv_1d,
    check_global_lipschitz,
    check_local_lipschitz,
    check_lp_contraction,
    check_max_principle,
    check_regularized_bv,
    check_sobolev,
    check_tv_energy_bound,
)
from tvreg.checks.fitting import FitResult, fit_constants
from tvreg.checks.report import (
    CSV_COLUMNS,
    CorpusError,
    EstimateReport,
    HypothesisError,
    LocalWindow,
    Provenance,
    WindowError,
)
from tvreg.checks.sweeps import MuSweepResult, MuSweepRow, mu_invariance_sweep

__all__ = [
    "CSV_COLUMNS",
    "CorpusError",
    "EstimateReport",
    "FitResult",
    "HypothesisError",
    "LocalWindow",
    "MuSweepResult",
    "MuSweepRow",
    "Provenance",
    "WindowError",
    "check_boundary_sign",
    "check_bv_1d",
    "check_global_lipschitz",
    "check_local_lipschitz",
    "check_lp_contraction",
    "check_max_principle",
    "check_regularized_bv",
    "check_sobolev",
    "check_tv_energy_bound",
    "fit_constants",
    "mu_invariance_sweep",
]
