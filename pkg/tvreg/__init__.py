"""tvreg: the regularized Neumann problem of total-variation denoising, its
ROF oracles, and machine checks of the regularity estimates its solutions obey.

Usage:
    from tvreg.core import interval
    from tvreg.solver import SolverConfig, continuation_solve
"""

from __future__ import annotations

__version__ = "0.1.0"

__all__ = ["__version__"]
