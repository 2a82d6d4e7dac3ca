"""Reference minimizers of the ROF energy used as oracles."""

from tvreg.reference.dual import DualState, dual_projection
from tvreg.reference.energy import energy_regularized, energy_tv
from tvreg.reference.taut_string import Certificate, optimality_certificate, taut_string_1d

__all__ = [
    "Certificate",
    "DualState",
    "dual_projection",
    "energy_regularized",
    "energy_tv",
    "optimality_certificate",
    "taut_string_1d",
]
