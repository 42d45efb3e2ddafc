"""Ergodic capacity of cooperative NOMA and OMA relaying over F fading.

Library APIs take SNRs on the linear scale; only the command line
accepts decibels.
"""

from ._backend import BACKEND
from .capacity_noma import (c11_exact, c12_exact, c2_exact, c_noma_asymptotic,
                            c_noma_exact)
from .capacity_oma import OmaSeriesTerms, c_oma_asymptotic, c_oma_exact, oma_terms
from .errors import (ConstraintError, ConvergenceError, DomainError, FsnomaError,
                     PoleCollisionError, TruncationError)
from .fading import FadingLink, LinkTriple
from .model import CapacityEstimate, NumericsPolicy, SystemConfig
from .oracles import McResult, McSettings, simulate_noma, simulate_oma
from .specfun import ContourControl, SeriesControl

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "FadingLink",
    "LinkTriple",
    "SystemConfig",
    "NumericsPolicy",
    "CapacityEstimate",
    "SeriesControl",
    "ContourControl",
    "McSettings",
    "McResult",
    "OmaSeriesTerms",
    "c11_exact",
    "c12_exact",
    "c2_exact",
    "c_noma_exact",
    "c_noma_asymptotic",
    "c_oma_exact",
    "c_oma_asymptotic",
    "oma_terms",
    "simulate_noma",
    "simulate_oma",
    "FsnomaError",
    "DomainError",
    "ConstraintError",
    "ConvergenceError",
    "TruncationError",
    "PoleCollisionError",
]
