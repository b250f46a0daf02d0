"""Probability of violation of local realism for pairs of entangled qudits."""
from .behaviour import Behaviour, behaviour_from_state
from .cglmp import BellValue, PhaseConfig, cglmp_closed, cglmp_direct
from .estimate import PvEstimate, estimate_pv_behaviour, estimate_pv_cglmp
from .optimizer import MvsResult, find_mvs
from .polytope import MembershipResult, is_local
from .rng import RngStream
from .scan import FitResult, ScanGrid, fit_decay, scan_family
from .states import SchmidtState, make_family_state, make_mes, make_mss

__version__ = "0.1.0"

__all__ = [
    "Behaviour",
    "BellValue",
    "FitResult",
    "MembershipResult",
    "MvsResult",
    "PhaseConfig",
    "PvEstimate",
    "RngStream",
    "ScanGrid",
    "SchmidtState",
    "behaviour_from_state",
    "cglmp_closed",
    "cglmp_direct",
    "estimate_pv_behaviour",
    "estimate_pv_cglmp",
    "find_mvs",
    "fit_decay",
    "is_local",
    "make_family_state",
    "make_mes",
    "make_mss",
    "scan_family",
]
