"""Vector-valued Rademacher sums, shadow coefficients and matrix Kloosterman sums."""

from .groups import SL2Z, GroupElement, GroupSpec, gamma0
from .multiplier import EtaMultiplier, ExplicitMultiplier, TrivialMultiplier, make_preset
from .rademacher import RademacherJob, coefficients, delta_constant, shadow_coefficients

__all__ = [
    "SL2Z", "GroupElement", "GroupSpec", "gamma0",
    "EtaMultiplier", "ExplicitMultiplier", "TrivialMultiplier", "make_preset",
    "RademacherJob", "coefficients", "delta_constant", "shadow_coefficients",
]
__version__ = "0.1.0"
