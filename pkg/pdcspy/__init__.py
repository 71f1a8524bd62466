from pdcspy.dispersion import NormalizedParams, PhysicalParams, normalize
from pdcspy.meanfield import FieldState, Regime, RegimeLabel
from pdcspy.resonator import Resonator, SqueezingAnalysis
from pdcspy.squeezing import LossMatrix

__all__ = [
    "Resonator",
    "SqueezingAnalysis",
    "PhysicalParams",
    "NormalizedParams",
    "normalize",
    "FieldState",
    "Regime",
    "RegimeLabel",
    "LossMatrix",
]
