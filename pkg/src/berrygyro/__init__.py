"""Berry-phase rotation sensing with a spin-1 nucleus in a rotating, tilted frame."""

__version__ = "0.1.0"

from .errors import (
    BerryGyroError,
    DegenerateSpectrum,
    LowReturnFidelity,
    NonHermitian,
    NumericalFailure,
    UnderResolved,
    UnwrapAmbiguity,
)
from .model import PhysicalScenario, detuned_scenario, near_resonant_scenario

__all__ = [
    "__version__",
    "BerryGyroError",
    "DegenerateSpectrum",
    "LowReturnFidelity",
    "NonHermitian",
    "NumericalFailure",
    "UnderResolved",
    "UnwrapAmbiguity",
    "PhysicalScenario",
    "detuned_scenario",
    "near_resonant_scenario",
]
