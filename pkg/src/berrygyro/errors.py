"""Exception types raised by the numerical core."""


class BerryGyroError(Exception):
    """Base class for numerical failures."""


class DegenerateSpectrum(BerryGyroError):
    """Instantaneous spectrum too close to degenerate for the Kato construction."""


class UnderResolved(BerryGyroError):
    """Adjacent eigenvector overlaps fell below the continuity threshold."""


class UnwrapAmbiguity(BerryGyroError):
    """Phase curve jumps could not be resolved by grid refinement."""


class NonHermitian(BerryGyroError, ValueError):
    """Matrix failed the Hermiticity check."""


class NumericalFailure(BerryGyroError):
    """Non-finite state or similar pathology during propagation."""


class LowReturnFidelity(UserWarning):
    """Cyclic return fidelity too low for a trustworthy geometric phase."""
