"""Exception types shared across the package."""
from __future__ import annotations

__all__ = [
    "EpnoiseError",
    "SingularParameters",
    "Unstable",
    "OrderTooLarge",
    "NotAtEP",
    "UnnormalizedEnsemble",
    "CutoffTooSmall",
    "DivergenceDetected",
    "ConfigError",
]


class EpnoiseError(Exception):
    """Base class for all package-specific errors."""


class SingularParameters(EpnoiseError):
    """Parameters sit on (or within tolerance of) a singular manifold.

    Raised where a closed form divides by gamma2 - gamma1 or j**2 - gamma1*gamma2
    and the point is too close to either zero set for the result to mean anything.
    """


class Unstable(EpnoiseError):
    """No normalizable stationary state: the point lies outside the stability domain."""


class OrderTooLarge(EpnoiseError):
    """A requested moment order exceeds the configured jet truncation order."""


class NotAtEP(EpnoiseError):
    """An exceptional-point-only routine was called away from gamma1 + gamma2 = 2 j."""


class UnnormalizedEnsemble(EpnoiseError):
    """Transient ensemble weights are negative or do not sum to one."""


class CutoffTooSmall(EpnoiseError):
    """The Fock cutoff cannot represent the state within the memory budget or tail tolerance."""


class DivergenceDetected(EpnoiseError):
    """Time evolution is growing without bound (legitimate outside the stability domain).

    Attributes
    ----------
    onset : float
        Earliest checkpoint time at which sustained intensity doubling was seen.
    """

    def __init__(self, message: str, onset: float):
        super().__init__(message)
        self.onset = float(onset)


class ConfigError(EpnoiseError):
    """Malformed CLI arguments, config file contents, or sweep specification."""
