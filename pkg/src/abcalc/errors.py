"""Error taxonomy shared by the whole library.

Every domain failure raises a subclass of AbcalcError so front ends can map
them to a machine-readable name uniformly.
"""


class AbcalcError(Exception):
    """Base class for all domain errors."""

    @property
    def name(self) -> str:
        return type(self).__name__


class OrderMismatch(AbcalcError):
    """Two truncated values with different truncation orders were combined."""


class NonUnit(AbcalcError):
    """Inversion was requested for a series/operator with zero constant term."""


class PrecisionExhausted(AbcalcError):
    """The computation consumed more b-precision than the inputs carry."""


class Resonance(AbcalcError):
    """A twisted equation (a - lambda*b)x = by hit a resonant level."""

    def __init__(self, level, message=None):
        self.level = level
        super().__init__(message or f"resonant level {level}")


class ObstructedSplit(AbcalcError):
    """Eigenvalue difference in N* obstructs the splitting of an extension."""


class NonGeometric(AbcalcError):
    """Spectral data is not rational (or Bernstein roots not negative rational)."""


class NotRegular(AbcalcError):
    """Saturation did not become stationary within the allowed number of steps."""


class NotSimplePole(AbcalcError):
    """A simple-pole presentation was required (some entry has valuation 0)."""


class NoSuchBlock(AbcalcError):
    """No Jordan block of the requested size exists for the eigenvalue."""


class SyntaxErrorAt(AbcalcError):
    """Expression parse error, with the offset of the offending character."""

    def __init__(self, message, position):
        self.position = position
        super().__init__(f"{message} at offset {position}")
