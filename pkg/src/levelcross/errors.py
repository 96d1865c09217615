"""Exception types shared across the toolkit."""


class LevelCrossError(Exception):
    """Base class for computation failures in this package."""


class ScanTooCoarse(LevelCrossError):
    """A sign change straddles more than one scan step ambiguously."""


class NoWell(LevelCrossError):
    """No classically allowed region found within the truncated domain."""


class MultipleRoots(LevelCrossError):
    """More than two turning points detected for a single well."""


class NotSymmetric(LevelCrossError):
    """Operation requires the symmetric-pair flag on the model."""


class OutsideAllowedRegion(LevelCrossError):
    """Position lies outside the classically allowed interval."""


class WindowOutsideI0(LevelCrossError):
    """Requested energy window is not contained in the model window."""


class InvalidCrossingData(LevelCrossError):
    """Crossing-point data violates transversality or ellipticity."""


class AtCrossing(LevelCrossError):
    """Amplitude evaluation requested at the channel-crossing point."""


class VanishingXiDerivative(LevelCrossError):
    """The fiber derivative of the symbol vanishes along the transport path."""


class TruncationTooSmall(LevelCrossError):
    """Domain truncation does not leave a barrier margin above the energy."""


class StepUnderflow(LevelCrossError):
    """Adaptive integrator step size shrank below representable resolution."""


class GridTooCoarse(LevelCrossError):
    """Grid step too large to resolve the oscillation wavelength."""


class FactorizationBreakdown(LevelCrossError):
    """Band LDL^T factorization failed repeatedly despite shift perturbation."""


class NoConvergence(LevelCrossError):
    """A detected root candidate failed to refine."""


class InsufficientData(LevelCrossError):
    """Not enough filtered records to fit a scaling law."""
