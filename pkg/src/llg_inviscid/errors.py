"""Exception types raised across the package."""


class LLGError(Exception):
    """Base class for all package errors."""


class GridMismatchError(LLGError, ValueError):
    """Field shape does not match the grid it is used with."""


class ShellRangeError(LLGError, ValueError):
    """Requested dyadic shell lies outside the representable range."""


class NonFiniteError(LLGError, ValueError):
    """A multiplier or field contains NaN/inf values."""


class UnitNormError(LLGError, ValueError):
    """A sphere-valued field is too far from the unit sphere."""


class DegenerateFieldError(LLGError, ValueError):
    """Pointwise norm too small to renormalize."""


class PoleProximityError(LLGError, ValueError):
    """Stereographic projection requested too close to the south pole."""


class DomainError(LLGError, ValueError):
    """Input outside the domain of validity of a formula (e.g. Taylor series)."""


class BlowUpError(LLGError, RuntimeError):
    """Time integration produced non-finite values."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class UnsupportedExponentError(LLGError, ValueError):
    """Lebesgue exponent outside the supported set."""


class IncompatibleScalingError(LLGError, ValueError):
    """Dilation factor incompatible with grid or sample cadence."""
