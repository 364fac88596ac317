"""Exception hierarchy for the lormin package.

Every failure mode raised by the library derives from :class:`LorminError`,
so callers (in particular the CLI) can distinguish domain/validation
problems from genuine bugs.
"""


class LorminError(Exception):
    """Base class for all lormin errors."""


# --- expression language ---------------------------------------------------

class ExpressionSyntaxError(LorminError):
    """Malformed expression text; carries the 0-based position of the offence."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class UnknownIdentifierError(ExpressionSyntaxError):
    """An identifier that is neither a variable, constant, function nor declared parameter."""

    def __init__(self, name: str, position: int):
        super().__init__(f"unknown identifier '{name}'", position)
        self.name = name


# --- scalar fields ----------------------------------------------------------

class DomainError(LorminError):
    """Evaluation point (or a finite-difference stencil point) outside the field domain."""


class NonFiniteResultError(LorminError):
    """Evaluation produced NaN or infinity (log of a negative number, division by zero, ...)."""


# --- surface analysis -------------------------------------------------------

class DegenerateTangentError(LorminError):
    """A coordinate tangent vector is numerically zero; the chart is not immersed there."""


class NonLorentzianMetricError(LorminError):
    """Induced metric is not of signature (1,1): EG - F^2 >= 0."""


class NotIsothermalError(LorminError):
    """Chart violates the conformal-Lorentz form E = -G > 0, F = 0 at the requested tolerance."""


class NormalFrameDegeneracyError(LorminError):
    """No usable orthonormal frame of the normal plane (projected candidates all lightlike)."""


# --- canonical geometry -----------------------------------------------------

class NotGeneralTypeError(LorminError):
    """Point fails the general-type requirements (K^2 - kappa^2 > 0 with margin, rank-2 second form)."""


class LightlikeSecondFormError(LorminError):
    """sigma(x,x) or sigma(x,y) is lightlike after the tangent rotation; frame extraction impossible."""


class NearSuperconformalError(LorminError):
    """|mu^2 - nu^2| vanishes within tolerance; logarithmic quantities blow up."""


class InconsistentCurvaturesError(LorminError):
    """(K, kappa, epsilon) violate the preconditions of the curvature-to-invariants conversion."""


# --- synthesis and validation -----------------------------------------------

class BlowUpError(LorminError):
    """Frame or position components exceeded the blow-up bound during integration."""


class PreconditionError(LorminError):
    """An operation was invoked on data violating its documented preconditions."""


class EmptyGridError(LorminError):
    """A grid argument contains no points."""


class GridMismatchError(LorminError):
    """Two grids expected to be aligned are not."""


class InsufficientSamplesError(LorminError):
    """Too few sample points for the requested fit."""


class PairValidationError(LorminError):
    """A curve pair failed the nullity/transversality validation."""


# --- CLI --------------------------------------------------------------------

class ConfigError(LorminError):
    """Bad job configuration: unparsable document, missing or invalid field."""
