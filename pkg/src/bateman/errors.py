"""Exception taxonomy shared by all engines.

Validation errors (bad inputs, degenerate parameter regimes) are kept
separate from numerical failures (truncation breakdown, decomposition
failure) so the CLI can map them to distinct exit codes.
"""


class BatemanError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(BatemanError):
    """Inputs violate a precondition; nothing was computed."""


class NumericalError(BatemanError):
    """The computation started but could not be completed reliably."""


class InvalidParams(ValidationError):
    """Parameter positivity/finiteness constraints failed."""


class OverdampedRegime(ValidationError):
    """|Γ| ≥ Ω₀: the reduced frequency Ω = √(Ω₀²−Γ²) would be zero or imaginary."""


class DimensionMismatch(ValidationError):
    """Phase-space objects defined on incompatible coordinate sets."""


class SingularConstraintMatrix(ValidationError):
    """Constraint bracket matrix is not invertible (constraints not second-class)."""


class StepTooLarge(ValidationError):
    """Integrator step violates the stability guard dt·Ω₀ ≤ 0.5."""


class TooFewPoints(ValidationError):
    """Grid too short for the requested finite-difference stencil."""


class LevelTooLarge(ValidationError):
    """Fractal construction level would exceed the point budget."""


class ShapeMismatch(ValidationError):
    """Matrix/vector shape inconsistent with the declared Hilbert space."""


class CutoffInsufficient(NumericalError):
    """Population reached the Fock cutoff shell; results would be truncated."""


class EigDecompositionFailure(NumericalError):
    """Hermitian eigendecomposition failed to converge."""


class HistoryGap(ValidationError):
    """Memory-kernel evaluation requested outside the stored history grid."""
