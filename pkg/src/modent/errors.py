"""Exception hierarchy shared by all modules."""


class ModentError(Exception):
    """Base class for every error raised by this package."""


class NonConvergence(ModentError):
    """Adaptive quadrature hit its panel limit before reaching tolerance."""


class ParseError(ModentError, ValueError):
    """A function literal could not be parsed."""


class SupportError(ModentError):
    """A function's support is not contained in the required interval."""


class GridResolutionError(ModentError):
    """The FFT grid cannot resolve the function (spectral tail or edge leakage)."""


class PoleError(ModentError):
    """A Moebius point map was evaluated at (or too near) its pole."""


class CutNotAdmissible(ModentError):
    """A function does not vanish to the required order at the cut endpoints."""


class MomentError(ModentError):
    """A function has nonvanishing moments where the formula requires zero."""

    def __init__(self, message, moments=None):
        super().__init__(message)
        self.moments = list(moments) if moments is not None else []


class NormalizationError(ModentError):
    """No admissible representative with vanishing boundary data was found."""

    def __init__(self, message, boundary_values=None):
        super().__init__(message)
        self.boundary_values = list(boundary_values) if boundary_values is not None else []


class ExtensionMismatch(ModentError):
    """Two functions that should agree on a closed interval do not."""


class DegenerateInput(ModentError):
    """Input vectors span the zero space."""


class IllConditioned(ModentError):
    """A change of basis is too ill-conditioned to trust."""


class NotFactorial(ModentError):
    """The standard subspace has a nontrivial center (1 is an eigenvalue of Delta)."""


class TailError(ModentError):
    """A Legendre expansion left more L2 energy in its tail than allowed."""


class ConsistencyError(ModentError):
    """Two independent computations of the same quantity disagree."""
