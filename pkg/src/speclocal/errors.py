"""Exception types raised by the package."""


class SpecLocalError(Exception):
    """Base class for all package errors."""


class ConfigError(SpecLocalError, ValueError):
    """Invalid parameters or configuration."""


class NotSelfAdjoint(SpecLocalError, ValueError):
    """An operator required to be self-adjoint is not."""


class NotChiral(SpecLocalError, ValueError):
    """A Hamiltonian does not anticommute with the chiral grading."""


class NotUnitary(SpecLocalError, ValueError):
    """A matrix required to be unitary is not."""


class GapClosed(SpecLocalError):
    """An operator that must be invertible has spectrum at (or too close to) zero."""

    def __init__(self, message, gap=None):
        super().__init__(message)
        self.gap = gap


class GradedGapClosed(GapClosed):
    """The graded element of a fuzzy torus has spectrum in the forbidden window."""


class OddSignature(SpecLocalError):
    """A signature that should be even is odd."""


class OddDimension(SpecLocalError, ValueError):
    """A Pfaffian was requested for an odd-dimensional matrix."""


class NearSingular(SpecLocalError):
    """A factorization encountered a pivot below tolerance."""


class SymmetryViolation(SpecLocalError, ValueError):
    """An operator fails a required symmetry relation."""


class MassAtTransition(SpecLocalError, ValueError):
    """A Dirac mass lies on a topological transition where the map is undefined."""


class DetVanishes(SpecLocalError):
    """A determinant path passes through zero, so its winding is undefined."""


class GridTooCoarse(SpecLocalError):
    """A grid-refined quantity did not converge."""


class WidthTooLarge(SpecLocalError, ValueError):
    """A fuzzy torus is too wide for the requested estimate."""
