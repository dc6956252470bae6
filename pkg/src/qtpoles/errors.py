"""Exception types raised across the package."""


class QTPolesError(Exception):
    """Base class for all package errors."""


class PoleOfGamma(QTPolesError, ValueError):
    """Gamma function evaluated at (or within tolerance of) a non-positive integer."""

    def __init__(self, z):
        super().__init__(f"Gamma has a pole at z={z!r}")
        self.z = z


class PoleOfAmplitude(QTPolesError, ArithmeticError):
    """A numerator gamma factor of a transmission amplitude diverges.

    ``factor`` names the diverging factor, e.g. ``"Gamma(-A-ik)"``.
    """

    def __init__(self, factor, argument):
        super().__init__(f"amplitude diverges: {factor} at argument {argument!r}")
        self.factor = factor
        self.argument = argument


class NotPointwise(QTPolesError, ValueError):
    """The potential is a distribution and has no pointwise value."""


class NoScatteringStates(QTPolesError, ValueError):
    """The potential is confining on at least one side; T(E) is not physical."""


class DomainError(QTPolesError, ValueError):
    """Arguments outside the domain of a closed-form expression."""


class PoleLost(QTPolesError, RuntimeError):
    """No pole found inside the tracking window after a parameter perturbation."""


class GridTooCoarse(QTPolesError, ValueError):
    """The grid does not resolve the local wavelength (K*h > 0.5)."""


class NotEnoughStates(QTPolesError, ValueError):
    """The well binds fewer states than were requested."""
