"""Exception hierarchy shared by the numerical modules."""


class MeroscopeError(Exception):
    """Base class for all errors raised by meroscope."""


class NonConvergence(MeroscopeError):
    """An iterative routine exhausted its budget."""


class TooCloseToCircle(MeroscopeError):
    """A Cauchy-integral evaluation point lies too close to the unit circle."""


class VanishingOnCircle(MeroscopeError):
    """The sampled function (nearly) vanishes on the circle."""


class UnderResolved(MeroscopeError):
    """Adjacent samples differ in argument by too much; resample with larger N."""


class VanishingOnContour(MeroscopeError):
    """The function vanishes on the counting contour.

    ``alternatives`` lists nearby radii worth retrying.
    """

    def __init__(self, message, rho=None, alternatives=()):
        super().__init__(message)
        self.rho = rho
        self.alternatives = tuple(alternatives)


class PremiseFails(MeroscopeError):
    """The dominance premise of a winding-stability check does not hold."""


class WindingMismatch(MeroscopeError):
    """Two independent routes to a winding number disagree."""


class RootCountMismatch(MeroscopeError):
    """Located roots disagree with the argument-principle count."""


class ZeroCountMismatch(RootCountMismatch):
    """The zeros used to build a normalizing polynomial disagree with the contour count."""


class AmbiguousRank(MeroscopeError):
    """No singular-value gap exceeds the threshold.

    ``best_split`` is the index with the largest consecutive ratio.
    """

    def __init__(self, message, singular_values=(), best_split=None, best_ratio=None):
        super().__init__(message)
        self.singular_values = tuple(singular_values)
        self.best_split = best_split
        self.best_ratio = best_ratio


class PoleOutsideDisk(MeroscopeError):
    """A reconstructed pole has modulus at least one."""


class SpecError(MeroscopeError):
    """A function-spec document is malformed.

    ``field`` names the offending key.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class ConfigError(MeroscopeError):
    """A run option is invalid; ``field`` names the option."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
