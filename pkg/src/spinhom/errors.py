"""Exception hierarchy shared by all spinhom modules."""


class SpinHomError(Exception):
    """Base class for every error raised by spinhom."""


class DimensionTooSmall(SpinHomError, ValueError):
    pass


class OutOfBall(SpinHomError, ValueError):
    pass


class BadCount(SpinHomError, ValueError):
    pass


class DimensionMismatch(SpinHomError, ValueError):
    pass


class EmptyRegion(SpinHomError, ValueError):
    pass


class OutsideDomain(SpinHomError, KeyError):
    pass


class InvalidParams(SpinHomError, ValueError):
    pass


class NotEnoughDiscord(SpinHomError):
    """Too few disjoint pairs of sufficiently non-aligned spins."""


class TargetOnSphere(SpinHomError):
    """Target average lies on the unit sphere; a sparse correction cannot reach it."""


class WNormTooLarge(SpinHomError):
    """Residual vector too long to be split over the selected nodes."""


class InfeasibleTarget(SpinHomError, ValueError):
    """Target average outside the closed unit ball."""


class BudgetExhausted(SpinHomError):
    """Search ended without any feasible configuration."""


class ConfigError(SpinHomError, ValueError):
    """Invalid run configuration; the message names the offending field."""
