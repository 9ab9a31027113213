"""Exception types raised by the simulator."""


class InvalidArgumentError(ValueError):
    """An argument is outside the domain of the operation."""


class NumericalError(RuntimeError):
    """A numerical procedure failed or lost the accuracy it promises."""


class HybridizationError(NumericalError):
    """Computational states have mixed too strongly with bus states to be identified."""


class ResonanceError(NumericalError):
    """A perturbative denominator vanishes: two coupled levels are (near) degenerate."""
