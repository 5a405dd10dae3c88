"""Exception types raised across the package."""


class InvalidDimensionError(ValueError):
    """A size parameter (RB count, antenna count, ...) is out of range."""


class EmptyCellError(ValueError):
    """A cell was declared with zero users."""


class ShapeError(ValueError):
    """Array arguments have inconsistent shapes."""


class NumericalError(ArithmeticError):
    """A matrix is singular/ill-conditioned or a denominator vanished."""


class InvalidAllocationError(ValueError):
    """A user was assigned zero resource blocks where at least one is needed."""


class IntegrityError(ValueError):
    """A binary assignment vector violates the BIP constraints."""


class InstanceTooLargeError(ValueError):
    """Exhaustive enumeration was requested for an instance above the guard."""


class ConfigError(ValueError):
    """Run configuration failed validation.

    ``errors`` holds every problem found, not just the first one.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))
