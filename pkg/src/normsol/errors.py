"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    """Out-of-range or inconsistent input."""


class RangeError(ArithmeticError):
    """A value left the range the numerics can represent (overflow, unresolvable dilation)."""


class GeometryError(RuntimeError):
    """The fiber map has no interior maximum in the search bracket."""


class RefinementError(RuntimeError):
    """Newton refinement hit a singular or non-contracting linearization."""


class ConfigError(ValueError):
    """Bad run configuration (unknown key, unparsable or inadmissible value)."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key
