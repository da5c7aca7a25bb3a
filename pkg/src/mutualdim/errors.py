"""Exception types. All derive from ValueError so callers can catch broadly."""


class DimensionError(ValueError):
    """Alphabet sizes or word lengths do not line up."""


class RangeError(ValueError):
    """A parameter lies outside its admissible range."""


class CapacityError(ValueError):
    """A requested table would not fit the configured capacity."""


class InsufficientDataError(ValueError):
    pass


class SingularMeasureError(ValueError):
    """The reference measure assigns zero probability to an observed symbol."""


class UnsupportedAlphabetError(ValueError):
    pass


class NoSolutionError(ValueError):
    pass


class NotNormalizableError(ValueError):
    pass


class UnclassifiableError(ValueError):
    pass
