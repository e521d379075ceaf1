"""Exception types shared across the package.

The CLI maps :class:`InputError` subclasses to exit code 2 and
:class:`DegenerateSampleError` to exit code 3.
"""


class InputError(ValueError):
    """Bad input: malformed data, invalid parameters, too few readings."""


class NonFiniteInputError(InputError):
    def __init__(self, index, value):
        super().__init__(f"non-finite value {value!r} at index {index}")
        self.index = index
        self.value = value


class InsufficientSampleError(InputError):
    def __init__(self, n, minimum, what="this estimate"):
        super().__init__(f"{what} needs at least {minimum} readings, got {n}")
        self.n = n
        self.minimum = minimum


class DegenerateSampleError(ValueError):
    """The data carry no usable dispersion (e.g. a constant sample)."""
