"""Exception types raised by optkernel."""


class OptKernelError(Exception):
    """Base class for all library errors."""


class InvalidSpecError(OptKernelError, ValueError):
    """A kernel specification is malformed or incompatible with the inputs."""


class InvalidConfigError(OptKernelError, ValueError):
    """A configuration value is out of range."""


class InvalidInputError(OptKernelError, ValueError):
    """Input arrays have the wrong shape or contain unusable values."""


class NumericalSingularityError(OptKernelError, ArithmeticError):
    """A linear system could not be factorized, even after adding jitter."""


class DatasetError(OptKernelError, ValueError):
    """A dataset file could not be parsed."""
