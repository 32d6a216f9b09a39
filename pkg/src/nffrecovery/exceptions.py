"""Exception types raised by :mod:`nffrecovery`."""


class ParameterError(ValueError):
    """An argument is outside its valid range or has the wrong shape."""


class DegenerateKernelError(ValueError):
    """The kernel matrix is singular or indefinite within tolerance."""


class RankError(ValueError):
    """The feature matrix does not have full row rank."""
