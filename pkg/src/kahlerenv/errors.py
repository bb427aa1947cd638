"""Exception hierarchy shared by every module of the package."""


class KahlerEnvError(Exception):
    """Base class for all errors raised by kahlerenv."""


class ShapeError(KahlerEnvError, ValueError):
    """Invalid tuple shape (n, k)."""


class ShapeMismatch(KahlerEnvError, ValueError):
    pass


class AllZero(KahlerEnvError, ValueError):
    pass


class ChartUndefined(KahlerEnvError, ValueError):
    pass


class CrossTupleSwap(KahlerEnvError, ValueError):
    pass


class InvalidGenerator(KahlerEnvError, ValueError):
    pass


class InvalidCount(KahlerEnvError, ValueError):
    pass


class ZeroTuple(KahlerEnvError, ValueError):
    """Some n-tuple of homogeneous coordinates vanishes identically."""


class IncidenceError(KahlerEnvError, ValueError):
    pass


class EvaluationFailed(KahlerEnvError, RuntimeError):
    pass


class NonFiniteSample(KahlerEnvError, ArithmeticError):
    """A finite-difference stencil hit a non-finite field value."""


class NotHermitian(KahlerEnvError, ValueError):
    pass


class OutOfRange(KahlerEnvError, ValueError):
    pass


class DomainError(KahlerEnvError, ValueError):
    pass


class AlphaOutOfRange(KahlerEnvError, ValueError):
    pass


class InvalidSpec(KahlerEnvError, ValueError):
    pass


class NeverAdmissible(KahlerEnvError, RuntimeError):
    pass


class ConfigError(KahlerEnvError, ValueError):
    pass
