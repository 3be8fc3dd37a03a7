"""Exception hierarchy shared by all modules."""


class AoedError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(AoedError, ValueError):
    pass


class NotSPD(AoedError, ValueError):
    pass


class NonPositiveNoise(AoedError, ValueError):
    pass


class InvalidBudget(AoedError, ValueError):
    pass


class NonFiniteObjective(AoedError, ArithmeticError):
    pass


class NotCertified(AoedError, RuntimeError):
    pass


class NotBinary(AoedError, ValueError):
    pass


class IndexActive(AoedError, ValueError):
    pass


class TooLarge(AoedError, ValueError):
    pass


class RangeMismatch(AoedError, ValueError):
    pass


class InvalidSpec(AoedError, ValueError):
    pass


class FormatError(AoedError, ValueError):
    pass


class IoError(AoedError, OSError):
    pass
