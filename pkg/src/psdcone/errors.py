"""Exception hierarchy shared by all modules."""


class PsdConeError(Exception):
    """Base class for every error raised by the library."""


class DimMismatch(PsdConeError, ValueError):
    pass


class SpectralFailure(PsdConeError, ArithmeticError):
    pass


class NotPsd(PsdConeError, ValueError):
    pass


class NotHermitian(PsdConeError, ValueError):
    pass


class DimensionCap(PsdConeError, ValueError):
    pass


class RankOutOfRange(PsdConeError, ValueError):
    pass


class GenerationFailure(PsdConeError, RuntimeError):
    pass


class GramHasNegativeEntry(PsdConeError, ValueError):
    pass


class NotInOrthant(PsdConeError, ValueError):
    pass


class ResidualTooHigh(PsdConeError, ValueError):
    pass


class ArityError(PsdConeError, ValueError):
    pass
