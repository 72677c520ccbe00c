class SectorLabError(Exception):
    """Base class for errors raised by sectorlab."""


class DimensionError(SectorLabError, ValueError):
    pass


class NonFiniteError(SectorLabError, ValueError):
    pass


class NotAccretiveError(SectorLabError, ValueError):
    pass


class NotPositiveDefiniteError(SectorLabError, ValueError):
    pass


class IllConditionedError(SectorLabError, ArithmeticError):
    """A sample whose eigenbasis is too ill-conditioned to trust; resample it."""


class EigenConvergenceError(SectorLabError, ArithmeticError):
    pass


class ResampleBudgetError(SectorLabError, RuntimeError):
    """A rejection sampler ran out of attempts; the config is too tight."""


class UnknownIdError(SectorLabError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class ReportSchemaError(SectorLabError, ValueError):
    pass


class ReplayMismatchError(SectorLabError):
    pass
