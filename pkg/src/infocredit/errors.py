"""Exception hierarchy shared across the package.

Every error is a ``ValueError`` subclass so callers that only care about
"bad input" can catch that; the CLI maps :class:`DataError` subclasses to
exit code 3 and :class:`NumericalError` subclasses to exit code 4.
"""


class InfoCreditError(ValueError):
    """Base class for all package errors."""


class ConfigError(InfoCreditError):
    """Invalid configuration or arguments."""


class DataError(InfoCreditError):
    """Input data cannot support the requested computation."""


class NumericalError(InfoCreditError):
    """A numerical routine failed."""


# divergence
class LengthMismatch(InfoCreditError):
    pass


class AbsoluteContinuityViolation(InfoCreditError):
    pass


class ZeroBinMass(InfoCreditError):
    pass


class InvalidDistribution(InfoCreditError):
    pass


# binning
class SingleClassLabels(DataError):
    pass


class NonFiniteValue(DataError):
    pass


class EmptyClass(DataError):
    pass


# woe / psi
class BinStructureMismatch(DataError):
    pass


class EmptyEpoch(DataError):
    pass


class NegativeIv(InfoCreditError):
    pass


# fairness
class NonpositiveDenominator(NumericalError):
    pass


# models
class RankDeficient(NumericalError):
    pass


class SingleClass(DataError):
    pass


# pareto
class EmptyGroup(DataError):
    pass


class NonConvergence(NumericalError):
    pass


# synthdata
class InvalidConfig(ConfigError):
    pass


class MissingColumn(DataError):
    pass


class ParseFailure(DataError):
    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


class EmptyFile(DataError):
    pass


class DegenerateSplit(DataError):
    pass
