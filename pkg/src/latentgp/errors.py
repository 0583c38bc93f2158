"""Exception hierarchy.

Data problems derive from :class:`DataError`, numerical breakdowns from
:class:`NumericalError`. The CLI maps the two families onto distinct exit codes.
"""


class LatentGPError(Exception):
    pass


class DataError(LatentGPError, ValueError):
    pass


class MissingFile(DataError):
    pass


class MalformedRow(DataError):
    def __init__(self, row, message):
        self.row = row
        super().__init__(f"row {row}: {message}")


class SingleClassData(DataError):
    pass


class DuplicatePoint(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class EmptyBounds(DataError):
    pass


class EmptyTrace(DataError):
    pass


class NumericalError(LatentGPError, ArithmeticError):
    pass


class NotPositiveDefinite(NumericalError):
    pass


class NonPositiveLengthscale(NumericalError, ValueError):
    pass


class NonPositiveScale(NumericalError, ValueError):
    pass


class NoCrossings(NumericalError):
    pass


class ChainFailure(NumericalError):
    """A numerical failure inside the sampler, tagged with its iteration."""

    def __init__(self, iteration, cause):
        self.iteration = iteration
        self.cause = cause
        where = f"MCMC iteration {iteration}" if iteration >= 0 else "MCMC initialisation"
        super().__init__(f"{where}: {cause}")
