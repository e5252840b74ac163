"""Exception types raised by the solver library."""


class IncentiveError(Exception):
    """Base class for all library errors."""


class AllBannedError(IncentiveError):
    """Every alternative of an individual is banned, so no choice exists."""

    def __init__(self, individual_id):
        super().__init__(f"all alternatives of individual {individual_id} are banned")
        self.individual_id = individual_id


class NegativeBudgetError(IncentiveError, ValueError):
    pass


class BudgetDecreasedError(IncentiveError, ValueError):
    pass


class IterationOutOfRangeError(IncentiveError, IndexError):
    pass


class SpendOutOfRangeError(IncentiveError, ValueError):
    pass


class InstanceTooLargeError(IncentiveError):
    pass


class NonGridWeightsError(IncentiveError, ValueError):
    pass


class NotProportionalIncentiveError(IncentiveError, ValueError):
    pass


class NonPositiveScaleError(IncentiveError, ValueError):
    pass


class ImprobableDefaultError(IncentiveError):
    """Rejection sampling could not reproduce the observed default choice."""


class InvalidConfigError(IncentiveError, ValueError):
    pass


class ParseError(IncentiveError, ValueError):
    def __init__(self, message, line, column):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class SchemaError(IncentiveError, ValueError):
    def __init__(self, message, path):
        super().__init__(f"{path}: {message}")
        self.path = path
