"""Exception types shared by the numeric and lab modules."""


class DomainError(ValueError):
    """An argument lies outside the domain where a formula is defined."""


class BudgetError(ValueError):
    """An exhaustive computation would exceed its desk-scale budget."""


class UnprovenRegimeError(ValueError):
    """Threshold structure was requested where it is not established (k < 5).

    ``report`` carries the sign-scan diagnostics that were gathered before
    giving up, so callers can show what was actually found.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report or {}
