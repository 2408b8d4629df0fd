"""Exception hierarchy shared by every module."""

from __future__ import annotations


class HatGuessError(Exception):
    pass


class InvalidInput(HatGuessError, ValueError):
    """Malformed graph, coloring, strategy or parameter."""


class BudgetExceeded(HatGuessError):
    """A requested enumeration is larger than the configured budget.

    ``required`` is kept as an exact Python int so callers can report
    astronomically large counts (e.g. 66**144) without loss.
    """

    def __init__(self, what: str, required: int, budget: int):
        self.what = what
        self.required = required
        self.budget = budget
        super().__init__(f"{what}: {required} exceeds budget {budget}")


class ContractError(HatGuessError):
    """A precondition of a construction does not hold."""


class Contradiction(HatGuessError):
    """An existence argument failed to produce its witness.

    Raised only when a counting argument that should guarantee a
    candidate turns up empty, which would mean the argument is wrong.
    """


class NotFound(HatGuessError):
    """A search ended without a witness.

    ``capped`` is True when the search stopped at its budget rather than
    exhausting the space, so absence is not proven.
    """

    def __init__(self, what: str, capped: bool = False):
        self.what = what
        self.capped = capped
        super().__init__(f"{what} not found" + (" (search capped)" if capped else ""))
