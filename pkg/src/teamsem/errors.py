"""Shared exception types."""


class DomainError(ValueError):
    """A variable, element, or symbol is missing from the domain it is used in."""


class FormulaSyntaxError(ValueError):
    """Raised by the parser; carries the offending token position."""

    def __init__(self, message, position=None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


class ValidationError(ValueError):
    """A sentence does not have the syntactic shape required by a validator."""


class DependencyLookupError(LookupError):
    """An extensional dependency was queried off its table with a strict default."""


class BudgetExceededError(RuntimeError):
    """The evaluator exhausted its node-expansion budget.

    Distinguished from a boolean verdict: an evaluation that hits the budget
    never reports a (possibly wrong) answer.
    """
