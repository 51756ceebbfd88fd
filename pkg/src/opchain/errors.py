"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """A parameter value lies outside its documented domain."""


class ContractError(ValueError):
    """Arguments are individually valid but inconsistent with each other
    (dimension mismatch, arity mismatch, index out of range)."""


class BudgetExceededError(RuntimeError):
    """The exhaustive oracle would exceed its evaluation budget."""


class DatasetError(ValueError):
    """A dataset file is missing, malformed or inconsistent."""
