"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: input errors -> 2, budget errors -> 3,
invariant violations -> 4.
"""

from __future__ import annotations

import os


class WildTorsorError(Exception):
    """Base class for library errors."""


class InputError(WildTorsorError, ValueError):
    """Malformed or out-of-domain input (bad group string, mismatched specs, ...)."""


class BudgetExceeded(WildTorsorError):
    """A configured size cap or enumeration budget would be exceeded."""


class CapExceeded(BudgetExceeded):
    """A polynomial-generation cap (length, prime, arity) was exceeded."""


class InvariantViolation(WildTorsorError, AssertionError):
    """An internal mathematical invariant failed; indicates a bug."""


DEFAULT_BUDGET = 1 << 24
BUDGET_ENV = "WILDTORSOR_BUDGET"


def default_budget() -> int:
    """Enumeration budget, overridable through the ``WILDTORSOR_BUDGET`` env var."""
    raw = os.environ.get(BUDGET_ENV)
    if raw is None:
        return DEFAULT_BUDGET
    try:
        value = int(raw)
    except ValueError:
        raise InputError(f"{BUDGET_ENV} must be an integer, got {raw!r}") from None
    if value <= 0:
        raise InputError(f"{BUDGET_ENV} must be positive")
    return value


def check_budget(size: int, budget: int | None = None, what: str = "enumeration") -> None:
    limit = default_budget() if budget is None else budget
    if size > limit:
        raise BudgetExceeded(f"{what} of size {size} exceeds budget {limit}")
