"""Wild abelian torsors over F_q((t)) and their height counting over F_q(t)."""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import BudgetExceeded, CapExceeded, InputError, InvariantViolation, WildTorsorError
from .field import GF, LaurentTail, field
from .torsor import GroupSpec, LocalClass, WittTail, conductor, disc_exponent, long_flag_of, reduce
from .witt import addition_polys, ghost_poly, inverse_polys

__all__ = [
    "__version__",
    "BudgetExceeded",
    "CapExceeded",
    "InputError",
    "InvariantViolation",
    "WildTorsorError",
    "GF",
    "LaurentTail",
    "field",
    "GroupSpec",
    "LocalClass",
    "WittTail",
    "conductor",
    "disc_exponent",
    "long_flag_of",
    "reduce",
    "addition_polys",
    "ghost_poly",
    "inverse_polys",
]
