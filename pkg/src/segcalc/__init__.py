"""Exact arithmetic, segment calculus and brute-force identity checks for
mod-l congruences between cuspidal and Speh parameters."""

from segcalc.errors import CounterexampleError, DomainError, InconsistencyError, SegcalcError

__version__ = "0.1.0"

__all__ = ["SegcalcError", "DomainError", "InconsistencyError", "CounterexampleError", "__version__"]
