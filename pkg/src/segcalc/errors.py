"""Exception types shared across segcalc."""


class SegcalcError(Exception):
    """Base class for every error raised by segcalc."""


class DomainError(SegcalcError, ValueError):
    """An input lies outside the domain of an operation."""


class InconsistencyError(SegcalcError, ArithmeticError):
    """A parameter tuple violates the congruence-counting formulas."""


class CounterexampleError(SegcalcError, AssertionError):
    """A brute-force replay found a value that a deduction rules out."""
