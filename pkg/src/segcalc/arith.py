"""Exact modular arithmetic: multiplicative orders, l-parts, and l-adic
valuations of q^n - 1 via lifting the exponent.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

from segcalc.errors import DomainError

__all__ = [
    "PrimePair",
    "is_prime",
    "mult_order",
    "valuation",
    "ell_part",
    "prime_to_ell",
    "is_ell_power",
    "c_value",
    "c_value_direct",
]


def is_prime(n: int) -> bool:
    """Trial-division primality test (inputs stay small in every sweep)."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class PrimePair:
    """Residue-field cardinality ``q`` together with a prime ``ell`` prime to it."""

    q: int
    ell: int

    def __post_init__(self):
        if not isinstance(self.q, int) or self.q < 2:
            raise DomainError(f"q must be an integer >= 2, got {self.q!r}")
        if not isinstance(self.ell, int) or not is_prime(self.ell):
            raise DomainError(f"ell must be prime, got {self.ell!r}")
        if gcd(self.q, self.ell) != 1:
            raise DomainError(f"ell={self.ell} divides q={self.q}")


def mult_order(x: int, n: int) -> int:
    """Smallest ``t >= 1`` with ``x**t == 1 (mod n)``."""
    if n < 2:
        raise DomainError(f"modulus must be >= 2, got {n}")
    if gcd(x, n) != 1:
        raise DomainError(f"{x} is not a unit modulo {n}")
    x %= n
    y, t = x, 1
    while y != 1:
        y = (y * x) % n
        t += 1
    return t


def valuation(n: int, ell: int) -> int:
    """Exponent of ``ell`` in ``n`` (``n >= 1``)."""
    if n < 1:
        raise DomainError(f"valuation needs n >= 1, got {n}")
    v = 0
    while n % ell == 0:
        n //= ell
        v += 1
    return v


def ell_part(n: int, ell: int) -> tuple[int, int]:
    """Split ``n`` as ``(ell**v, rest)`` with ``rest`` prime to ``ell``."""
    if n < 1:
        raise DomainError(f"ell_part needs n >= 1, got {n}")
    power = 1
    while n % ell == 0:
        n //= ell
        power *= ell
    return power, n


def prime_to_ell(n: int, ell: int) -> int:
    return ell_part(n, ell)[1]


def is_ell_power(c: int, ell: int) -> bool:
    return c >= 1 and ell_part(c, ell)[1] == 1


def _valuation_of_power_minus_one(q: int, e: int, ell: int) -> int:
    # v_ell(q^e - 1) by testing q^e == 1 modulo growing powers of ell
    v, modulus = 0, ell
    while pow(q, e, modulus) == 1:
        v += 1
        modulus *= ell
    return v


def c_value(pair: PrimePair, n: int) -> int:
    """The exact power of ``ell`` dividing ``q**n - 1``.

    Uses lifting the exponent, so ``q**n`` is never formed:

    * odd ``ell``: with ``e`` the order of ``q`` mod ``ell``, the valuation
      is 0 unless ``e | n``, and ``v(q^e - 1) + v(n / e)`` otherwise;
    * ``ell == 2``: ``v(q - 1)`` for odd ``n`` and
      ``v(q - 1) + v(q + 1) + v(n) - 1`` for even ``n``.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    q, ell = pair.q, pair.ell
    if ell == 2:
        if n % 2:
            v = valuation(q - 1, 2)
        else:
            v = valuation(q - 1, 2) + valuation(q + 1, 2) + valuation(n, 2) - 1
        return 2**v
    e = mult_order(q, ell)
    if n % e:
        return 1
    v = _valuation_of_power_minus_one(q, e, ell) + valuation(n // e, ell)
    return ell**v


def c_value_direct(pair: PrimePair, n: int) -> int:
    """Big-integer oracle for :func:`c_value`."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    return ell_part(pair.q**n - 1, pair.ell)[0]
