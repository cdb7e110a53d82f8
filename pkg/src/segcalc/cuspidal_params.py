"""Numeric shadows of l-adic cuspidal representations and their reductions
mod l, with the constraint system tying the two together.

A :class:`CuspidalParam` carries the degree, torsion number and shift of an
l-adic cuspidal; a :class:`ModLReduction` carries the length ``a`` of its
reduction, the torsion number and shift of a mod-l factor, the size ``k`` of
its supercuspidal support and the ``eps`` data.  Levels and endo-classes are
opaque: they are compared, never computed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Optional

from segcalc.arith import (
    PrimePair,
    ell_part,
    is_ell_power,
    mult_order,
    prime_to_ell,
)
from segcalc.errors import DomainError, InconsistencyError

__all__ = [
    "CuspidalParam",
    "ModLReduction",
    "ConstraintResult",
    "ValidationReport",
    "omega",
    "epsilon",
    "epsilon_from_supercuspidal",
    "validate_reduction",
    "w_invariant",
    "t_of",
    "is_admissible_w",
    "w_prime_to_ell_check",
    "prime_to_ell_divides_ell_minus_one",
    "b_of",
    "twist_congruence",
    "record_to_dict",
    "record_from_dict",
    "record_to_text",
    "record_from_text",
    "record_to_json",
    "record_from_json",
]


def _check_positive(name, value):
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise DomainError(f"{name} must be a positive integer, got {value!r}")


@dataclass(frozen=True)
class CuspidalParam:
    deg: int
    n_tors: int
    shift: int
    ctx: PrimePair
    level: Fraction = Fraction(0)
    endo: str = "Theta"

    def __post_init__(self):
        for name in ("deg", "n_tors", "shift"):
            _check_positive(name, getattr(self, name))
        level = Fraction(self.level)
        if level < 0:
            raise DomainError(f"level must be nonnegative, got {level}")
        object.__setattr__(self, "level", level)


@dataclass(frozen=True)
class ModLReduction:
    """Mod-l side of a reduction.

    The supercuspidal fields (``eps``, ``sc_shift``, ``sc_eps``) are optional;
    ``eps`` defaults to nothing because it is recomputable from ``n_mod``.
    Constraints between fields are reported by :func:`validate_reduction`
    rather than raised here, so sweeps can tabulate failures.
    """

    a: int
    n_mod: int
    shift_mod: int
    k: int = 1
    eps: Optional[int] = None
    sc_shift: Optional[int] = None
    sc_eps: Optional[int] = None

    def __post_init__(self):
        for name in ("a", "n_mod", "shift_mod", "k"):
            _check_positive(name, getattr(self, name))
        for name in ("eps", "sc_shift", "sc_eps"):
            value = getattr(self, name)
            if value is not None:
                _check_positive(name, value)

    def without_supercuspidal(self) -> "ModLReduction":
        return ModLReduction(self.a, self.n_mod, self.shift_mod, self.k)


def omega(pair: PrimePair, n_mod: int, shift_mod: int) -> int:
    """Order of ``q**(n*s)`` in ``(Z/ell)^x``."""
    _check_positive("n_mod", n_mod)
    _check_positive("shift_mod", shift_mod)
    return mult_order(pow(pair.q, n_mod * shift_mod, pair.ell), pair.ell)


def epsilon(pair: PrimePair, n_mod: int) -> int:
    """Order of ``q**n`` in ``(Z/ell)^x``; the period of the nu-twist orbit."""
    _check_positive("n_mod", n_mod)
    return mult_order(pow(pair.q, n_mod, pair.ell), pair.ell)


def epsilon_from_supercuspidal(sc_eps: int, sc_shift: int) -> int:
    _check_positive("sc_eps", sc_eps)
    _check_positive("sc_shift", sc_shift)
    return gcd(sc_eps, sc_shift)


@dataclass(frozen=True)
class ConstraintResult:
    name: str
    passed: bool
    detail: str = ""
    applicable: bool = True


@dataclass(frozen=True)
class ValidationReport:
    constraints: tuple[ConstraintResult, ...] = field(default_factory=tuple)

    @property
    def valid(self) -> bool:
        return all(c.passed for c in self.constraints)

    @property
    def failures(self) -> list[str]:
        return [c.name for c in self.constraints if not c.passed]

    def __getitem__(self, name: str) -> ConstraintResult:
        for c in self.constraints:
            if c.name == name:
                return c
        raise KeyError(name)

    def as_dict(self) -> dict:
        return {
            "valid": self.valid,
            "constraints": {
                c.name: {"pass": c.passed, "applicable": c.applicable, "detail": c.detail}
                for c in self.constraints
            },
        }


def validate_reduction(
    sigma: CuspidalParam, red: ModLReduction, d: Optional[int] = None
) -> ValidationReport:
    """Check a candidate reduction against the constraint system.

    Constraints, in report order:

    ``i_torsion``
        ``n_tors = a * n_mod * ell**u`` with ``n_mod`` the prime-to-ell part
        of ``n_tors / a``.
    ``ii_shift``
        ``shift_mod = a * shift``.
    ``iii_length``
        for ``a > 1``, the prime-to-ell part of ``a`` is ``epsilon(n_mod)``.
    ``iv_supercuspidal``
        ``eps = gcd(sc_eps, sc_shift)``; skipped when those fields are absent.
    ``eps_order``
        a stored ``eps`` equals ``epsilon(n_mod)``; skipped when absent.
    ``a_divides_d``
        only when ``d`` is given.
    """
    pair, ell = sigma.ctx, sigma.ctx.ell
    results = []

    if sigma.n_tors % red.a:
        results.append(ConstraintResult("i_torsion", False, f"a={red.a} does not divide n_tors={sigma.n_tors}"))
    else:
        power, rest = ell_part(sigma.n_tors // red.a, ell)
        ok = rest == red.n_mod
        results.append(ConstraintResult(
            "i_torsion", ok,
            f"n_tors/a = {power}*{rest}, n_mod={red.n_mod}",
        ))

    results.append(ConstraintResult(
        "ii_shift", red.shift_mod == red.a * sigma.shift,
        f"shift_mod={red.shift_mod}, a*shift={red.a * sigma.shift}",
    ))

    eps_computed = epsilon(pair, red.n_mod)
    if red.a > 1:
        a_rest = prime_to_ell(red.a, ell)
        results.append(ConstraintResult(
            "iii_length", a_rest == eps_computed,
            f"prime-to-ell part of a is {a_rest}, epsilon={eps_computed}",
        ))
    else:
        results.append(ConstraintResult("iii_length", True, "a = 1", applicable=False))

    if red.eps is not None and red.sc_eps is not None and red.sc_shift is not None:
        g = gcd(red.sc_eps, red.sc_shift)
        results.append(ConstraintResult(
            "iv_supercuspidal", g == red.eps,
            f"gcd(sc_eps, sc_shift)={g}, eps={red.eps}",
        ))
    else:
        results.append(ConstraintResult("iv_supercuspidal", True, "fields absent", applicable=False))

    if red.eps is not None:
        results.append(ConstraintResult(
            "eps_order", red.eps == eps_computed,
            f"eps={red.eps}, order of q^n_mod mod ell={eps_computed}",
        ))

    if d is not None:
        _check_positive("d", d)
        results.append(ConstraintResult("a_divides_d", d % red.a == 0, f"a={red.a}, d={d}"))

    return ValidationReport(tuple(results))


def w_invariant(k: int, a: int) -> int:
    _check_positive("k", k)
    _check_positive("a", a)
    return k * a


def t_of(w: int, c: int, ell: int) -> int:
    """Number of congruent classes forced by the piecewise count.

    ``t * w`` equals ``c`` when ``w == 1``, ``c - 1`` when ``1 < w < ell``
    and ``c * (ell - 1) / ell`` when ``w >= ell``.  A non-integral or
    non-positive ``t`` raises :class:`InconsistencyError`.
    """
    _check_positive("w", w)
    if not is_ell_power(c, ell):
        raise DomainError(f"c={c} is not a power of ell={ell}")
    if w == 1:
        numerator = c
    elif w < ell:
        numerator = c - 1
    else:
        numerator, rem = divmod(c * (ell - 1), ell)
        if rem:
            raise InconsistencyError(f"c*(ell-1)/ell is not integral for c={c}, ell={ell}")
    t, rem = divmod(numerator, w)
    if rem:
        raise InconsistencyError(f"w={w} does not divide {numerator} (c={c}, ell={ell})")
    if t < 1:
        raise InconsistencyError(f"t={t} < 1 for w={w}, c={c}, ell={ell}")
    return t


def prime_to_ell_divides_ell_minus_one(w: int, ell: int) -> bool:
    return (ell - 1) % prime_to_ell(w, ell) == 0


def is_admissible_w(w: int, c: int, ell: int) -> bool:
    """Arithmetic admissibility of an invariant pair ``(w, c)``.

    * the prime-to-ell part of ``w`` divides ``ell - 1``;
    * ``ell | w`` once ``w >= ell``;
    * for ``w > 1`` the ell-part of ``w`` is strictly below ``c``
      (the ell-part of ``a`` divides that of the torsion number, which is
      strictly below ``c``).
    """
    if w < 1 or not is_ell_power(c, ell):
        return False
    if not prime_to_ell_divides_ell_minus_one(w, ell):
        return False
    if w >= ell and w % ell:
        return False
    if w > 1 and ell_part(w, ell)[0] >= c:
        return False
    return True


def w_prime_to_ell_check(w: int, red: ModLReduction, ell: int) -> bool:
    """Whether the prime-to-ell part of ``w`` equals ``red.sc_eps``.

    Divisibility of that part into ``ell - 1`` is a separate check, see
    :func:`prime_to_ell_divides_ell_minus_one`.
    """
    if w <= 1:
        raise DomainError("the prime-to-ell part of w is only constrained for w > 1")
    if red.sc_eps is None:
        raise DomainError("reduction carries no sc_eps")
    return prime_to_ell(w, ell) == red.sc_eps


def b_of(shift: int, kk0: int) -> int:
    """Number of Galois conjugates ``b`` with ``b * shift = [k : k0]``."""
    _check_positive("shift", shift)
    _check_positive("kk0", kk0)
    b, rem = divmod(kk0, shift)
    if rem:
        raise InconsistencyError(f"shift={shift} does not divide [k:k0]={kk0}")
    return b


def twist_congruence(char_red_order: int, n_tors: int) -> bool:
    """Whether twisting by a character whose reduction has the given order
    yields a congruent representation."""
    _check_positive("char_red_order", char_red_order)
    _check_positive("n_tors", n_tors)
    return n_tors % char_red_order == 0


# -- serialization -----------------------------------------------------------

_SIGMA_KEYS = ("deg", "n_tors", "shift", "level", "endo")
_RED_KEYS = ("a", "n_mod", "shift_mod", "k", "eps", "sc_shift", "sc_eps")


def record_to_dict(sigma: CuspidalParam, red: Optional[ModLReduction] = None) -> dict:
    out = {"q": sigma.ctx.q, "ell": sigma.ctx.ell}
    for key in _SIGMA_KEYS:
        value = getattr(sigma, key)
        out[key] = str(value) if key == "level" else value
    if red is not None:
        for key in _RED_KEYS:
            value = getattr(red, key)
            if value is not None:
                out[key] = value
    return out


def _to_int(key, value):
    if isinstance(value, bool):
        raise DomainError(f"{key} must be an integer, got {value!r}")
    try:
        return int(value)
    except (TypeError, ValueError):
        raise DomainError(f"{key} must be an integer, got {value!r}") from None


def record_from_dict(data: dict) -> tuple[CuspidalParam, Optional[ModLReduction]]:
    known = {"q", "ell", *_SIGMA_KEYS, *_RED_KEYS}
    unknown = set(data) - known
    if unknown:
        raise DomainError(f"unknown record fields: {sorted(unknown)}")
    try:
        ctx = PrimePair(_to_int("q", data["q"]), _to_int("ell", data["ell"]))
        sigma = CuspidalParam(
            deg=_to_int("deg", data["deg"]),
            n_tors=_to_int("n_tors", data["n_tors"]),
            shift=_to_int("shift", data["shift"]),
            ctx=ctx,
            level=Fraction(str(data.get("level", "0"))),
            endo=str(data.get("endo", "Theta")),
        )
    except KeyError as exc:
        raise DomainError(f"missing record field {exc.args[0]!r}") from None
    if "a" not in data:
        return sigma, None
    kwargs = {key: _to_int(key, data[key]) for key in _RED_KEYS if key in data}
    try:
        red = ModLReduction(**kwargs)
    except TypeError as exc:
        raise DomainError(str(exc)) from None
    return sigma, red


def record_to_text(sigma: CuspidalParam, red: Optional[ModLReduction] = None) -> str:
    """Flat ``key=value`` record, one pair per line."""
    return "\n".join(f"{k}={v}" for k, v in record_to_dict(sigma, red).items()) + "\n"


def record_from_text(text: str) -> tuple[CuspidalParam, Optional[ModLReduction]]:
    data = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise DomainError(f"line {lineno}: expected key=value, got {raw!r}")
        data[key.strip()] = value.strip()
    return record_from_dict(data)


def record_to_json(sigma: CuspidalParam, red: Optional[ModLReduction] = None) -> str:
    return json.dumps(record_to_dict(sigma, red), sort_keys=True)


def record_from_json(text: str) -> tuple[CuspidalParam, Optional[ModLReduction]]:
    return record_from_dict(json.loads(text))

