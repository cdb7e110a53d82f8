"""A free graded commutative bigebra standing in for the Grothendieck ring of
finite-length representations.

Basis monomials are multisets of atoms:

``C``   a cuspidal ``base * nu**exp``
``Z``   a segment representation ``Z(base * nu**exp, n)``
``z``   its finite-group counterpart ``z(base, n)``
``St``  ``St(base, shape)`` (p-adic), ``st`` (finite); inert under the coproduct

Each base carries a degree, an exponent modulus (0 means no period) and a
step, the nu-exponent of ``nu_base``.  Exponents are stored reduced modulo
the period, so ``sigma nu**e == sigma`` is a property of the data.

Elements may have arity > 1, in which case keys are tuples of monomials and
the element lives in a tensor power.  The coproduct of an arity-r element
applied to one factor has arity r + 1.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, replace
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Union

from segcalc.errors import DomainError
from segcalc.multisegment import Multisegment, Partition

__all__ = [
    "Base",
    "Atom",
    "RingElement",
    "cusp",
    "zseg",
    "zfin",
    "st_atom",
    "unit",
    "element",
    "product",
    "tensor",
    "coproduct",
    "restrict",
    "restrict_chain",
    "cusp_chain",
    "twist",
    "multiplicity",
    "pair_with_cuspidal",
]

CUSP, ZSEG, ZFIN, ST_FIN, ST_PADIC = "Cusp", "Zseg", "Zfin", "StFin", "StPadic"
KINDS = (CUSP, ZSEG, ZFIN, ST_FIN, ST_PADIC)

_LABEL_RE = re.compile(r"[^\W\d]\w*'*")


@dataclass(frozen=True, order=True)
class Base:
    """Cuspidal (or finite cuspidal) label an atom is built on.

    ``modulus`` is the period of the nu-twist (0 for none); ``step`` is the
    exponent ``s`` with ``nu_base = nu**s``.
    """

    label: str = "s"
    degree: int = 1
    modulus: int = 0
    step: int = 1

    def __post_init__(self):
        if not _LABEL_RE.fullmatch(self.label):
            raise DomainError(f"invalid base label {self.label!r}")
        if self.degree < 1:
            raise DomainError(f"base degree must be >= 1, got {self.degree}")
        if self.modulus < 0:
            raise DomainError(f"modulus must be >= 0, got {self.modulus}")

    def reduce(self, exp: int) -> int:
        return exp % self.modulus if self.modulus else exp

    @property
    def twist_trivial(self) -> bool:
        """Whether ``base * nu_base`` is isomorphic to ``base``."""
        return self.modulus != 0 and self.step % self.modulus == 0

    def __str__(self) -> str:
        opts = []
        if self.degree != 1:
            opts.append(f"d={self.degree}")
        if self.modulus:
            opts.append(f"e={self.modulus}")
        if self.step != 1:
            opts.append(f"s={self.step}")
        return ";".join([self.label] + opts)


DEFAULT_BASE = Base()


@dataclass(frozen=True, eq=False)
class Atom:
    kind: str
    base: Base = DEFAULT_BASE
    exp: int = 0
    length: int = 1
    shape: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown atom kind {self.kind!r}")
        if self.kind in (ST_FIN, ST_PADIC):
            Partition(self.shape)
            if not self.shape:
                raise DomainError("St atoms need a nonempty shape")
            object.__setattr__(self, "length", sum(self.shape))
        elif self.shape:
            raise DomainError(f"{self.kind} atoms carry no shape")
        if self.length < 1:
            raise DomainError(f"atom length must be >= 1, got {self.length}")
        if self.kind == CUSP and self.length != 1:
            raise DomainError("cuspidal atoms have length 1")
        if self.kind in (ZFIN, ST_FIN):
            # the finite side carries no nu-action
            object.__setattr__(self, "exp", 0)
        else:
            object.__setattr__(self, "exp", self.base.reduce(self.exp))
        # comparisons run in every product, so the key is built once
        b = self.base
        key = (self.kind, b.label, b.degree, b.modulus, b.step, self.exp, self.length, self.shape)
        object.__setattr__(self, "_key", key)
        object.__setattr__(self, "_hash", hash(key))
        object.__setattr__(self, "degree", b.degree * self.length)

    def __eq__(self, other) -> bool:
        return isinstance(other, Atom) and self._key == other._key

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "Atom") -> bool:
        return self._key < other._key

    def __le__(self, other: "Atom") -> bool:
        return self._key <= other._key

    def __gt__(self, other: "Atom") -> bool:
        return self._key > other._key

    def __ge__(self, other: "Atom") -> bool:
        return self._key >= other._key

    def shifted(self, j: int) -> "Atom":
        if self.kind in (ZFIN, ST_FIN):
            return self
        return replace(self, exp=self.exp + j)

    def __str__(self) -> str:
        b = "" if self.base == DEFAULT_BASE else f"[{self.base}]"
        if self.kind == CUSP:
            return f"C{b}({self.exp})"
        if self.kind == ZSEG:
            return f"Z{b}({self.exp},{self.length})"
        if self.kind == ZFIN:
            return f"z{b}({self.length})"
        shape = ",".join(map(str, self.shape))
        if self.kind == ST_FIN:
            return f"st{b}({shape})"
        return f"St{b}({self.exp};{shape})"


Monomial = tuple  # sorted tuple of Atom; () is the unit
Key = tuple  # tuple of Monomial, one per tensor factor


def cusp(exp: int = 0, base: Base = DEFAULT_BASE) -> Atom:
    return Atom(CUSP, base, exp)


def zseg(exp: int, n: int, base: Base = DEFAULT_BASE) -> Optional[Atom]:
    """``Z(base nu**exp, n)``; ``None`` (the unit) for ``n == 0`` and the
    cuspidal atom for ``n == 1``."""
    if n < 0:
        raise DomainError(f"segment length must be >= 0, got {n}")
    if n == 0:
        return None
    if n == 1:
        return cusp(exp, base)
    return Atom(ZSEG, base, exp, n)


def zfin(n: int, base: Base = DEFAULT_BASE) -> Optional[Atom]:
    if n < 0:
        raise DomainError(f"length must be >= 0, got {n}")
    if n == 0:
        return None
    return Atom(ZFIN, base, 0, n)


def st_atom(shape: Sequence[int], base: Base = DEFAULT_BASE, exp: int = 0, finite: bool = False) -> Atom:
    return Atom(ST_FIN if finite else ST_PADIC, base, exp, 1, tuple(shape))


def _mono(atoms: Iterable[Optional[Atom]]) -> Monomial:
    return tuple(sorted(a for a in atoms if a is not None))


def _merge(m1: Monomial, m2: Monomial) -> Monomial:
    if not m1:
        return m2
    if not m2:
        return m1
    return tuple(sorted(m1 + m2))


def _mono_degree(m: Monomial) -> int:
    return sum(a.degree for a in m)


class RingElement:
    """Integer combination of (tensors of) monomials.  Immutable."""

    __slots__ = ("_terms", "arity", "_hash")

    def __init__(self, terms: Optional[Mapping[Key, int]] = None, arity: int = 1):
        if arity < 1:
            raise DomainError("arity must be >= 1")
        clean = {}
        for key, coeff in (terms or {}).items():
            if len(key) != arity:
                raise DomainError(f"key {key!r} does not have arity {arity}")
            if coeff:
                clean[key] = clean.get(key, 0) + coeff
        self._terms = {k: c for k, c in clean.items() if c}
        self.arity = arity
        self._hash = None

    # construction -----------------------------------------------------------

    @classmethod
    def _trusted(cls, terms: dict, arity: int) -> "RingElement":
        # terms already keyed correctly; only zeros are dropped
        out = cls.__new__(cls)
        out._terms = {k: c for k, c in terms.items() if c}
        out.arity = arity
        out._hash = None
        return out

    @classmethod
    def sum(cls, elements: Iterable["RingElement"], arity: int = 1) -> "RingElement":
        """Sum of many elements without quadratic copying."""
        terms: dict = {}
        for x in elements:
            if x.arity != arity:
                raise DomainError(f"arity mismatch: {x.arity} vs {arity}")
            for k, c in x._terms.items():
                terms[k] = terms.get(k, 0) + c
        return cls._trusted(terms, arity)

    @classmethod
    def unit(cls, arity: int = 1) -> "RingElement":
        return cls({((),) * arity: 1}, arity)

    @classmethod
    def zero(cls, arity: int = 1) -> "RingElement":
        return cls({}, arity)

    @classmethod
    def from_atoms(cls, *atoms: Optional[Atom], coeff: int = 1) -> "RingElement":
        return cls({(_mono(atoms),): coeff})

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[Key]:
        return iter(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    # arithmetic -------------------------------------------------------------

    def _coerce(self, other) -> "RingElement":
        if isinstance(other, RingElement):
            if other.arity != self.arity:
                raise DomainError(f"arity mismatch: {self.arity} vs {other.arity}")
            return other
        if isinstance(other, Atom):
            return RingElement.from_atoms(other) if self.arity == 1 else NotImplemented
        if isinstance(other, int):
            return RingElement({((),) * self.arity: other}, self.arity)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        terms = dict(self._terms)
        for k, c in other._terms.items():
            terms[k] = terms.get(k, 0) + c
        return RingElement._trusted(terms, self.arity)

    __radd__ = __add__

    def __neg__(self):
        return RingElement({k: -c for k, c in self._terms.items()}, self.arity)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int) and not isinstance(other, bool):
            return RingElement({k: c * other for k, c in self._terms.items()}, self.arity)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return product(self, other)

    def __rmul__(self, other):
        if isinstance(other, int) and not isinstance(other, bool):
            return self * other
        return NotImplemented

    def __pow__(self, n: int):
        out = RingElement.unit(self.arity)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, int) or isinstance(other, Atom):
            other = self._coerce(other)
        if not isinstance(other, RingElement):
            return NotImplemented
        return self.arity == other.arity and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.arity, frozenset(self._terms.items())))
        return self._hash

    # grading ----------------------------------------------------------------

    def degrees(self) -> set[tuple[int, ...]]:
        return {tuple(_mono_degree(m) for m in key) for key in self._terms}

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    def degree(self) -> tuple[int, ...]:
        degs = self.degrees()
        if len(degs) != 1:
            raise DomainError("element is not homogeneous" if degs else "zero has no degree")
        return next(iter(degs))

    def component(self, degrees: Sequence[Optional[int]]) -> "RingElement":
        """Terms whose factor degrees match ``degrees`` (``None`` = any)."""
        keep = {}
        for key, c in self._terms.items():
            if all(d is None or _mono_degree(m) == d for m, d in zip(key, degrees)):
                keep[key] = c
        return RingElement(keep, self.arity)

    # text -------------------------------------------------------------------

    def __str__(self) -> str:
        return render(self)

    def __repr__(self) -> str:
        return f"RingElement({render(self)!r})"

    @classmethod
    def parse(cls, text: str, arity: Optional[int] = None) -> "RingElement":
        return parse(text, arity)

    def to_json(self) -> dict:
        terms = [
            {"coeff": c, "factors": [_render_monomial(m) for m in key]}
            for key, c in sorted(self._terms.items(), key=lambda kc: _key_sort(kc[0]))
        ]
        return {"arity": self.arity, "terms": terms}

    @classmethod
    def from_json(cls, data: Union[str, dict]) -> "RingElement":
        if isinstance(data, str):
            data = json.loads(data)
        arity = int(data["arity"])
        terms = {}
        for t in data["terms"]:
            key = tuple(_parse_monomial(f) for f in t["factors"])
            terms[key] = terms.get(key, 0) + int(t["coeff"])
        return cls(terms, arity)


def unit(arity: int = 1) -> RingElement:
    return RingElement.unit(arity)


def element(*atoms: Optional[Atom], coeff: int = 1) -> RingElement:
    """The monomial ``coeff * atoms[0] x atoms[1] x ...``."""
    return RingElement.from_atoms(*atoms, coeff=coeff)


def product(x: RingElement, y: RingElement) -> RingElement:
    """Bilinear extension of multiset union, factorwise on tensors."""
    if x.arity != y.arity:
        raise DomainError(f"arity mismatch: {x.arity} vs {y.arity}")
    terms: dict = {}
    for k1, c1 in x.items():
        for k2, c2 in y.items():
            key = tuple(_merge(a, b) for a, b in zip(k1, k2))
            terms[key] = terms.get(key, 0) + c1 * c2
    return RingElement._trusted(terms, x.arity)


def tensor(x: RingElement, y: RingElement) -> RingElement:
    terms = {k1 + k2: c1 * c2 for k1, c1 in x.items() for k2, c2 in y.items()}
    return RingElement._trusted(terms, x.arity + y.arity)


# coproduct -------------------------------------------------------------------

def _atom_cuts(atom: Atom) -> list[tuple[Monomial, Monomial]]:
    """Coproduct of a single atom as a list of (left, right) monomials."""
    if atom.kind == CUSP:
        return [((), (atom,)), ((atom,), ())]
    n = atom.length
    if atom.kind == ZSEG:
        b, c, s = atom.base, atom.exp, atom.base.step
        return [(_mono([zseg(c, k, b)]), _mono([zseg(c + k * s, n - k, b)])) for k in range(n + 1)]
    if atom.kind == ZFIN:
        return [(_mono([zfin(k, atom.base)]), _mono([zfin(n - k, atom.base)])) for k in range(n + 1)]
    raise NotImplementedError(
        f"the coproduct of {atom.kind} atoms is not modelled; "
        "their Jacquet multiplicities are abstract inputs"
    )


def _monomial_cuts(mono: Monomial, left_degree: Optional[int] = None) -> Counter:
    """Coproduct of a monomial, optionally restricted to one left degree."""
    partial = Counter({((), ()): 1})
    remaining = _mono_degree(mono)
    for atom in mono:
        remaining -= atom.degree
        nxt = Counter()
        cuts = _atom_cuts(atom)
        for (l1, r1), c1 in partial.items():
            d1 = _mono_degree(l1)
            for l2, r2 in cuts:
                if left_degree is not None:
                    d = d1 + _mono_degree(l2)
                    # prune: the left degree can still grow by at most `remaining`
                    if d > left_degree or d + remaining < left_degree:
                        continue
                nxt[(_merge(l1, l2), _merge(r1, r2))] += c1
        partial = nxt
    return partial


def coproduct(x: RingElement, factor: int = -1, left_degree: Optional[int] = None) -> RingElement:
    """Apply the coproduct to one tensor factor (default: the last).

    With ``left_degree`` only the component whose new left factor has that
    degree is produced.
    """
    if isinstance(x, Atom):
        x = element(x)
    factor = factor % x.arity
    terms: dict = {}
    for key, c in x.items():
        for (left, right), mult in _monomial_cuts(key[factor], left_degree).items():
            new_key = key[:factor] + (left, right) + key[factor + 1:]
            terms[new_key] = terms.get(new_key, 0) + c * mult
    return RingElement._trusted(terms, x.arity + 1)


def restrict(x: RingElement, k: int) -> RingElement:
    """Degree ``(k, n - k)`` component of the coproduct of a homogeneous ``x``."""
    if x.arity != 1:
        raise DomainError("restrict expects an arity-1 element")
    if not x:
        return RingElement.zero(2)
    (n,) = x.degree()
    if not 0 <= k <= n:
        raise DomainError(f"cut {k} outside [0, {n}]")
    return coproduct(x, 0, left_degree=k)


def restrict_chain(x: RingElement, cuts: Sequence[int]) -> RingElement:
    """Successive cuts ``(k_1, ..., k_r)`` summing to the degree of ``x``."""
    if x.arity != 1:
        raise DomainError("restrict_chain expects an arity-1 element")
    if not x:
        return RingElement.zero(max(len(cuts), 1))
    (n,) = x.degree()
    if any(k < 0 for k in cuts) or sum(cuts) != n:
        raise DomainError(f"cuts {tuple(cuts)} do not partition degree {n}")
    out = x
    for k in cuts[:-1]:
        out = coproduct(out, -1, left_degree=k)
    return out


def cusp_chain(x: RingElement) -> Counter:
    """Fully iterated restriction to base-degree pieces.

    Returns a Counter mapping exponent sequences to multiplicities.
    """
    if x.arity != 1:
        raise DomainError("cusp_chain expects an arity-1 element")
    bases = {a.base for key in x for a in key[0]}
    if len(bases) > 1:
        raise DomainError(f"mixed bases: {sorted(str(b) for b in bases)}")
    if not bases:
        return Counter({(): c for key, c in x.items()})
    (base,) = bases
    (n,) = x.degree()
    pieces = n // base.degree
    chains = restrict_chain(x, (base.degree,) * pieces)
    out = Counter()
    for key, c in chains.items():
        seq = []
        for mono in key:
            (atom,) = mono
            if atom.kind not in (CUSP, ZFIN):
                raise DomainError(f"{atom} is not cuspidal")
            seq.append(atom.exp)
        out[tuple(seq)] += c
    return out


def twist(x: RingElement, j: int) -> RingElement:
    """Shift every exponent by ``j`` (modulo each base's period)."""
    terms: dict = {}
    for key, c in x.items():
        new = tuple(tuple(sorted(a.shifted(j) for a in m)) for m in key)
        terms[new] = terms.get(new, 0) + c
    return RingElement._trusted(terms, x.arity)


def multiplicity(x: RingElement, t) -> int:
    """Coefficient of the basis term ``t`` in ``x``."""
    if isinstance(t, Atom):
        key = ((t,),)
    elif isinstance(t, RingElement):
        if len(t) != 1:
            raise DomainError("multiplicity expects a single basis term")
        (key,) = tuple(t)
    elif isinstance(t, tuple) and (not t or isinstance(t[0], Atom)):
        key = (tuple(sorted(t)),)
    else:
        key = tuple(tuple(sorted(m)) for m in t)
    if len(key) != x.arity:
        raise DomainError(f"term arity {len(key)} differs from element arity {x.arity}")
    return x._terms.get(key, 0)


def pair_with_cuspidal(mu: Multisegment, base: Base = DEFAULT_BASE) -> list[Atom]:
    """``[a, n] |-> Z(base nu_base**a, n)`` segment by segment.

    Starts are converted to nu-exponents through the base step, so a base
    with ``base nu_base == base`` sends every start to 0.
    """
    return [zseg(seg.start * base.step, seg.length, base) for seg in mu]


# text format -----------------------------------------------------------------

_ATOM_RE = re.compile(
    r"(?P<kind>St|st|C|Z|z)"
    r"(?:\[(?P<base>[^\]]*)\])?"
    r"\((?P<args>[^)]*)\)"
)


def _render_monomial(m: Monomial) -> str:
    return "×".join(str(a) for a in m) if m else "1"


def _key_sort(key: Key):
    return tuple((len(m), m) for m in key)


def render(x: RingElement) -> str:
    """Canonical text, e.g. ``2·Z(0,2)×C(1) + C(0)⊗C(1)``."""
    if not x:
        return "0"
    parts = []
    for key, c in sorted(x.items(), key=lambda kc: _key_sort(kc[0])):
        body = "⊗".join(_render_monomial(m) for m in key)
        mag = abs(c)
        if mag == 1:
            text = body
        elif body == "1":
            text = str(mag)
        else:
            text = f"{mag}·{body}"
        if not parts:
            parts.append(text if c > 0 else f"-{text}")
        else:
            parts.append(f"+ {text}" if c > 0 else f"- {text}")
    return " ".join(parts)


def _parse_base(text: Optional[str]) -> Base:
    if text is None:
        return DEFAULT_BASE
    label, *opts = [s.strip() for s in text.split(";")]
    kwargs = {}
    names = {"d": "degree", "e": "modulus", "s": "step"}
    for opt in opts:
        key, sep, value = opt.partition("=")
        if not sep or key not in names:
            raise DomainError(f"bad base option {opt!r}")
        kwargs[names[key]] = int(value)
    return Base(label, **kwargs)


def _parse_atom(text: str) -> Optional[Atom]:
    m = _ATOM_RE.fullmatch(text)
    if not m:
        raise DomainError(f"cannot parse atom {text!r}")
    kind, base, args = m.group("kind"), _parse_base(m.group("base")), m.group("args")
    try:
        if kind == "C":
            return cusp(int(args), base)
        if kind == "Z":
            e, n = (int(v) for v in args.split(","))
            return zseg(e, n, base)
        if kind == "z":
            return zfin(int(args), base)
        if kind == "st":
            return st_atom([int(v) for v in args.split(",")], base, finite=True)
        e, shape = args.split(";")
        return st_atom([int(v) for v in shape.split(",")], base, int(e))
    except ValueError:
        raise DomainError(f"cannot parse atom {text!r}") from None


def _parse_monomial(text: str) -> Monomial:
    text = text.strip()
    if text == "1":
        return ()
    return _mono(_parse_atom(t.strip()) for t in re.split(r"[×*]", text))


def parse(text: str, arity: Optional[int] = None) -> RingElement:
    """Inverse of :func:`render`; also accepts ``*`` for ``×`` and ``·``
    and ``@`` for ``⊗``.  ``arity`` is needed only to read back a zero
    tensor, whose text is just ``0``."""
    text = text.strip()
    if text == "0":
        return RingElement.zero(arity or 1)
    # split into signed terms at top-level + / - separated by spaces
    tokens = re.split(r"\s+([+-])\s+", text)
    signs = [1]
    bodies = [tokens[0]]
    for sign, body in zip(tokens[1::2], tokens[2::2]):
        signs.append(1 if sign == "+" else -1)
        bodies.append(body)
    terms: dict = {}
    found = None
    for sign, body in zip(signs, bodies):
        body = body.strip()
        if body.startswith("-"):
            sign, body = -sign, body[1:].strip()
        coeff = 1
        m = re.match(r"(\d+)\s*[·*]\s*", body)
        if m:
            coeff, body = int(m.group(1)), body[m.end():]
        elif re.fullmatch(r"\d+", body):
            coeff, body = int(body), "1"
        key = tuple(_parse_monomial(f) for f in re.split(r"⊗|@", body))
        if found is None:
            found = len(key)
        elif found != len(key):
            raise DomainError(f"inconsistent tensor arity in {text!r}")
        terms[key] = terms.get(key, 0) + sign * coeff
    if arity is not None and found != arity:
        raise DomainError(f"expected arity {arity}, text has arity {found}")
    return RingElement(terms, found or 1)
