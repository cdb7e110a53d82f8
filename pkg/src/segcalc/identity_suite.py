"""Finite identities behind the segment calculus, checked by brute force.

Decomposition numbers stay abstract: the unitriangular routines accept any
integer matrix supported below dominance with unit diagonal and verify the
elimination logic (uniqueness, inversion) on it.
"""

from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass
from itertools import product as cartesian
from math import gcd
from typing import Mapping, Optional, Sequence

from segcalc.arith import ell_part, is_prime, prime_to_ell
from segcalc.errors import DomainError
from segcalc.formal_ring import (
    Base,
    RingElement,
    cusp_chain,
    element,
    restrict,
    tensor,
    twist,
    zfin,
    zseg,
)
from segcalc.multisegment import (
    Partition,
    compositions_of,
    dominance_leq,
    dominance_sort_key,
    partitions_of,
)

__all__ = [
    "finite_bases",
    "composition_sum",
    "mackey_sides",
    "check_mackey_rearrangement",
    "cyclic_chain_sides",
    "check_cyclic_chains",
    "y_count",
    "y_count_expected",
    "UniTriMatrix",
    "random_unitriangular",
    "unitriangular_kernel_trivial",
    "unitriangular_solve",
    "unitriangular_inverse",
    "twist_multiplicity_symmetry",
    "split_by_exponent_support",
]


def finite_bases(b: int) -> list[Base]:
    """``b`` pairwise distinct finite cuspidal labels ``t1, ..., tb``."""
    return [Base(f"t{i}") for i in range(1, b + 1)]


def _zfin_product(parts: Sequence[int], bases: Sequence[Base]) -> RingElement:
    return element(*(zfin(n, base) for n, base in zip(parts, bases)))


def composition_sum(b: int, n: int) -> RingElement:
    """Sum over compositions ``(n_1, ..., n_b)`` of ``n`` of
    ``z(t1, n_1) x ... x z(tb, n_b)``."""
    if b < 1:
        raise DomainError(f"b must be >= 1, got {b}")
    bases = finite_bases(b)
    return RingElement.sum(_zfin_product(comp, bases) for comp in compositions_of(n, b))


def mackey_sides(b: int, n: int, k: int) -> tuple[RingElement, RingElement]:
    """Degree-``(k, n - k)`` restriction of :func:`composition_sum`, computed by
    the coproduct and by the split double sum over compositions."""
    if not 1 <= k <= n - 1:
        raise DomainError(f"cut k={k} must lie in [1, {n - 1}]")
    bases = finite_bases(b)
    via_coproduct = restrict(composition_sum(b, n), k)
    left = [_zfin_product(alpha, bases) for alpha in compositions_of(k, b)]
    right = [_zfin_product(beta, bases) for beta in compositions_of(n - k, b)]
    split = RingElement.sum((tensor(x, y) for x in left for y in right), arity=2)
    return via_coproduct, split


def check_mackey_rearrangement(b: int, n: int, k: int) -> bool:
    lhs, rhs = mackey_sides(b, n, k)
    return lhs == rhs


def _check_cyclic_params(a, n, s_tilde, eps, ell):
    for name, value in (("a", a), ("n", n), ("s_tilde", s_tilde), ("eps", eps)):
        if value < 1:
            raise DomainError(f"{name} must be >= 1, got {value}")
    if not is_prime(ell):
        raise DomainError(f"ell must be prime, got {ell}")
    if (ell - 1) % eps:
        raise DomainError(f"eps={eps} must divide ell-1={ell - 1}")
    if a > 1:
        if a % eps:
            raise DomainError(f"eps={eps} must divide a={a}")
        if prime_to_ell(a, ell) != eps:
            raise DomainError(f"prime-to-{ell} part of a={a} must equal eps={eps}")


def cyclic_chain_sides(a: int, n: int, s_tilde: int, eps: int, ell: int) -> tuple[Counter, Counter]:
    """Chain multisets of the conjectured reduction of ``Z(sigma~, n)``.

    The right side is ``sum_alpha Z(sigma, n_0) x Z(sigma nu, n_1) x ...``
    over mod-l atoms with period ``eps`` and step ``a * s_tilde``; the left
    side reduces the cuspidal chain ``sigma~ (x) sigma~ nu_sigma~ (x) ...``
    termwise, position ``j`` contributing ``{i + j s_tilde mod eps : i < a}``.
    """
    _check_cyclic_params(a, n, s_tilde, eps, ell)
    base = Base("sigma", modulus=eps, step=a * s_tilde)
    rhs = RingElement.sum(
        element(*(zseg(i, ni, base) for i, ni in enumerate(alpha)))
        for alpha in compositions_of(n, a)
    )
    rhs_chains = cusp_chain(rhs)
    positions = [
        [(i + j * s_tilde) % eps for i in range(a)]
        for j in range(n)
    ]
    lhs_chains = Counter(cartesian(*positions))
    return lhs_chains, rhs_chains


def check_cyclic_chains(a: int, n: int, s_tilde: int, eps: int, ell: int) -> bool:
    """Whether the conjectured right side passes the Jacquet necessary
    condition.  Agreement is evidence, not proof."""
    lhs, rhs = cyclic_chain_sides(a, n, s_tilde, eps, ell)
    return lhs == rhs


def y_count_expected(e_prime: int, s_prime: int, k: int) -> int:
    e = gcd(e_prime, s_prime)
    return k * e // e_prime


def y_count(e_prime: int, s_prime: int, k: int, delta: int, ell: Optional[int] = None) -> int:
    """Brute-force ``|{t in [0, k) : e' | delta + t s'}|``.

    Preconditions: ``e = gcd(e', s')`` divides ``delta`` and ``e'/e`` is the
    prime-to-l part of ``k``.  Without ``ell`` the latter is read as
    ``k / (e'/e)`` being 1 or a power of a prime not dividing ``e'/e``.
    """
    for name, value in (("e_prime", e_prime), ("s_prime", s_prime), ("k", k)):
        if value < 1:
            raise DomainError(f"{name} must be >= 1, got {value}")
    e = gcd(e_prime, s_prime)
    if delta % e:
        raise DomainError(f"gcd(e', s')={e} does not divide delta={delta}")
    f = e_prime // e
    if ell is not None:
        if not is_prime(ell):
            raise DomainError(f"ell must be prime, got {ell}")
        if prime_to_ell(k, ell) != f:
            raise DomainError(f"prime-to-{ell} part of k={k} is not e'/e={f}")
    else:
        if k % f:
            raise DomainError(f"e'/e={f} does not divide k={k}")
        power = k // f
        if power > 1:
            p = _smallest_prime_factor(power)
            if ell_part(power, p)[1] != 1 or f % p == 0:
                raise DomainError(f"k/(e'/e)={power} is not a power of a prime prime to {f}")
    return sum(1 for t in range(k) if (delta + t * s_prime) % e_prime == 0)


def _smallest_prime_factor(n: int) -> int:
    p = 2
    while p * p <= n:
        if n % p == 0:
            return p
        p += 1
    return n


# -- unitriangular systems ----------------------------------------------------


def _as_partition(p) -> Partition:
    return p if isinstance(p, Partition) else Partition(p)


@dataclass(frozen=True)
class UniTriMatrix:
    """Integer matrix indexed by partitions of one ``n``, with unit diagonal
    and ``E(mu, nu) != 0`` only when ``nu <= mu`` in dominance.

    Vectors passed to or returned from the routines below follow ``index``.
    """

    index: tuple[Partition, ...]
    entries: Mapping[tuple[Partition, Partition], int]

    def __post_init__(self):
        index = tuple(_as_partition(p) for p in self.index)
        if len(set(index)) != len(index):
            raise DomainError("index has repeated partitions")
        sizes = {p.size for p in index}
        if len(sizes) > 1:
            raise DomainError("index mixes partitions of different sizes")
        entries = {}
        members = set(index)
        for (mu, nu), value in dict(self.entries).items():
            mu, nu = _as_partition(mu), _as_partition(nu)
            if mu not in members or nu not in members:
                raise DomainError(f"entry ({mu}, {nu}) outside the index")
            if value:
                entries[mu, nu] = int(value)
        for mu in index:
            if entries.get((mu, mu)) != 1:
                raise DomainError(f"diagonal entry at {mu} is not 1")
        for mu, nu in entries:
            if not dominance_leq(nu, mu):
                raise DomainError(f"entry ({mu}, {nu}) violates dominance support")
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_rows(cls, index: Sequence, rows: Sequence[Sequence[int]]) -> "UniTriMatrix":
        index = [_as_partition(p) for p in index]
        if len(rows) != len(index) or any(len(r) != len(index) for r in rows):
            raise DomainError("row shape does not match the index")
        entries = {(mu, nu): rows[i][j] for i, mu in enumerate(index) for j, nu in enumerate(index)}
        return cls(tuple(index), entries)

    @classmethod
    def identity(cls, index: Sequence) -> "UniTriMatrix":
        index = tuple(_as_partition(p) for p in index)
        return cls(index, {(p, p): 1 for p in index})

    def __getitem__(self, key) -> int:
        mu, nu = key
        return self.entries.get((_as_partition(mu), _as_partition(nu)), 0)

    def rows(self) -> list[list[int]]:
        return [[self[mu, nu] for nu in self.index] for mu in self.index]

    def elimination_order(self) -> list[Partition]:
        """The index in a linear extension of dominance, smallest first."""
        return sorted(self.index, key=dominance_sort_key)

    def row_support(self, mu: Partition) -> list[Partition]:
        return [nu for nu in self.index if (mu, nu) in self.entries]

    def apply(self, vector: Sequence[int]) -> list[int]:
        if len(vector) != len(self.index):
            raise DomainError("vector length does not match the index")
        d = dict(zip(self.index, vector))
        return [sum(self[mu, nu] * d[nu] for nu in self.row_support(mu)) for mu in self.index]

    def matmul(self, other: "UniTriMatrix") -> dict:
        if set(self.index) != set(other.index):
            raise DomainError("index mismatch")
        out = {}
        for mu in self.index:
            for lam in self.row_support(mu):
                a = self.entries[mu, lam]
                for nu in other.row_support(lam):
                    out[mu, nu] = out.get((mu, nu), 0) + a * other.entries[lam, nu]
        return {k: v for k, v in out.items() if v}

    def is_identity(self) -> bool:
        return all(mu == nu for mu, nu in self.entries)


def random_unitriangular(
    n: int, rng: random.Random, density: float = 0.5, bound: int = 3
) -> UniTriMatrix:
    """A random matrix on all partitions of ``n`` with the required support."""
    index = partitions_of(n)
    entries = {(p, p): 1 for p in index}
    for mu in index:
        for nu in index:
            if mu != nu and dominance_leq(nu, mu) and rng.random() < density:
                entries[mu, nu] = rng.randint(-bound, bound)
    return UniTriMatrix(tuple(index), entries)


def unitriangular_kernel_trivial(E: UniTriMatrix) -> bool:
    """Constructive triviality of ``ker E``.

    If ``E d = 0`` with ``d != 0``, take ``mu`` minimal with ``d_mu != 0``;
    row ``mu`` involves only ``nu <= mu``, where ``d`` vanishes except at
    ``mu`` itself, so ``0 = E(mu, mu) d_mu = d_mu``.  The walk below checks
    at every step of the elimination order that the pivot is 1 and that the
    rest of the row has already been eliminated.
    """
    done: set[Partition] = set()
    for mu in E.elimination_order():
        if E[mu, mu] != 1:
            return False
        if any(nu != mu and nu not in done for nu in E.row_support(mu)):
            return False
        done.add(mu)
    return True


def unitriangular_solve(E: UniTriMatrix, rhs: Sequence[int]) -> list[int]:
    """The unique integer ``d`` with ``E d = rhs`` by forward substitution
    along a linear extension of dominance."""
    if len(rhs) != len(E.index):
        raise DomainError("rhs length does not match the index")
    b = dict(zip(E.index, rhs))
    d: dict = {}
    for mu in E.elimination_order():
        d[mu] = b[mu] - sum(E.entries[mu, nu] * d[nu] for nu in E.row_support(mu) if nu != mu)
    return [d[mu] for mu in E.index]


def unitriangular_inverse(M: UniTriMatrix) -> UniTriMatrix:
    """Inverse of ``M``, again unitriangular, solved column by column."""
    entries = {}
    for j, nu in enumerate(M.index):
        column = unitriangular_solve(M, [1 if i == j else 0 for i in range(len(M.index))])
        for mu, value in zip(M.index, column):
            if value:
                entries[mu, nu] = value
    return UniTriMatrix(M.index, entries)


# -- twist action --------------------------------------------------------------


def twist_multiplicity_symmetry(x: RingElement, j: int) -> bool:
    """Whether ``x`` is fixed by the twist by ``nu**j``.

    When it is, every term ``t`` and its twist carry the same multiplicity;
    the per-term comparison is run as well so a broken twist is caught.
    """
    twisted = twist(x, j)
    if twisted != x:
        return False
    for key, coeff in x.items():
        image = twist(RingElement({key: 1}, x.arity), j)
        (image_key,) = tuple(image)
        if x.terms.get(image_key, 0) != coeff:
            return False
    return True


def split_by_exponent_support(x: RingElement) -> dict[frozenset, RingElement]:
    """Group the terms of ``x`` by the set of exponents they involve.

    A term with a single exponent ``i`` lands under ``{i}``; everything else
    is the mixed part.
    """
    groups: dict[frozenset, dict] = {}
    for key, coeff in x.items():
        support = frozenset(a.exp for mono in key for a in mono)
        groups.setdefault(support, {})[key] = coeff
    return {s: RingElement(terms, x.arity) for s, terms in sorted(groups.items(), key=lambda kv: sorted(kv[0]))}
