"""Formal segments ``[a, n]``, multisegments, partitions and compositions.

Multisegments are stored canonically (decreasing length, then increasing
start), so equality is structural.  Dominance compares only the length
profile.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import total_ordering
from itertools import accumulate
from typing import Iterable, Iterator, Union

from segcalc.errors import DomainError

__all__ = [
    "FormalSegment",
    "Multisegment",
    "Partition",
    "dominance_leq",
    "conjugate",
    "partitions_of",
    "compositions_of",
    "partial_sums",
    "dominance_sort_key",
    "hasse_edges",
    "pair_with_cuspidal",
]


@dataclass(frozen=True)
class FormalSegment:
    start: int
    length: int

    def __post_init__(self):
        if not isinstance(self.length, int) or self.length < 1:
            raise DomainError(f"segment length must be >= 1, got {self.length!r}")

    def __str__(self) -> str:
        return f"[{self.start},{self.length}]"

    @classmethod
    def parse(cls, text: str) -> "FormalSegment":
        m = _SEGMENT_RE.fullmatch(text.strip())
        if not m:
            raise DomainError(f"not a formal segment: {text!r}")
        return cls(int(m.group(1)), int(m.group(2)))


_SEGMENT_RE = re.compile(r"\[\s*(-?\d+)\s*,\s*(\d+)\s*\]")


def _segment_key(seg: FormalSegment):
    return (-seg.length, seg.start)


class Multisegment:
    """Finite multiset of formal segments."""

    __slots__ = ("segments",)

    def __init__(self, segments: Iterable[FormalSegment] = ()):
        segs = []
        for seg in segments:
            if isinstance(seg, tuple):
                seg = FormalSegment(*seg)
            segs.append(seg)
        self.segments = tuple(sorted(segs, key=_segment_key))

    @classmethod
    def from_partition(cls, p: "Partition") -> "Multisegment":
        return cls(FormalSegment(0, n) for n in p.parts)

    @property
    def length(self) -> int:
        return sum(s.length for s in self.segments)

    def shape(self) -> "Partition":
        return Partition(s.length for s in self.segments)

    def __add__(self, other: "Multisegment") -> "Multisegment":
        return Multisegment(self.segments + other.segments)

    def __iter__(self) -> Iterator[FormalSegment]:
        return iter(self.segments)

    def __len__(self) -> int:
        return len(self.segments)

    def __eq__(self, other) -> bool:
        return isinstance(other, Multisegment) and self.segments == other.segments

    def __hash__(self) -> int:
        return hash(self.segments)

    def __repr__(self) -> str:
        return f"Multisegment({str(self)!r})"

    def __str__(self) -> str:
        return "+".join(str(s) for s in self.segments) if self.segments else "0"

    @classmethod
    def parse(cls, text: str) -> "Multisegment":
        text = text.strip()
        if text == "0":
            return cls()
        return cls(FormalSegment.parse(part) for part in text.split("+"))


@total_ordering
class Partition:
    """Weakly decreasing tuple of positive integers."""

    __slots__ = ("parts",)

    def __init__(self, parts: Iterable[int] = ()):
        parts = tuple(parts)
        for p in parts:
            if not isinstance(p, int) or p < 1:
                raise DomainError(f"partition parts must be positive integers, got {parts!r}")
        if any(x < y for x, y in zip(parts, parts[1:])):
            raise DomainError(f"partition parts must be weakly decreasing, got {parts!r}")
        self.parts = parts

    @property
    def size(self) -> int:
        return sum(self.parts)

    def conjugate(self) -> "Partition":
        return conjugate(self)

    def __iter__(self):
        return iter(self.parts)

    def __len__(self):
        return len(self.parts)

    def __getitem__(self, i):
        return self.parts[i]

    def __eq__(self, other) -> bool:
        return isinstance(other, Partition) and self.parts == other.parts

    def __lt__(self, other: "Partition") -> bool:
        # lexicographic on parts; a total order used only for stable listing
        return self.parts < other.parts

    def __hash__(self) -> int:
        return hash(("Partition", self.parts))

    def __repr__(self) -> str:
        return f"Partition({self.parts!r})"

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.parts)) + ")"

    @classmethod
    def parse(cls, text: str) -> "Partition":
        text = text.strip()
        if not (text.startswith("(") and text.endswith(")")):
            raise DomainError(f"not a partition: {text!r}")
        body = text[1:-1].strip()
        if not body:
            return cls()
        try:
            return cls(int(x) for x in body.split(","))
        except ValueError:
            raise DomainError(f"not a partition: {text!r}") from None


Shape = Union[Multisegment, Partition, Iterable[int]]


def _lengths(x: Shape) -> tuple[int, ...]:
    if isinstance(x, Multisegment):
        return x.shape().parts
    if isinstance(x, Partition):
        return x.parts
    return tuple(sorted(x, reverse=True))


def partial_sums(x: Shape) -> tuple[int, ...]:
    return tuple(accumulate(_lengths(x)))


def dominance_leq(mu: Shape, nu: Shape) -> bool:
    """``mu <= nu`` in the dominance order on length profiles.

    Partial sums of the decreasingly sorted lengths are compared for every
    ``k <= min(r, s)``.
    """
    a, b = partial_sums(mu), partial_sums(nu)
    if (a[-1] if a else 0) != (b[-1] if b else 0):
        raise DomainError("dominance is only defined between equal total lengths")
    return all(x <= y for x, y in zip(a, b))


def conjugate(p: Partition) -> Partition:
    if not p.parts:
        return Partition()
    return Partition(sum(1 for part in p.parts if part > i) for i in range(p.parts[0]))


def partitions_of(n: int) -> list[Partition]:
    """All partitions of ``n`` in lexicographic order of their parts."""
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")

    def gen(remaining, largest):
        if remaining == 0:
            yield ()
            return
        for first in range(min(remaining, largest), 0, -1):
            for rest in gen(remaining - first, first):
                yield (first,) + rest

    return sorted(Partition(p) for p in gen(n, n))


def compositions_of(n: int, parts: int) -> list[tuple[int, ...]]:
    """Tuples of ``parts`` nonnegative integers summing to ``n``, in
    decreasing lexicographic order."""
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    if parts < 1:
        raise DomainError(f"parts must be >= 1, got {parts}")

    def gen(remaining, slots):
        if slots == 1:
            yield (remaining,)
            return
        for first in range(remaining, -1, -1):
            for rest in gen(remaining - first, slots - 1):
                yield (first,) + rest

    return list(gen(n, parts))


def dominance_sort_key(p: Partition):
    """Key for a linear extension of dominance: padded partial sums, then parts."""
    sums = partial_sums(p)
    n = sums[-1] if sums else 0
    padded = sums + (n,) * (n - len(sums))
    return (padded, p.parts)


def hasse_edges(n: int) -> list[tuple[Partition, Partition]]:
    """Cover relations ``lower -> upper`` of dominance on partitions of ``n``."""
    ps = sorted(partitions_of(n), key=dominance_sort_key)
    below = {
        (x, y)
        for x in ps
        for y in ps
        if x != y and dominance_leq(x, y)
    }
    edges = []
    for x, y in sorted(below, key=lambda e: (dominance_sort_key(e[0]), dominance_sort_key(e[1]))):
        if not any((x, z) in below and (z, y) in below for z in ps):
            edges.append((x, y))
    return edges


def pair_with_cuspidal(mu: Multisegment, base=None):
    """``[a, n] |-> Z(base nu_base**a, n)``; see :mod:`segcalc.formal_ring`."""
    from segcalc.formal_ring import DEFAULT_BASE, pair_with_cuspidal as pair

    return pair(mu, DEFAULT_BASE if base is None else base)
