"""Synthetic census of cuspidal parameter tuples.

A universe is every (CuspidalParam, ModLReduction) pair inside a bounded grid
that passes the full reduction constraint system.  These are parameter
records, not representations: the counts below check that the counting
formulas and the Speh transport agree with each other, nothing more.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Optional

from segcalc.arith import PrimePair, c_value, prime_to_ell, valuation
from segcalc.cuspidal_params import (
    CuspidalParam,
    ModLReduction,
    epsilon,
    omega,
    record_from_dict,
    record_to_dict,
    t_of,
    validate_reduction,
    w_invariant,
)
from segcalc.errors import DomainError, InconsistencyError

log = logging.getLogger(__name__)

__all__ = [
    "UniverseConfig",
    "UniverseEntry",
    "Rejection",
    "Universe",
    "SpehRecord",
    "CensusResult",
    "CellReport",
    "CensusReport",
    "enumerate_admissible_a",
    "build_universe",
    "census_by_w",
    "speh_transport",
    "census_equalities",
    "universe_to_jsonl",
    "universe_from_jsonl",
]

LIMITATION = (
    "synthetic universe: tuples are parameter records satisfying the reduction "
    "constraints, not representations; counts check internal consistency only"
)


def _divisors(n: int) -> list[int]:
    return [x for x in range(1, n + 1) if n % x == 0]


@dataclass(frozen=True)
class UniverseConfig:
    """Bounds of a generation grid.

    ``d`` is the reduced degree of the ambient division algebra; leave it
    unset for a split context.  With ``d`` set, ``a | d`` and ``shift | d``
    are imposed.
    """

    q: int
    ell: int
    m: int = 1
    d: Optional[int] = None
    n_tors_max: int = 0
    shift_max: int = 1
    k_max: int = 1
    u_max: int = 0
    levels: tuple[Fraction, ...] = (Fraction(0),)
    endos: tuple[str, ...] = ("Theta",)

    def __post_init__(self):
        PrimePair(self.q, self.ell)
        if self.m < 1:
            raise DomainError(f"m must be >= 1, got {self.m}")
        if self.d is not None and self.d < 1:
            raise DomainError(f"d must be >= 1, got {self.d}")
        for name in ("n_tors_max", "shift_max", "k_max", "u_max"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be >= 0")
        levels = tuple(sorted({Fraction(x) for x in self.levels}))
        if any(x < 0 for x in levels):
            raise DomainError("levels must be nonnegative")
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "endos", tuple(self.endos))

    @property
    def ctx(self) -> PrimePair:
        return PrimePair(self.q, self.ell)

    @property
    def d_eff(self) -> int:
        return self.d or 1

    _INT_KEYS = ("q", "ell", "m", "d", "n_tors_max", "shift_max", "k_max", "u_max")

    @classmethod
    def from_mapping(cls, data: dict) -> "UniverseConfig":
        kwargs = {}
        for key, value in data.items():
            if key in cls._INT_KEYS:
                try:
                    kwargs[key] = int(value)
                except (TypeError, ValueError):
                    raise DomainError(f"{key} must be an integer, got {value!r}") from None
            elif key == "levels":
                items = value.split(",") if isinstance(value, str) else value
                try:
                    kwargs[key] = tuple(Fraction(str(x).strip()) for x in items if str(x).strip())
                except (ValueError, ZeroDivisionError):
                    raise DomainError(f"bad levels {value!r}") from None
            elif key == "endos":
                items = value.split(",") if isinstance(value, str) else value
                kwargs[key] = tuple(str(x).strip() for x in items if str(x).strip())
            else:
                raise DomainError(f"unknown config key {key!r}")
        for key in ("q", "ell"):
            if key not in kwargs:
                raise DomainError(f"config is missing {key!r}")
        return cls(**kwargs)

    @classmethod
    def parse(cls, text: str) -> "UniverseConfig":
        return cls.from_mapping(parse_key_values(text))

    def to_text(self) -> str:
        lines = [f"q={self.q}", f"ell={self.ell}", f"m={self.m}"]
        if self.d is not None:
            lines.append(f"d={self.d}")
        lines += [
            f"n_tors_max={self.n_tors_max}",
            f"shift_max={self.shift_max}",
            f"k_max={self.k_max}",
            f"u_max={self.u_max}",
            "levels=" + ",".join(str(x) for x in self.levels),
            "endos=" + ",".join(self.endos),
        ]
        return "\n".join(lines) + "\n"


def parse_key_values(text: str) -> dict:
    """``key=value`` lines with ``#`` comments; later keys win."""
    data = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise DomainError(f"line {lineno}: expected key=value, got {raw.strip()!r}")
        data[key.strip()] = value.strip()
    return data


def enumerate_admissible_a(
    pair: PrimePair, n_tors: int, d: Optional[int] = None, u_max: Optional[int] = None
) -> set[int]:
    """Reduction lengths compatible with a torsion number.

    ``a`` must divide ``n_tors``; the ell-exponent ``u`` of ``n_tors / a`` is
    capped by ``u_max``; for ``a > 1`` the prime-to-ell part of ``a`` equals
    ``epsilon`` of the prime-to-ell part of ``n_tors / a``; and ``a | d``.
    """
    if n_tors < 1:
        raise DomainError(f"n_tors must be >= 1, got {n_tors}")
    out = set()
    for a in _divisors(n_tors):
        n_mod = prime_to_ell(n_tors // a, pair.ell)
        u = valuation(n_tors // a, pair.ell)
        if u_max is not None and u > u_max:
            continue
        if a > 1 and prime_to_ell(a, pair.ell) != epsilon(pair, n_mod):
            continue
        if d is not None and d % a:
            continue
        out.add(a)
    return out


@dataclass(frozen=True)
class UniverseEntry:
    sigma: CuspidalParam
    red: ModLReduction
    eps: int
    omega: int
    w: int
    c: int
    t: int

    def class_key(self) -> tuple:
        """Congruence-class label: the mod-l invariants plus endo-class,
        refined by degree, level, length and torsion number."""
        r = self.red
        s = self.sigma
        return (r.n_mod, r.shift_mod, r.k, self.eps, s.endo, s.deg, s.level, r.a, s.n_tors)

    def to_dict(self) -> dict:
        out = record_to_dict(self.sigma, self.red)
        out.update(omega=self.omega, w=self.w, c=self.c, t=self.t)
        return out


@dataclass(frozen=True)
class Rejection:
    record: dict
    reason: str


@dataclass
class Universe:
    config: Optional[UniverseConfig]
    entries: list[UniverseEntry] = field(default_factory=list)
    rejections: list[Rejection] = field(default_factory=list)
    m: int = 1
    d: int = 1

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def ctx(self) -> Optional[PrimePair]:
        if self.config is not None:
            return self.config.ctx
        if self.entries:
            return self.entries[0].sigma.ctx
        return None

    def w_values(self) -> list[int]:
        return sorted({e.w for e in self.entries})

    def levels(self) -> list[Fraction]:
        if self.config is not None:
            return list(self.config.levels)
        return sorted({e.sigma.level for e in self.entries})


def make_entry(sigma: CuspidalParam, red: ModLReduction, d: Optional[int] = None) -> UniverseEntry:
    """Validate a tuple and attach its invariants.

    Raises :class:`DomainError` on a failed constraint and
    :class:`InconsistencyError` when the counting formula has no solution.
    """
    report = validate_reduction(sigma, red, d)
    if not report.valid:
        raise DomainError("failed constraints: " + ",".join(report.failures))
    pair = sigma.ctx
    eps = epsilon(pair, red.n_mod)
    w = w_invariant(red.k, red.a)
    c = c_value(pair, sigma.n_tors)
    t = t_of(w, c, pair.ell)
    return UniverseEntry(sigma, red, eps, omega(pair, red.n_mod, red.shift_mod), w, c, t)


def _supercuspidal_fields(pair: PrimePair, a: int, k: int, eps: int, shift_mod: int):
    """Canonical ``(sc_eps, sc_shift)`` for a support of size ``k``, or None."""
    if k == 1:
        return eps, shift_mod
    ell = pair.ell
    sc_eps = prime_to_ell(k * a, ell)
    if (ell - 1) % sc_eps or sc_eps % eps:
        return None
    if prime_to_ell(k, ell) != sc_eps // eps:
        return None
    if a == 1 and eps != 1:
        return None
    return sc_eps, eps


def _generate_for(config: UniverseConfig, deg: int, n_tors: int):
    pair = config.ctx
    entries, rejections = [], []
    for shift in range(1, config.shift_max + 1):
        if config.d is not None and config.d % shift:
            continue
        for level in config.levels:
            for endo in config.endos:
                sigma = CuspidalParam(deg, n_tors, shift, pair, level, endo)
                for a in sorted(enumerate_admissible_a(pair, n_tors, config.d, config.u_max)):
                    room = deg * config.d_eff
                    if room % a:
                        continue
                    n_mod = prime_to_ell(n_tors // a, pair.ell)
                    eps = epsilon(pair, n_mod)
                    for k in range(1, config.k_max + 1):
                        if (room // a) % k:
                            continue
                        sc = _supercuspidal_fields(pair, a, k, eps, a * shift)
                        if sc is None:
                            continue
                        red = ModLReduction(a, n_mod, a * shift, k, eps, sc[1], sc[0])
                        try:
                            entries.append(make_entry(sigma, red, config.d))
                        except (DomainError, InconsistencyError) as exc:
                            rec = record_to_dict(sigma, red)
                            rejections.append(Rejection(rec, f"{type(exc).__name__}: {exc}"))
    return entries, rejections


def build_universe(config: UniverseConfig, workers: Optional[int] = None) -> Universe:
    """Every tuple in the grid that passes validation, in a fixed order.

    Grid cells are generated in a worker pool and merged in grid order, so
    the result does not depend on ``workers``.  Rejected tuples are kept in
    ``universe.rejections`` and logged.
    """
    cells = [
        (deg, n_tors)
        for deg in _divisors(config.m)
        for n_tors in range(1, config.n_tors_max + 1)
        if (deg * config.d_eff) % n_tors == 0
    ]
    if workers is not None and workers > 1 and len(cells) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda cell: _generate_for(config, *cell), cells))
    else:
        results = [_generate_for(config, *cell) for cell in cells]
    universe = Universe(config, m=config.m, d=config.d_eff)
    for entries, rejections in results:
        universe.entries.extend(entries)
        universe.rejections.extend(rejections)
    for rej in universe.rejections:
        log.info("rejected %s: %s", json.dumps(rej.record, sort_keys=True), rej.reason)
    return universe


@dataclass(frozen=True)
class CensusResult:
    count: int
    classes: tuple[tuple, ...]


def census_by_w(u: Universe, w: int, j) -> CensusResult:
    """Congruence classes of tuples with invariant ``w`` and level ``<= j``."""
    j = Fraction(j)
    classes = sorted(
        {e.class_key() for e in u.entries if e.w == w and e.sigma.level <= j},
        key=_class_sort_key,
    )
    return CensusResult(len(classes), tuple(classes))


def _class_sort_key(key: tuple):
    return tuple(str(x) if isinstance(x, str) else x for x in key)


@dataclass(frozen=True)
class SpehRecord:
    """Invariants of ``Z(sigma~, r)``; ``deg`` is the Speh degree."""

    r: int
    deg: int
    d: int
    n: int
    c: int
    w: int
    t: int
    level: Fraction
    ell: int
    origin: tuple = ()

    @property
    def invariants(self) -> tuple:
        return (self.n, self.c, self.w, self.t, self.level)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["level"] = str(self.level)
        out["origin"] = [str(x) if isinstance(x, Fraction) else x for x in self.origin]
        return out


def speh_transport(entry: UniverseEntry, r: int, d: int = 1) -> SpehRecord:
    """Record of ``Z(sigma~, r)``: degree times ``r``, invariants unchanged."""
    if r < 1:
        raise DomainError(f"r must be >= 1, got {r}")
    s = entry.sigma
    return SpehRecord(
        r=r, deg=r * s.deg, d=d, n=s.n_tors, c=entry.c, w=entry.w, t=entry.t,
        level=s.level, ell=s.ctx.ell, origin=entry.class_key(),
    )


def speh_records(u: Universe) -> list[SpehRecord]:
    """The E-side: each tuple of degree ``deg`` carried to ``Z(., m / deg)``."""
    return [speh_transport(e, u.m // e.sigma.deg, u.d) for e in u.entries if u.m % e.sigma.deg == 0]


@dataclass(frozen=True)
class CellReport:
    w: int
    j: Fraction
    a_count: int
    e_count: int
    other_count: Optional[int] = None
    first_unmatched: Optional[tuple] = None

    @property
    def ok(self) -> bool:
        if self.other_count is not None and self.other_count != self.a_count:
            return False
        return self.a_count == self.e_count and self.first_unmatched is None


@dataclass(frozen=True)
class CensusReport:
    cells: tuple[CellReport, ...]
    note: str = LIMITATION

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.cells)

    def first_failure(self) -> Optional[CellReport]:
        return next((c for c in self.cells if not c.ok), None)


def census_equalities(
    u: Universe,
    w: Optional[int] = None,
    j=None,
    other: Optional[Universe] = None,
    drop_speh: int = 0,
) -> CensusReport:
    """Compare A-side class counts with E-side Speh records per ``(w, j)``.

    ``drop_speh`` removes that many E-side records before comparing, as a
    negative control.  ``other`` is a universe built from a matched config
    (inner form ``(m, d)`` against split ``(m d, 1)``); its A-side counts must
    agree cell by cell.
    """
    records = speh_records(u)
    if drop_speh:
        records = records[drop_speh:]
    ws = [w] if w is not None else sorted(set(u.w_values()) | set(other.w_values() if other else []))
    js = [Fraction(j)] if j is not None else sorted(set(u.levels()) | set(other.levels() if other else []))
    cells = []
    for wv in ws:
        for jv in js:
            a_side = census_by_w(u, wv, jv)
            e_classes = {rec.origin for rec in records if rec.w == wv and rec.level <= jv}
            unmatched = next((k for k in a_side.classes if k not in e_classes), None)
            if unmatched is None:
                extra = sorted(e_classes - set(a_side.classes), key=_class_sort_key)
                unmatched = extra[0] if extra else None
            other_count = census_by_w(other, wv, jv).count if other is not None else None
            cells.append(CellReport(wv, jv, a_side.count, len(e_classes), other_count, unmatched))
    return CensusReport(tuple(cells))


# -- JSON-lines ---------------------------------------------------------------

_COMPUTED_FIELDS = ("omega", "w", "c", "t", "m", "d_amb")


def universe_to_jsonl(u: Universe) -> str:
    lines = []
    for e in u.entries:
        row = e.to_dict()
        row["m"] = u.m
        row["d_amb"] = u.d
        lines.append(json.dumps(row, sort_keys=True))
    return "".join(line + "\n" for line in lines)


def universe_from_jsonl(text: str) -> Universe:
    """Load a universe, re-validating every tuple and its stored invariants."""
    entries = []
    m = d = None
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DomainError(f"line {lineno}: {exc}") from None
        stored = {k: row.pop(k) for k in _COMPUTED_FIELDS if k in row}
        sigma, red = record_from_dict(row)
        if red is None:
            raise DomainError(f"line {lineno}: record has no reduction")
        entry = make_entry(sigma, red)
        for key in ("omega", "w", "c", "t"):
            if key in stored and int(stored[key]) != getattr(entry, key):
                raise DomainError(f"line {lineno}: stored {key}={stored[key]} disagrees with {getattr(entry, key)}")
        m = int(stored.get("m", m or 1))
        d = int(stored.get("d_amb", d or 1))
        entries.append(entry)
    return Universe(None, entries, [], m or 1, d or 1)

