"""Parameter-level Jacquet-Langlands transfer.

Records on the inner-form side are Speh records ``Z(sigma~, r)``; on the
division-algebra side every record has ``r = 1``.  The transfer moves the
invariant vector ``(n, c, w, t, level)`` across unchanged and attaches the
Zelevinski sign.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from segcalc.census import SpehRecord
from segcalc.cuspidal_params import is_admissible_w, t_of
from segcalc.errors import CounterexampleError, DomainError, InconsistencyError

__all__ = [
    "zelevinski_sign",
    "partner_candidates",
    "infer_partner_w",
    "TransferRecord",
    "transfer",
]


def zelevinski_sign(r: int) -> int:
    if r < 1:
        raise DomainError(f"r must be >= 1, got {r}")
    return -1 if r % 2 == 0 else 1


def partner_candidates(w: int, c: int, ell: int) -> list[int]:
    """Admissible ``w' >= w`` with ``t(w') >= t(w)``.

    Since ``t(w') w' <= c`` for every admissible ``w'``, the search stops at
    ``c // t(w)``.
    """
    if not is_admissible_w(w, c, ell):
        raise DomainError(f"(w={w}, c={c}, ell={ell}) is not admissible")
    t = t_of(w, c, ell)
    out = []
    for wp in range(w, c // t + 1):
        if is_admissible_w(wp, c, ell) and t_of(wp, c, ell) >= t:
            out.append(wp)
    return out


def infer_partner_w(w: int, c: int, ell: int) -> int:
    """Replay of the squeeze forcing a transfer partner to share ``w``.

    A partner has the same ``t`` and ``w' >= w``; the count formula then
    leaves ``w`` as the only candidate.  Any other survivor is reported as a
    :class:`CounterexampleError`.
    """
    found = partner_candidates(w, c, ell)
    others = [wp for wp in found if wp != w]
    if others:
        raise CounterexampleError(f"w={w}, c={c}, ell={ell}: also admits w'={others}")
    return w


@dataclass(frozen=True)
class TransferRecord:
    source: SpehRecord
    target: SpehRecord
    sign: int

    def to_dict(self) -> dict:
        return {"source": self.source.to_dict(), "target": self.target.to_dict(), "sign": self.sign}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def transfer(source: SpehRecord) -> TransferRecord:
    """Carry a Speh record to the division-algebra side."""
    try:
        t = t_of(source.w, source.c, source.ell)
    except InconsistencyError as exc:
        raise DomainError(f"inadmissible invariants: {exc}") from None
    if t != source.t:
        raise DomainError(f"stored t={source.t} but the count formula gives {t}")
    target = SpehRecord(
        r=1,
        deg=1,
        d=source.deg * source.d,
        n=source.n,
        c=source.c,
        w=source.w,
        t=source.t,
        level=Fraction(source.level),
        ell=source.ell,
        origin=source.origin,
    )
    return TransferRecord(source, target, zelevinski_sign(source.r))
