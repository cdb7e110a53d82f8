import json
from fractions import Fraction

import pytest

from segcalc.census import SpehRecord, UniverseConfig, build_universe, speh_records
from segcalc.cuspidal_params import is_admissible_w, t_of
from segcalc.errors import CounterexampleError, DomainError
from segcalc.jl_transfer import infer_partner_w, partner_candidates, transfer, zelevinski_sign

PRIMES = [p for p in range(2, 32) if all(p % d for d in range(2, p))]


@pytest.mark.parametrize("r, sign", [(1, 1), (2, -1), (4, -1), (3, 1)])
def test_zelevinski_sign(r, sign):
    assert zelevinski_sign(r) == sign


def test_zelevinski_sign_domain():
    with pytest.raises(DomainError):
        zelevinski_sign(0)


@pytest.mark.parametrize("w, c, ell", [(1, 7, 7), (3, 7, 7), (3, 9, 3)])
def test_infer_partner_examples(w, c, ell):
    assert infer_partner_w(w, c, ell) == w
    assert partner_candidates(w, c, ell) == [w]


def brute_partners(w, c, ell):
    """Every w' in a generous window sharing t, found by trying t_of directly."""
    t = t_of(w, c, ell)
    out = []
    for wp in range(1, c + 1):
        if is_admissible_w(wp, c, ell) and wp >= w and t_of(wp, c, ell) == t:
            out.append(wp)
    return out


def test_partner_unique_over_sweep():
    tested = 0
    for ell in PRIMES:
        for v in range(0, 7):
            c = ell**v
            for w in range(1, 65):
                if not is_admissible_w(w, c, ell):
                    with pytest.raises(DomainError):
                        infer_partner_w(w, c, ell)
                    continue
                assert infer_partner_w(w, c, ell) == w
                tested += 1
                if c <= 2000:
                    assert brute_partners(w, c, ell) == [w]
    assert tested > 100


def test_window_bound_is_safe():
    # t(w') * w' <= c for every admissible w', so nothing lies past c // t
    for ell in (2, 3, 5, 7):
        for v in range(0, 5):
            c = ell**v
            for wp in range(1, c + 1):
                if is_admissible_w(wp, c, ell):
                    assert t_of(wp, c, ell) * wp <= c


def test_counterexample_error_is_an_assertion():
    assert issubclass(CounterexampleError, AssertionError)


# transfer ------------------------------------------------------------------------------


def record(**kw):
    base = dict(r=2, deg=6, d=1, n=3, c=7, w=3, t=2, level=Fraction(1, 2), ell=7, origin=("x",))
    base.update(kw)
    return SpehRecord(**base)


def test_transfer_example():
    tr = transfer(record())
    assert tr.sign == -1
    assert tr.target.r == 1 and tr.target.deg == 1 and tr.target.d == 6
    assert tr.target.invariants == tr.source.invariants
    data = json.loads(tr.to_json())
    assert data["sign"] == -1 and data["target"]["level"] == "1/2"
    assert data["source"]["origin"] == ["x"]


def test_transfer_rejects_bad_records():
    with pytest.raises(DomainError):
        transfer(record(t=3))
    with pytest.raises(DomainError):
        transfer(record(w=7, t=1))  # w = ell with c = ell has no t


def test_transfer_over_a_universe():
    u = build_universe(UniverseConfig(q=2, ell=3, m=4, d=2, n_tors_max=8, shift_max=2, k_max=4, u_max=2, levels=(0, 1)))
    records = speh_records(u)
    images = [transfer(rec) for rec in records]
    assert len({(tr.target.origin, tr.target.invariants) for tr in images}) == len(records)
    for tr in images:
        assert tr.target.invariants == tr.source.invariants
        assert tr.sign == zelevinski_sign(tr.source.r)
        assert tr.target.d == u.m * u.d
