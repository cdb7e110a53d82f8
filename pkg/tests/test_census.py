import json
import logging
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from segcalc.arith import PrimePair, c_value, is_ell_power, prime_to_ell, valuation
from segcalc.census import (
    Universe,
    UniverseConfig,
    build_universe,
    census_by_w,
    census_equalities,
    enumerate_admissible_a,
    make_entry,
    speh_records,
    speh_transport,
    universe_from_jsonl,
    universe_to_jsonl,
)
from segcalc.cuspidal_params import CuspidalParam, ModLReduction, epsilon, t_of, validate_reduction
from segcalc.errors import DomainError
from segcalc.suites import CENSUS_CONFIGS

SMALL = UniverseConfig(q=2, ell=7, m=6, n_tors_max=6, shift_max=2, k_max=3, u_max=1,
                       levels=(0, Fraction(1, 2), 1), endos=("Theta", "Theta'"))


@pytest.fixture(scope="module")
def small():
    return build_universe(SMALL)


def brute_admissible_a(q, ell, n_tors, d=None, u_max=None):
    """Every divisor a of n_tors for which some reduction passes validation."""
    pair = PrimePair(q, ell)
    out = set()
    for a in range(1, n_tors + 1):
        if n_tors % a:
            continue
        if u_max is not None and valuation(n_tors // a, ell) > u_max:
            continue
        sigma = CuspidalParam(1, n_tors, 1, pair)
        for n_mod in range(1, n_tors + 1):
            if validate_reduction(sigma, ModLReduction(a, n_mod, a), d).valid:
                out.add(a)
    return out


@pytest.mark.parametrize("q, ell, n_tors, d, expected", [(2, 7, 3, 3, {1, 3}), (2, 3, 4, 4, {1}), (5, 3, 1, 1, {1})])
def test_admissible_a_examples(q, ell, n_tors, d, expected):
    assert enumerate_admissible_a(PrimePair(q, ell), n_tors, d) == expected
    assert brute_admissible_a(q, ell, n_tors, d) == expected


def test_admissible_a_against_brute_force():
    for q, ell in ((2, 7), (3, 2), (2, 3), (4, 5), (3, 13)):
        for n_tors in range(1, 25):
            for d in (None, 1, 2, 6, 12):
                for u_max in (None, 0, 1):
                    got = enumerate_admissible_a(PrimePair(q, ell), n_tors, d, u_max)
                    assert got == brute_admissible_a(q, ell, n_tors, d, u_max)


def test_admissible_a_rejects_bad_torsion():
    with pytest.raises(DomainError):
        enumerate_admissible_a(PrimePair(2, 7), 0)


# universe generation ---------------------------------------------------------------------


def test_empty_bounds_give_empty_universe():
    u = build_universe(UniverseConfig(q=2, ell=7))
    assert len(u) == 0 and u.rejections == []
    assert census_by_w(u, 1, 0).count == 0
    assert census_equalities(u).ok


def test_members_revalidate_and_carry_consistent_invariants(small):
    assert len(small) > 0
    pair = SMALL.ctx
    for e in small:
        assert validate_reduction(e.sigma, e.red, SMALL.d).valid
        assert e.c == c_value(pair, e.sigma.n_tors) and is_ell_power(e.c, pair.ell)
        assert e.w == e.red.k * e.red.a
        assert (pair.ell - 1) % prime_to_ell(e.w, pair.ell) == 0
        assert e.t == t_of(e.w, e.c, pair.ell)
        assert e.eps == epsilon(pair, e.red.n_mod)
        assert (e.sigma.deg * SMALL.d_eff) % (e.red.a * e.red.k) == 0
        assert SMALL.m % e.sigma.deg == 0


@pytest.mark.parametrize("config", CENSUS_CONFIGS)
def test_every_context_is_populated_and_sound(config):
    u = build_universe(config)
    assert len(u) > 0
    for e in u:
        assert validate_reduction(e.sigma, e.red, config.d).valid
        if config.d is not None:
            assert config.d % e.sigma.shift == 0 and config.d % e.red.a == 0


def test_rejections_are_recorded_and_logged(caplog):
    # ell = 2, q = 3: w = 2 with c = 8 fails the t formula for some cells
    config = UniverseConfig(q=3, ell=2, m=8, n_tors_max=8, shift_max=1, k_max=4, u_max=3)
    with caplog.at_level(logging.INFO, logger="segcalc.census"):
        u = build_universe(config)
    assert u.rejections
    assert all(r.reason for r in u.rejections)
    assert sum("rejected" in rec.message for rec in caplog.records) == len(u.rejections)
    accepted = {json.dumps(e.to_dict(), sort_keys=True) for e in u}
    for r in u.rejections:
        assert json.dumps(r.record, sort_keys=True) not in accepted


def test_cardinality_monotone_in_bounds():
    base = dict(q=2, ell=7, m=6, levels=(0, 1))
    sizes = []
    for n_tors_max, shift_max, k_max in ((1, 1, 1), (3, 1, 1), (3, 2, 1), (6, 2, 2), (6, 2, 3)):
        cfg = UniverseConfig(n_tors_max=n_tors_max, shift_max=shift_max, k_max=k_max, **base)
        sizes.append(len(build_universe(cfg)))
    assert sizes == sorted(sizes)
    keys_small = {json.dumps(e.to_dict(), sort_keys=True) for e in build_universe(UniverseConfig(n_tors_max=3, **base))}
    keys_big = {json.dumps(e.to_dict(), sort_keys=True) for e in build_universe(UniverseConfig(n_tors_max=6, **base))}
    assert keys_small <= keys_big


def test_generation_is_deterministic(small):
    again = build_universe(SMALL)
    threaded = build_universe(SMALL, workers=4)
    assert universe_to_jsonl(small) == universe_to_jsonl(again) == universe_to_jsonl(threaded)


# census counts -----------------------------------------------------------------------------


def test_census_by_w_edge_cases(small):
    assert census_by_w(small, 10**6, 1).count == 0
    assert census_by_w(Universe(None), 1, 0).count == 0


def test_single_tuple_universe():
    entry = make_entry(CuspidalParam(3, 3, 1, PrimePair(2, 7)), ModLReduction(3, 1, 3, 1, 3, 3, 3))
    u = Universe(None, [entry], m=3)
    res = census_by_w(u, entry.w, 0)
    assert res.count == 1 and res.classes == (entry.class_key(),)
    assert census_by_w(u, entry.w, -1).count == 0
    assert census_equalities(u).ok


def test_census_counts_grow_with_level(small):
    for w in small.w_values():
        counts = [census_by_w(small, w, j).count for j in small.levels()]
        assert counts == sorted(counts)


def test_census_equalities_and_negative_control(small):
    report = census_equalities(small)
    assert report.ok and report.first_failure() is None
    broken = census_equalities(small, drop_speh=1)
    assert not broken.ok
    bad = broken.first_failure()
    assert bad.a_count == bad.e_count + 1 and bad.first_unmatched is not None


def test_census_against_other_universe(small):
    assert census_equalities(small, other=small).ok
    shrunk = build_universe(UniverseConfig(q=2, ell=7, m=6, n_tors_max=3, levels=SMALL.levels, endos=SMALL.endos))
    assert not census_equalities(small, other=shrunk).ok


# Speh transport ---------------------------------------------------------------------------------


def test_speh_transport_r1_and_r2(small):
    e = small.entries[0]
    one = speh_transport(e, 1)
    two = speh_transport(e, 2, d=3)
    assert one.deg == e.sigma.deg and two.deg == 2 * e.sigma.deg and two.d == 3
    assert one.invariants == two.invariants == (e.sigma.n_tors, e.c, e.w, e.t, e.sigma.level)
    with pytest.raises(DomainError):
        speh_transport(e, 0)


def test_speh_records_injective(small):
    records = speh_records(small)
    assert len(records) == len(small)
    assert len({(r.origin, r.invariants) for r in records}) == len(records)
    assert all(r.deg == SMALL.m for r in records)


# serialization ------------------------------------------------------------------------------------


def test_jsonl_round_trip(small):
    text = universe_to_jsonl(small)
    back = universe_from_jsonl(text)
    assert back.entries == small.entries
    assert (back.m, back.d) == (small.m, small.d)
    assert universe_to_jsonl(back) == text


def test_jsonl_rejects_tampering(small):
    row = json.loads(universe_to_jsonl(small).splitlines()[0])
    row["t"] += 1
    with pytest.raises(DomainError):
        universe_from_jsonl(json.dumps(row))
    row["t"] -= 1
    row["shift_mod"] += 1
    with pytest.raises(DomainError):
        universe_from_jsonl(json.dumps(row))
    with pytest.raises(DomainError):
        universe_from_jsonl("{not json")


def test_config_text_round_trip():
    for config in CENSUS_CONFIGS + (SMALL,):
        assert UniverseConfig.parse(config.to_text()) == config
    parsed = UniverseConfig.parse("# grid\nq = 2\nell=7\nlevels=0,1/2\nm=6  # ambient\n")
    assert parsed.levels == (Fraction(0), Fraction(1, 2)) and parsed.m == 6


@pytest.mark.parametrize("text", ["ell=7\n", "q=2\nell=7\ncolour=red\n", "q=2\nell=7\nm=x\n", "q=2\nell 7\n", "q=6\nell=3\n"])
def test_config_errors(text):
    with pytest.raises(DomainError):
        UniverseConfig.parse(text)


@given(st.sampled_from([(2, 7), (3, 2), (2, 3), (4, 5), (2, 5)]), st.integers(1, 6), st.integers(1, 6))
@settings(max_examples=25, deadline=None)
def test_generated_tuples_satisfy_invariants(pair, m, n_tors_max):
    q, ell = pair
    u = build_universe(UniverseConfig(q=q, ell=ell, m=m, n_tors_max=n_tors_max, shift_max=2, k_max=2, u_max=2))
    for e in u:
        assert (e.c > 1) == ((q ** e.sigma.n_tors - 1) % ell == 0)
        assert (ell - 1) % prime_to_ell(e.w, ell) == 0
        assert e.t >= 1
    assert census_equalities(u).ok
