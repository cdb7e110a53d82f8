from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from segcalc.arith import PrimePair, prime_to_ell
from segcalc.cuspidal_params import (
    CuspidalParam,
    ModLReduction,
    b_of,
    epsilon,
    epsilon_from_supercuspidal,
    is_admissible_w,
    omega,
    prime_to_ell_divides_ell_minus_one,
    record_from_dict,
    record_from_json,
    record_from_text,
    record_to_dict,
    record_to_json,
    record_to_text,
    t_of,
    twist_congruence,
    validate_reduction,
    w_invariant,
    w_prime_to_ell_check,
)
from segcalc.errors import DomainError, InconsistencyError

PRIMES = [2, 3, 5, 7, 11, 13]


def sigma(q, ell, n_tors, shift=1, deg=1, **kw):
    return CuspidalParam(deg, n_tors, shift, PrimePair(q, ell), **kw)


@pytest.mark.parametrize("q, ell, n, s, expected", [(2, 7, 1, 1, 3), (2, 7, 3, 1, 1), (4, 3, 1, 1, 1)])
def test_omega_examples(q, ell, n, s, expected):
    assert omega(PrimePair(q, ell), n, s) == expected


@pytest.mark.parametrize("q, ell, n, expected", [(2, 7, 1, 3), (3, 5, 1, 4), (2, 7, 3, 1)])
def test_epsilon_examples(q, ell, n, expected):
    assert epsilon(PrimePair(q, ell), n) == expected


@pytest.mark.parametrize("e, s, expected", [(6, 4, 2), (4, 1, 1), (3, 6, 3)])
def test_epsilon_from_supercuspidal(e, s, expected):
    assert epsilon_from_supercuspidal(e, s) == expected


def test_epsilon_divides_ell_minus_one():
    for ell in PRIMES + [17, 19]:
        for q in range(2, 30):
            if q % ell:
                for n in range(1, 13):
                    assert (ell - 1) % epsilon(PrimePair(q, ell), n) == 0


def test_validate_positive_examples():
    assert validate_reduction(sigma(2, 7, 3), ModLReduction(3, 1, 3)).valid
    assert validate_reduction(sigma(3, 2, 4), ModLReduction(2, 1, 2)).valid


def test_validate_negative_example_names_constraint_iii():
    report = validate_reduction(sigma(2, 7, 2), ModLReduction(2, 1, 2))
    assert not report.valid
    assert report.failures == ["iii_length"]


def test_validate_reports_each_constraint():
    report = validate_reduction(sigma(2, 7, 4), ModLReduction(3, 1, 2))
    assert set(report.failures) >= {"i_torsion", "ii_shift"}
    assert report["iv_supercuspidal"].applicable is False
    assert report.as_dict()["valid"] is False


def test_validate_supercuspidal_and_extras():
    red = ModLReduction(3, 1, 3, k=1, eps=3, sc_shift=3, sc_eps=3)
    assert validate_reduction(sigma(2, 7, 3), red, d=3).valid
    bad = ModLReduction(3, 1, 3, k=1, eps=3, sc_shift=2, sc_eps=3)
    assert validate_reduction(sigma(2, 7, 3), bad).failures == ["iv_supercuspidal"]
    wrong_eps = ModLReduction(3, 1, 3, k=1, eps=1, sc_shift=1, sc_eps=1)
    assert validate_reduction(sigma(2, 7, 3), wrong_eps).failures == ["eps_order"]
    assert validate_reduction(sigma(2, 7, 3), ModLReduction(3, 1, 3), d=2).failures == ["a_divides_d"]


def test_validate_torsion_rejects_wrong_n_mod():
    # n_tors / a = 7 * 1 is fine with n_mod = 1, not with n_mod = 7
    assert validate_reduction(sigma(2, 7, 7), ModLReduction(1, 1, 1)).valid
    assert validate_reduction(sigma(2, 7, 7), ModLReduction(1, 7, 1)).failures == ["i_torsion"]


@given(
    st.sampled_from(PRIMES), st.integers(2, 20), st.integers(1, 40), st.integers(1, 3),
    st.integers(1, 12), st.integers(1, 12),
)
def test_validation_monotone_in_information(ell, q, n_tors, shift, a, n_mod):
    if q % ell == 0:
        return
    s = sigma(q, ell, n_tors, shift)
    eps = epsilon(PrimePair(q, ell), n_mod)
    full = ModLReduction(a, n_mod, a * shift, 1, eps, a * shift, eps)
    core = ("i_torsion", "ii_shift", "iii_length")
    before = [validate_reduction(s, full)[c].passed for c in core]
    after = [validate_reduction(s, full.without_supercuspidal())[c].passed for c in core]
    assert before == after


def test_valid_pairs_have_eps_dividing_a_and_orbit_surjects():
    for ell in PRIMES:
        for q in range(2, 16):
            if q % ell == 0:
                continue
            pair = PrimePair(q, ell)
            for n_tors in range(1, 40):
                for a in range(2, n_tors + 1):
                    if n_tors % a:
                        continue
                    n_mod = prime_to_ell(n_tors // a, ell)
                    red = ModLReduction(a, n_mod, a)
                    if validate_reduction(CuspidalParam(1, n_tors, 1, pair), red).valid:
                        eps = epsilon(pair, n_mod)
                        assert a % eps == 0
                        assert {i % eps for i in range(a)} == set(range(eps))


@pytest.mark.parametrize("k, a, expected", [(1, 1, 1), (2, 3, 6), (3, 1, 3)])
def test_w_invariant(k, a, expected):
    assert w_invariant(k, a) == expected


@pytest.mark.parametrize("w, c, ell, expected", [(1, 7, 7, 7), (3, 7, 7, 2), (3, 9, 3, 2)])
def test_t_of_examples(w, c, ell, expected):
    assert t_of(w, c, ell) == expected


def test_t_of_inconsistent():
    with pytest.raises(InconsistencyError):
        t_of(7, 7, 7)
    with pytest.raises(InconsistencyError):
        t_of(2, 1, 3)  # t = 0
    with pytest.raises(DomainError):
        t_of(1, 6, 3)


def brute_t(w, c, ell):
    """Search for t directly from t * w = target."""
    target = c if w == 1 else (c - 1 if w < ell else c * (ell - 1) / ell)
    hits = [t for t in range(1, c + 1) if t * w == target]
    return hits[0] if hits else None


def test_t_of_matches_brute_force_search():
    for ell in (2, 3, 5, 7):
        for v in range(0, 5):
            c = ell**v
            for w in range(1, 40):
                expected = brute_t(w, c, ell)
                if expected is None:
                    with pytest.raises(InconsistencyError):
                        t_of(w, c, ell)
                else:
                    assert t_of(w, c, ell) == expected


def test_admissible_w_is_exactly_where_t_of_succeeds():
    # among w passing the two divisibility rules, t_of succeeds iff admissible
    for ell in PRIMES:
        for v in range(0, 7):
            c = ell**v
            for w in range(1, 65):
                if not prime_to_ell_divides_ell_minus_one(w, ell) or (w >= ell and w % ell):
                    assert not is_admissible_w(w, c, ell)
                    continue
                try:
                    t_of(w, c, ell)
                    ok = True
                except InconsistencyError:
                    ok = False
                assert ok == is_admissible_w(w, c, ell), (w, c, ell)


def test_w_prime_to_ell_check_examples():
    red = lambda e: ModLReduction(1, 1, 1, sc_eps=e)  # noqa: E731
    assert w_prime_to_ell_check(6, red(3), 2)
    assert w_prime_to_ell_check(4, red(1), 2)
    assert not w_prime_to_ell_check(6, red(5), 2)
    with pytest.raises(DomainError):
        w_prime_to_ell_check(1, red(1), 2)
    assert prime_to_ell_divides_ell_minus_one(6, 7)
    assert not prime_to_ell_divides_ell_minus_one(6, 2)


@pytest.mark.parametrize("s, kk0, expected", [(1, 4, 4), (2, 6, 3)])
def test_b_of(s, kk0, expected):
    assert b_of(s, kk0) == expected


def test_b_of_inconsistent():
    with pytest.raises(InconsistencyError):
        b_of(4, 6)


@pytest.mark.parametrize("order, n, expected", [(1, 5, True), (3, 6, True), (4, 6, False)])
def test_twist_congruence(order, n, expected):
    assert twist_congruence(order, n) is expected


def test_record_round_trips():
    s = sigma(2, 7, 3, deg=3, level=Fraction(1, 2), endo="Theta'")
    red = ModLReduction(3, 1, 3, k=1, eps=3, sc_shift=3, sc_eps=3)
    assert record_from_dict(record_to_dict(s, red)) == (s, red)
    assert record_from_text(record_to_text(s, red)) == (s, red)
    assert record_from_json(record_to_json(s, red)) == (s, red)
    assert record_from_text(record_to_text(s)) == (s, None)
    keys = set(record_to_dict(s, red))
    assert keys == {"q", "ell", "deg", "n_tors", "shift", "level", "endo", "a", "n_mod",
                    "shift_mod", "k", "eps", "sc_shift", "sc_eps"}


def test_record_rejects_unknown_and_missing_fields():
    data = record_to_dict(sigma(2, 7, 3))
    with pytest.raises(DomainError):
        record_from_dict(dict(data, colour="red"))
    del data["deg"]
    with pytest.raises(DomainError):
        record_from_dict(data)
    with pytest.raises(DomainError):
        record_from_text("q=2\nell 7\n")


def test_param_types_reject_nonpositive():
    with pytest.raises(DomainError):
        sigma(2, 7, 0)
    with pytest.raises(DomainError):
        ModLReduction(0, 1, 1)
    with pytest.raises(DomainError):
        sigma(2, 7, 1, level=Fraction(-1))
