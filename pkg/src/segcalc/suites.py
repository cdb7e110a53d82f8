"""Named verification suites.

Each suite is a list of cases; a case is a label, its parameters and a
thunk returning ``(passed, witness)``.  :func:`run_suite` evaluates the
thunks, optionally in a thread pool, and returns results in case order so
output is identical whatever the worker count.
"""

from __future__ import annotations

import json
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import comb, gcd
from typing import Any, Callable, Iterator, Optional

from segcalc.arith import PrimePair, c_value, c_value_direct, is_prime, prime_to_ell
from segcalc.census import (
    UniverseConfig,
    build_universe,
    census_by_w,
    census_equalities,
    enumerate_admissible_a,
    speh_records,
)
from segcalc.cuspidal_params import (
    CuspidalParam,
    ModLReduction,
    is_admissible_w,
    t_of,
    validate_reduction,
)
from segcalc.errors import CounterexampleError, InconsistencyError, SegcalcError
from segcalc.formal_ring import (
    Base,
    RingElement,
    coproduct,
    element,
    render,
    zfin,
    zseg,
)
from segcalc.identity_suite import (
    cyclic_chain_sides,
    mackey_sides,
    random_unitriangular,
    unitriangular_inverse,
    unitriangular_kernel_trivial,
    unitriangular_solve,
    y_count,
    y_count_expected,
)
from segcalc.jl_transfer import infer_partner_w, transfer, zelevinski_sign

__all__ = [
    "Case",
    "CheckResult",
    "SUITES",
    "suite_cases",
    "run_suite",
    "t_formula_grid",
    "CENSUS_CONFIGS",
]


@dataclass(frozen=True)
class Case:
    check: str
    params: dict
    run: Callable[[], tuple[bool, Any]]


@dataclass(frozen=True)
class CheckResult:
    check: str
    params: dict
    passed: bool
    witness: Any = None

    def to_dict(self) -> dict:
        out = {"check": self.check, "params": self.params, "pass": self.passed}
        if self.witness is not None:
            out["witness"] = self.witness
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, default=str)


def _first_difference(x: RingElement, y: RingElement) -> Optional[str]:
    diff = x - y
    if not diff:
        return None
    key, coeff = min(diff.items(), key=lambda kc: render(RingElement({kc[0]: 1}, diff.arity)))
    return f"{coeff:+d} at {render(RingElement({key: 1}, diff.arity))}"


# -- t formula and the partner squeeze -------------------------------------------

T_ELLS = (2, 3, 5, 7, 11, 13)


def t_formula_grid(ells=T_ELLS, vmax: int = 6, wmax: int = 64) -> Iterator[tuple[int, int, int, bool]]:
    """``(ell, c, w, admissible)`` over the literal grid: prime-to-ell part
    of ``w`` divides ``ell - 1`` and ``ell | w`` once ``w >= ell``."""
    for ell in ells:
        for v in range(vmax + 1):
            c = ell**v
            for w in range(1, wmax + 1):
                if (ell - 1) % prime_to_ell(w, ell):
                    continue
                if w >= ell and w % ell:
                    continue
                yield ell, c, w, is_admissible_w(w, c, ell)


def _t_formula_case(ell, c, rows):
    def run():
        for w, admissible in rows:
            try:
                t = t_of(w, c, ell)
            except InconsistencyError as exc:
                if admissible:
                    return False, f"w={w}: {exc}"
                continue
            if not admissible:
                return False, f"w={w}: expected inconsistency, got t={t}"
            if t < 1:
                return False, f"w={w}: t={t}"
        return True, None
    return run


def _grouped_grid(ells, vmax, wmax):
    groups: dict = {}
    for ell, c, w, admissible in t_formula_grid(ells, vmax, wmax):
        groups.setdefault((ell, c), []).append((w, admissible))
    return groups


def t_formula_cases(ells=T_ELLS, vmax: int = 6, wmax: int = 64) -> list[Case]:
    cases = []
    for (ell, c), rows in _grouped_grid(ells, vmax, wmax).items():
        params = {
            "ell": ell, "c": c,
            "admissible": sum(1 for _, a in rows if a),
            "excluded": sum(1 for _, a in rows if not a),
        }
        cases.append(Case("t_formula", params, _t_formula_case(ell, c, rows)))
    return cases


def partner_w_cases(ells=T_ELLS, vmax: int = 6, wmax: int = 64) -> list[Case]:
    cases = []
    for (ell, c), rows in _grouped_grid(ells, vmax, wmax).items():
        ws = [w for w, admissible in rows if admissible]

        def run(ell=ell, c=c, ws=ws):
            for w in ws:
                try:
                    if infer_partner_w(w, c, ell) != w:
                        return False, f"w={w}"
                except CounterexampleError as exc:
                    return False, str(exc)
            return True, None

        cases.append(Case("partner_w", {"ell": ell, "c": c, "w_tested": len(ws)}, run))
    return cases


# -- identities ------------------------------------------------------------------


def mackey_cases(bmax: int = 4, nmax: int = 8) -> list[Case]:
    cases = []
    for b in range(1, bmax + 1):
        for n in range(2, nmax + 1):
            for k in range(1, n):
                def run(b=b, n=n, k=k):
                    lhs, rhs = mackey_sides(b, n, k)
                    expected = comb(k + b - 1, b - 1) * comb(n - k + b - 1, b - 1)
                    if lhs != rhs:
                        return False, _first_difference(lhs, rhs)
                    if len(lhs) != expected:
                        return False, f"{len(lhs)} terms, expected {expected}"
                    return True, None
                cases.append(Case("mackey", {"b": b, "n": n, "k": k}, run))
    return cases


def y_count_cases(emax: int = 12, smax: int = 12, kmax: int = 36) -> list[Case]:
    cases = []
    for e_prime in range(1, emax + 1):
        for s_prime in range(1, smax + 1):
            for k in range(1, kmax + 1):
                if not _y_count_admissible(e_prime, s_prime, k):
                    continue

                def run(e_prime=e_prime, s_prime=s_prime, k=k):
                    expected = y_count_expected(e_prime, s_prime, k)
                    e = gcd(e_prime, s_prime)
                    for delta in range(0, e_prime, e):
                        got = y_count(e_prime, s_prime, k, delta)
                        if got != expected:
                            return False, f"delta={delta}: {got} != {expected}"
                    return True, None

                cases.append(Case("y_count", {"e_prime": e_prime, "s_prime": s_prime, "k": k}, run))
    return cases


def _y_count_admissible(e_prime: int, s_prime: int, k: int) -> bool:
    f = e_prime // gcd(e_prime, s_prime)
    if k % f:
        return False
    power = k // f
    if power == 1:
        return True
    p = next(x for x in range(2, power + 1) if power % x == 0)
    return f % p != 0 and prime_to_ell(power, p) == 1


def unitriangular_cases(nmax: int = 6, samples: int = 100, seed: int = 0) -> list[Case]:
    cases = []
    for n in range(1, nmax + 1):
        def run(n=n):
            rng = random.Random(seed * 1000 + n)
            for i in range(samples):
                E = random_unitriangular(n, rng)
                if not unitriangular_kernel_trivial(E):
                    return False, f"sample {i}: kernel check failed"
                d = [rng.randint(-5, 5) for _ in E.index]
                if unitriangular_solve(E, E.apply(d)) != d:
                    return False, f"sample {i}: solve round trip failed"
                N = unitriangular_inverse(E)
                ident = {(p, p): 1 for p in E.index}
                if E.matmul(N) != ident or N.matmul(E) != ident:
                    return False, f"sample {i}: inverse round trip failed"
            return True, None
        cases.append(Case("unitriangular", {"n": n, "samples": samples, "seed": seed}, run))
    return cases


def cyclic_chain_params(amax: int = 4, nmax: int = 5, smax: int = 4, ells=(3, 5, 7)):
    for ell in ells:
        for a in range(1, amax + 1):
            for eps in range(1, a + 1):
                if a % eps or (ell - 1) % eps:
                    continue
                if a > 1 and prime_to_ell(a, ell) != eps:
                    continue
                for n in range(1, nmax + 1):
                    for s in range(1, smax + 1):
                        yield {"a": a, "n": n, "s_tilde": s, "eps": eps, "ell": ell}


def cyclic_chain_cases(amax: int = 4, nmax: int = 5, smax: int = 4, ells=(3, 5, 7)) -> list[Case]:
    cases = []
    for params in cyclic_chain_params(amax, nmax, smax, ells):
        def run(p=params):
            lhs, rhs = cyclic_chain_sides(**p)
            if lhs == rhs:
                return True, None
            diff = sorted(set(lhs) ^ set(rhs)) or sorted(k for k in lhs if lhs[k] != rhs[k])
            return False, f"chain {diff[0]}: lhs {lhs[diff[0]]}, rhs {rhs[diff[0]]}"
        cases.append(Case("cyclic_chains", dict(params, evidence="necessary-condition"), run))
    return cases


# -- bigebra laws ---------------------------------------------------------------

BIGEBRA_BASES = (Base("s"), Base("s", modulus=2), Base("s", modulus=3, step=2), Base("r", degree=2))


def _three_way_oracle(atom) -> RingElement:
    """Closed form of the double coproduct of a segment atom."""
    n, b = atom.length, atom.base
    terms = RingElement.zero(3)
    for i in range(n + 1):
        for j in range(n - i + 1):
            k = n - i - j
            if atom.kind == "Zfin":
                parts = [element(zfin(x, b)) for x in (i, j, k)]
            else:
                s, c = b.step, atom.exp
                parts = [element(zseg(c, i, b)), element(zseg(c + i * s, j, b)), element(zseg(c + (i + j) * s, k, b))]
            terms = terms + RingElement({tuple(next(iter(p))[0] for p in parts): 1}, 3)
    return terms


def bigebra_cases(nmax: int = 6, samples: int = 200, seed: int = 0) -> list[Case]:
    cases = []
    for base in BIGEBRA_BASES:
        for n in range(1, nmax + 1):
            def run(base=base, n=n):
                for atom in (zseg(1, n, base), zfin(n, base)):
                    x = element(atom)
                    dx = coproduct(x)
                    left = coproduct(dx, factor=0)
                    right = coproduct(dx, factor=1)
                    if left != right:
                        return False, f"{atom}: {_first_difference(left, right)}"
                    if left != _three_way_oracle(atom):
                        return False, f"{atom}: closed form mismatch"
                return True, None
            cases.append(Case("bigebra_coassociativity", {"base": str(base), "n": n}, run))

    def run_products():
        rng = random.Random(seed)
        for i in range(samples):
            x, y = _random_element(rng), _random_element(rng)
            lhs = coproduct(x * y)
            rhs = coproduct(x) * coproduct(y)
            if lhs != rhs:
                return False, f"sample {i}: {x} | {y}: {_first_difference(lhs, rhs)}"
        return True, None

    cases.append(Case("bigebra_multiplicativity", {"samples": samples, "seed": seed}, run_products))
    return cases


def _random_atom(rng: random.Random):
    base = rng.choice(BIGEBRA_BASES)
    n = rng.randint(1, 3)
    if rng.random() < 0.5:
        return zfin(n, base)
    return zseg(rng.randint(-2, 2), n, base)


def _random_element(rng: random.Random, max_terms: int = 2, max_atoms: int = 3) -> RingElement:
    out = RingElement.zero()
    for _ in range(rng.randint(1, max_terms)):
        atoms = [_random_atom(rng) for _ in range(rng.randint(1, max_atoms))]
        out = out + element(*atoms, coeff=rng.choice((-2, -1, 1, 2, 3)))
    return out or RingElement.unit()


# -- reduction constraint system -------------------------------------------------

REDUCTION_EXAMPLES = (
    # (q, ell, n_tors, shift, a, n_mod, shift_mod, expected valid, failing constraint)
    (2, 7, 3, 1, 3, 1, 3, True, None),
    (3, 2, 4, 1, 2, 1, 2, True, None),
    (2, 7, 2, 1, 2, 1, 2, False, "iii_length"),
)

ADMISSIBLE_A_EXAMPLES = (
    # (q, ell, n_tors, d, expected)
    (2, 7, 3, 3, {1, 3}),
    (2, 3, 4, 4, {1}),
    (5, 3, 1, 1, {1}),
)


def _brute_force_admissible_a(q, ell, n_tors, d):
    """Independent search straight from the torsion and length constraints."""
    PrimePair(q, ell)
    out = set()
    for a in range(1, n_tors + 1):
        if n_tors % a or d % a:
            continue
        rest = n_tors // a
        while rest % ell == 0:
            rest //= ell
        order = next(t for t in range(1, ell) if pow(q, rest * t, ell) == 1)
        a_rest = a
        while a_rest % ell == 0:
            a_rest //= ell
        if a == 1 or a_rest == order:
            out.add(a)
    return out


def reduction_cases() -> list[Case]:
    cases = []
    for q, ell, n_tors, shift, a, n_mod, shift_mod, valid, failing in REDUCTION_EXAMPLES:
        def run(q=q, ell=ell, n_tors=n_tors, shift=shift, a=a, n_mod=n_mod,
                shift_mod=shift_mod, valid=valid, failing=failing):
            sigma = CuspidalParam(1, n_tors, shift, PrimePair(q, ell))
            report = validate_reduction(sigma, ModLReduction(a, n_mod, shift_mod))
            if report.valid != valid:
                return False, f"valid={report.valid}, failures={report.failures}"
            if failing is not None and report.failures != [failing]:
                return False, f"failures={report.failures}"
            return True, None
        params = {"q": q, "ell": ell, "n_tors": n_tors, "shift": shift, "a": a,
                  "n_mod": n_mod, "shift_mod": shift_mod, "expect_valid": valid}
        cases.append(Case("reduction", params, run))
    for q, ell, n_tors, d, expected in ADMISSIBLE_A_EXAMPLES:
        def run(q=q, ell=ell, n_tors=n_tors, d=d, expected=expected):
            got = enumerate_admissible_a(PrimePair(q, ell), n_tors, d)
            brute = _brute_force_admissible_a(q, ell, n_tors, d)
            if got != expected or brute != expected:
                return False, f"got {sorted(got)}, brute force {sorted(brute)}, expected {sorted(expected)}"
            return True, None
        cases.append(Case("admissible_a", {"q": q, "ell": ell, "n_tors": n_tors, "d": d}, run))
    return cases


# -- census ------------------------------------------------------------------------

CENSUS_CONFIGS = (
    UniverseConfig(q=2, ell=7, m=6, n_tors_max=6, shift_max=2, k_max=3, u_max=1,
                   levels=(Fraction(0), Fraction(1, 2), Fraction(1)), endos=("Theta", "Theta'")),
    UniverseConfig(q=3, ell=2, m=8, n_tors_max=8, shift_max=2, k_max=4, u_max=3,
                   levels=(Fraction(0), Fraction(1))),
    UniverseConfig(q=2, ell=3, m=4, d=2, n_tors_max=8, shift_max=2, k_max=4, u_max=2,
                   levels=(Fraction(0), Fraction(1))),
    UniverseConfig(q=4, ell=5, m=4, n_tors_max=4, shift_max=1, k_max=4, u_max=1),
)


def census_cases(configs=CENSUS_CONFIGS, workers: Optional[int] = None) -> list[Case]:
    cases = []
    for config in configs:
        def run(config=config):
            u = build_universe(config, workers)
            if not u.entries:
                return False, "empty universe"
            report = census_equalities(u)
            if not report.ok:
                bad = report.first_failure()
                return False, f"cell w={bad.w} j={bad.j}: A={bad.a_count} E={bad.e_count}, first unmatched {bad.first_unmatched}"
            corrupted = census_equalities(u, drop_speh=1)
            if corrupted.ok:
                return False, "negative control not detected"
            records = speh_records(u)
            for w in u.w_values():
                for j in u.levels():
                    cell = [rec for rec in records if rec.w == w and rec.level <= j]
                    images = [transfer(rec) for rec in cell]
                    targets = {(tr.target.origin, tr.target.invariants) for tr in images}
                    if len(targets) != len(cell) or len(cell) != census_by_w(u, w, j).count:
                        return False, f"cell w={w} j={j}: transfer not injective or counts differ"
                    for tr in images:
                        if tr.source.invariants != tr.target.invariants:
                            return False, f"invariants changed for {tr.source.origin}"
                        if tr.sign != zelevinski_sign(tr.source.r):
                            return False, f"sign mismatch for {tr.source.origin}"
            return True, None
        params = {"q": config.q, "ell": config.ell, "m": config.m, "d": config.d}
        cases.append(Case("census", params, run))
    return cases


# -- arithmetic ----------------------------------------------------------------------


def arith_cases(qmax: int = 32, ellmax: int = 31, nmax: int = 64) -> list[Case]:
    cases = []
    for ell in (p for p in range(2, ellmax + 1) if is_prime(p)):
        def run(ell=ell):
            for q in range(2, qmax + 1):
                if q % ell == 0:
                    continue
                pair = PrimePair(q, ell)
                for n in range(1, nmax + 1):
                    fast, slow = c_value(pair, n), c_value_direct(pair, n)
                    if fast != slow:
                        return False, f"q={q} n={n}: {fast} != {slow}"
            return True, None
        cases.append(Case("arith", {"ell": ell, "qmax": qmax, "nmax": nmax}, run))
    return cases


SUITES: dict[str, Callable[..., list[Case]]] = {
    "arith": arith_cases,
    "t_formula": t_formula_cases,
    "partner_w": partner_w_cases,
    "mackey": mackey_cases,
    "bigebra": bigebra_cases,
    "y_count": y_count_cases,
    "unitriangular": unitriangular_cases,
    "cyclic_chains": cyclic_chain_cases,
    "reduction": reduction_cases,
    "census": census_cases,
}


def suite_cases(name: str, **options) -> list[Case]:
    if name == "all":
        return [case for key in SUITES for case in SUITES[key]()]
    if name not in SUITES:
        raise KeyError(name)
    return SUITES[name](**options)


def _evaluate(case: Case) -> CheckResult:
    try:
        passed, witness = case.run()
    except SegcalcError as exc:
        passed, witness = False, f"{type(exc).__name__}: {exc}"
    return CheckResult(case.check, case.params, bool(passed), witness)


def run_suite(cases: list[Case], workers: Optional[int] = None) -> list[CheckResult]:
    if workers is not None and workers > 1 and len(cases) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_evaluate, cases))
    return [_evaluate(case) for case in cases]
