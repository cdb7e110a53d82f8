"""Command-line front end.

Exit codes: 0 success, 1 failed verification, 2 usage error.  Data goes to
stdout, diagnostics to stderr.  ``SEGCALC_THREADS`` caps the worker pool.
"""

from __future__ import annotations

import argparse
import inspect
import json
import logging
import os
import sys
from fractions import Fraction
from typing import Optional, Sequence

from segcalc.arith import PrimePair, c_value, prime_to_ell
from segcalc.census import (
    LIMITATION,
    UniverseConfig,
    build_universe,
    census_equalities,
    parse_key_values,
    speh_records,
    universe_from_jsonl,
    universe_to_jsonl,
)
from segcalc.cuspidal_params import epsilon, omega, t_of, w_invariant
from segcalc.errors import DomainError, InconsistencyError, SegcalcError
from segcalc.jl_transfer import transfer
from segcalc.multisegment import hasse_edges
from segcalc.suites import SUITES, run_suite, suite_cases

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

SUITE_OPTIONS = ("bmax", "nmax", "kmax", "amax", "smax", "emax", "vmax", "wmax", "qmax", "ellmax", "samples", "seed")

CONFIG_FLAGS = ("q", "ell", "m", "d", "n_tors_max", "shift_max", "k_max", "u_max", "levels", "endos")


class UsageError(Exception):
    pass


def _threads() -> Optional[int]:
    raw = os.environ.get("SEGCALC_THREADS")
    if raw is None or raw == "":
        return None
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"SEGCALC_THREADS must be a positive integer, got {raw!r}") from None
    if value < 1:
        raise UsageError(f"SEGCALC_THREADS must be a positive integer, got {raw!r}")
    return value


def _read_config(path: Optional[str]) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_key_values(fh.read())
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    except DomainError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value config file; flags override it")
    for name in CONFIG_FLAGS:
        p.add_argument("--" + name.replace("_", "-"), dest=name)


def _universe_config(args) -> UniverseConfig:
    data = _read_config(args.config)
    for name in CONFIG_FLAGS:
        value = getattr(args, name, None)
        if value is not None:
            data[name] = value
    try:
        return UniverseConfig.from_mapping(data)
    except (DomainError, TypeError) as exc:
        raise UsageError(f"bad universe config: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="segcalc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", metavar="VERB")
    sub.required = True

    p = sub.add_parser("invariants", help="eps, omega, w, t, c of one tuple")
    p.add_argument("--config")
    for name in ("q", "ell", "n", "s", "k", "a"):
        p.add_argument("--" + name, type=int)

    p = sub.add_parser("enumerate", help="universe as JSON-lines")
    _add_config_flags(p)

    p = sub.add_parser("census", help="A/E counts per (w, j) cell")
    _add_config_flags(p)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite", choices=sorted(SUITES) + ["all"])
    for name in SUITE_OPTIONS:
        p.add_argument("--" + name, type=int)

    p = sub.add_parser("transfer", help="transfer every Speh record of a universe")
    p.add_argument("--universe", help="JSON-lines universe file")
    _add_config_flags(p)

    p = sub.add_parser("hasse", help="dominance Hasse diagram on partitions of n")
    p.add_argument("n", type=int)

    return parser


def _emit(out, line: str) -> None:
    out.write(line + "\n")


def cmd_invariants(args, out) -> int:
    data = _read_config(args.config)
    values = {}
    for name in ("q", "ell", "n", "s", "k", "a"):
        value = getattr(args, name)
        if value is None and name in data:
            try:
                value = int(data[name])
            except ValueError:
                raise UsageError(f"{name} must be an integer") from None
        if value is None:
            if name in ("k", "a", "s"):
                value = 1
            else:
                raise UsageError(f"missing --{name}")
        values[name] = value
    try:
        pair = PrimePair(values["q"], values["ell"])
        n, a, k, s = values["n"], values["a"], values["k"], values["s"]
        if n < 1 or a < 1 or k < 1 or s < 1:
            raise DomainError("n, s, k, a must be positive")
        if n % a:
            raise DomainError(f"a={a} does not divide n={n}")
        n_mod = prime_to_ell(n // a, pair.ell)
        eps = epsilon(pair, n_mod)
        om = omega(pair, n_mod, a * s)
        w = w_invariant(k, a)
        c = c_value(pair, n)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    _emit(out, f"eps={eps}")
    _emit(out, f"omega={om}")
    _emit(out, f"w={w}")
    try:
        t = t_of(w, c, pair.ell)
    except InconsistencyError as exc:
        _emit(out, "t=inconsistent")
        _emit(out, f"c={c}")
        print(f"segcalc: {exc}", file=sys.stderr)
        return EXIT_FAIL
    _emit(out, f"t={t}")
    _emit(out, f"c={c}")
    return EXIT_OK


def cmd_enumerate(args, out) -> int:
    config = _universe_config(args)
    universe = build_universe(config, _threads())
    out.write(universe_to_jsonl(universe))
    print(f"segcalc: {len(universe)} tuples, {len(universe.rejections)} rejected", file=sys.stderr)
    for rej in universe.rejections:
        print(f"segcalc: rejected {json.dumps(rej.record, sort_keys=True)}: {rej.reason}", file=sys.stderr)
    return EXIT_OK


def cmd_census(args, out) -> int:
    config = _universe_config(args)
    universe = build_universe(config, _threads())
    report = census_equalities(universe)
    for cell in report.cells:
        row = {"w": cell.w, "j": str(cell.j), "a_count": cell.a_count, "e_count": cell.e_count, "pass": cell.ok}
        if cell.first_unmatched is not None:
            row["witness"] = [str(x) if isinstance(x, Fraction) else x for x in cell.first_unmatched]
        _emit(out, json.dumps(row, sort_keys=True))
    print(f"segcalc: {LIMITATION}", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_verify(args, out) -> int:
    options = {name: getattr(args, name) for name in SUITE_OPTIONS if getattr(args, name) is not None}
    if options:
        if args.suite == "all":
            raise UsageError("'verify all' takes no suite options")
        accepted = inspect.signature(SUITES[args.suite]).parameters
        unknown = sorted(set(options) - set(accepted))
        if unknown:
            raise UsageError(f"suite {args.suite!r} does not take " + ", ".join("--" + u for u in unknown))
    workers = _threads()
    results = run_suite(suite_cases(args.suite, **options), workers)
    for result in results:
        _emit(out, result.to_json())
    failed = sum(1 for r in results if not r.passed)
    print(f"segcalc: {args.suite}: {len(results) - failed}/{len(results)} passed", file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_transfer(args, out) -> int:
    if args.universe:
        try:
            with open(args.universe, encoding="utf-8") as fh:
                universe = universe_from_jsonl(fh.read())
        except OSError as exc:
            raise UsageError(f"cannot read universe {args.universe}: {exc.strerror}") from None
        except DomainError as exc:
            raise UsageError(f"{args.universe}: {exc}") from None
    else:
        universe = build_universe(_universe_config(args), _threads())
    status = EXIT_OK
    for record in speh_records(universe):
        try:
            result = transfer(record)
        except DomainError as exc:
            print(f"segcalc: {exc}", file=sys.stderr)
            status = EXIT_FAIL
            continue
        _emit(out, result.to_json())
    return status


def cmd_hasse(args, out) -> int:
    if args.n < 0:
        raise UsageError("n must be >= 0")
    for lower, upper in hasse_edges(args.n):
        _emit(out, f"{lower} -> {upper}")
    return EXIT_OK


COMMANDS = {
    "invariants": cmd_invariants,
    "enumerate": cmd_enumerate,
    "census": cmd_census,
    "verify": cmd_verify,
    "transfer": cmd_transfer,
    "hasse": cmd_hasse,
}


def run(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.WARNING, format="segcalc: %(message)s")
    try:
        return COMMANDS[args.verb](args, out)
    except UsageError as exc:
        print(f"segcalc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SegcalcError as exc:
        print(f"segcalc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
