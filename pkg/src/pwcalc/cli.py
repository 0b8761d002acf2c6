"""Command-line interface.

Subcommands: perspective, mean, divergence, lebesgue, t2bound, suite.
Exit codes: 0 success / no failures, 1 suite failures, 2 usage errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import calculus as calc
from .extended import dump_json
from .functions import IntegralRepr77, Measure, catalog, from_repr77
from .linalg import MatrixFileError, read_matrix, write_matrix
from .perspectives import (
    connection,
    connection_generator,
    is_absolutely_continuous,
    lebesgue_decomposition,
    max_f_divergence,
    perspective_apply,
    t2_bound,
)
from .suites import (
    RandomSpec,
    candidate_anticommutator,
    candidate_connection,
    candidate_parallel_sum,
    candidate_perspective,
    suite_axioms_thm101,
    suite_axioms_thm103,
    suite_connection_cor107,
    suite_continuity,
    suite_convexity,
    t_cubed,
)


class SpecError(ValueError):
    pass


def parse_function_spec(spec: str):
    """Function specs: power:2, tlogt, neglog, glambda:0.5, gn:3,
    square_minus, max1, t3, repr77:<path>."""
    name, _, arg = spec.partition(":")
    try:
        if name == "t3":
            return t_cubed()
        if name == "repr77":
            if not arg:
                raise SpecError("repr77 needs a path: repr77:<file>")
            return from_repr77(load_repr77(arg))
        if name in ("power", "glambda", "gn"):
            if not arg:
                raise SpecError(f"{name} needs a parameter, e.g. {name}:2")
            return catalog(name, float(arg))
        if arg:
            raise SpecError(f"{name} takes no parameter")
        return catalog(name)
    except ValueError as exc:
        raise SpecError(str(exc)) from exc


def parse_mean_spec(spec: str):
    """Mean generator specs: geometric, parallel, arithmetic, hpower:p."""
    name, _, arg = spec.partition(":")
    try:
        if name == "hpower":
            if not arg:
                raise SpecError("hpower needs an exponent, e.g. hpower:0.5")
            return connection_generator(name, float(arg))
        if arg:
            raise SpecError(f"{name} takes no parameter")
        return connection_generator(name)
    except ValueError as exc:
        raise SpecError(str(exc)) from exc


def load_repr77(path) -> IntegralRepr77:
    """Representation file: {"a":..,"b":..,"c":..,"d":..,"atoms":[[l,w],..]}."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecError(f"{path}: cannot read representation: {exc}") from exc
    try:
        mu = Measure.from_atoms([(float(l), float(w))
                                 for l, w in payload.get("atoms", [])])
        return IntegralRepr77(float(payload["a"]), float(payload["b"]),
                              float(payload["c"]), float(payload["d"]), mu)
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"{path}: bad representation: {exc}") from exc


def fmt_xreal(v: float) -> str:
    return "inf" if math.isinf(v) else repr(float(v))


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pwcalc")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("perspective", help="extended operator perspective")
    sp.add_argument("--f", required=True)
    sp.add_argument("--A", required=True)
    sp.add_argument("--B", required=True)
    sp.add_argument("--out")
    sp.add_argument("--tau-end", type=float, default=calc.ENDPOINT_TOL)

    sp = sub.add_parser("mean", help="Kubo-Ando connection / mean")
    sp.add_argument("--h", required=True)
    sp.add_argument("--A", required=True)
    sp.add_argument("--B", required=True)
    sp.add_argument("--out")

    sp = sub.add_parser("divergence", help="maximal f-divergence")
    sp.add_argument("--f", required=True)
    sp.add_argument("--A", required=True)
    sp.add_argument("--B", required=True)

    sp = sub.add_parser("lebesgue", help="Lebesgue decomposition of A wrt B")
    sp.add_argument("--A", required=True)
    sp.add_argument("--B", required=True)
    sp.add_argument("--out-ac")
    sp.add_argument("--out-singular")

    sp = sub.add_parser("t2bound", help="boundedness and norm of the squared perspective")
    sp.add_argument("--A", required=True)
    sp.add_argument("--B", required=True)

    sp = sub.add_parser("suite", help="run a property/axiom suite")
    sp.add_argument("name", choices=["convexity", "continuity", "axioms101",
                                     "axioms103", "connection107"])
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--dim", type=int, default=4)
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--f")
    sp.add_argument("--h")
    sp.add_argument("--candidate")
    sp.add_argument("--profile", default="well_conditioned")
    sp.add_argument("--report")
    return p


def _run_suite(args) -> int:
    spec = RandomSpec(args.dim, args.dim, args.profile, args.seed)
    if args.name == "convexity":
        f = parse_function_spec(args.f or "power:2")
        report = suite_convexity(f, spec, args.trials)
    elif args.name == "continuity":
        f = parse_mean_spec(args.h) if args.h else parse_function_spec(args.f or "tlogt")
        report = suite_continuity(f, spec, args.trials)
    elif args.name == "axioms101":
        name = args.candidate or "parallel_sum"
        if name == "parallel_sum":
            cand = candidate_parallel_sum
        elif name == "anticommutator":
            cand = candidate_anticommutator
        elif name.startswith("mean:"):
            cand = candidate_connection(parse_mean_spec(name[5:]))
        else:
            raise SpecError(f"unknown axioms101 candidate {name!r}")
        report = suite_axioms_thm101(cand, spec, args.trials)
    elif args.name == "axioms103":
        f = parse_function_spec(args.f or "tlogt")
        report = suite_axioms_thm103(candidate_perspective(f), spec, args.trials)
    else:
        h = parse_mean_spec(args.h or "geometric")
        report = suite_connection_cor107(candidate_connection(h), spec,
                                         args.trials)
    print(f"{report.suite_name}: {report.passes}/{report.trials} passed "
          f"({report.wall_time_ms:.0f} ms)")
    for rec in report.failures[:5]:
        print(f"  failure at trial {rec['trial']}: {rec.get('check', '?')}")
    if args.report:
        report.write(args.report)
    return 0 if report.ok else 1


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "perspective":
            f = parse_function_spec(args.f)
            A, B = read_matrix(args.A), read_matrix(args.B)
            res = perspective_apply(f, A, B, endpoint_tol=args.tau_end)
            print(f"classification: {res.classification}")
            print(f"infinity part dimension: {res.value.infinity_dim}")
            print(f"operator norm: {fmt_xreal(res.value.operator_norm())}")
            if args.out:
                dump_json(res.value, args.out)
            return 0
        if args.command == "mean":
            h = parse_mean_spec(args.h)
            A, B = read_matrix(args.A), read_matrix(args.B)
            M = connection(h, A, B)
            print(f"norm: {repr(float(np.linalg.norm(M, 2)))}")
            if args.out:
                write_matrix(args.out, M)
            return 0
        if args.command == "divergence":
            f = parse_function_spec(args.f)
            A, B = read_matrix(args.A), read_matrix(args.B)
            print(fmt_xreal(max_f_divergence(f, A, B)))
            return 0
        if args.command == "lebesgue":
            A, B = read_matrix(args.A), read_matrix(args.B)
            dec = lebesgue_decomposition(A, B)
            print(f"absolutely continuous: {is_absolutely_continuous(A, B)}")
            print(f"singular part norm: "
                  f"{repr(float(np.linalg.norm(dec.singular_part, 2)))}")
            if args.out_ac:
                write_matrix(args.out_ac, dec.ac_part)
            if args.out_singular:
                write_matrix(args.out_singular, dec.singular_part)
            return 0
        if args.command == "t2bound":
            A, B = read_matrix(args.A), read_matrix(args.B)
            res = t2_bound(A, B)
            print(f"bounded: {res.bounded}")
            print(f"lambda_min: {fmt_xreal(res.lambda_min)}")
            return 0
        if args.command == "suite":
            return _run_suite(args)
    except (SpecError, MatrixFileError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    parser.error(f"unknown command {args.command!r}")
    return 2


if __name__ == "__main__":
    sys.exit(main())
