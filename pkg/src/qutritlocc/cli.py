"""Command-line front end.

Exit codes: 0 on success, 2 on a mathematical negative (non-generic seed,
inequivalent states, infeasible conversion, failed verification), 1 on
input errors (bad files, bad flags).  ``--json`` switches every report to
machine-readable output; file-producing commands write JSON regardless.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any

import numpy as np

from .classify import Classification, classify
from .config import set_default_tol
from .generate import KINDS, random_state
from .oracle import OracleBudget, brute_force_sep
from .protocols import (
    POVM_TOL,
    ProtocolError,
    locc_reach_protocol,
    sep_map_from_witness,
    simulate_branches,
    validate_povm,
)
from .seeds import SeedParams, check_generic, symmetry_audit
from .sep import sep_feasible, sep_instance
from .statefile import (
    SchemaError,
    load_protocol,
    load_state,
    protocol_to_json,
    read_json,
    save_protocol,
    save_state,
    seed_from_json,
    state_to_json,
)
from .states import SeedMismatchError, lu_equivalent, standard_form


class _Parser(argparse.ArgumentParser):
    """argparse's default exit code for usage errors collides with the
    mathematical-negative code; remap it to 1."""

    def error(self, message: str):  # noqa: D102 - argparse hook
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _emit(args: argparse.Namespace, payload: Any, lines: list[str]) -> None:
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        for line in lines:
            print(line)


def _load_seed_file(path: str) -> SeedParams:
    """Accept either a full state file or a bare seed object."""
    obj = read_json(path)
    if isinstance(obj, dict) and "seed" in obj:
        return seed_from_json(obj["seed"], "$.seed")
    return seed_from_json(obj, "$")


def _num(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def _seed_json(seed: SeedParams) -> dict[str, Any]:
    return {"a": _num(seed.a), "b": _num(seed.b), "c": _num(seed.c)}


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_generate(args: argparse.Namespace) -> int:
    rng = np.random.default_rng(args.rng_seed)
    params = _load_seed_file(args.params_from) if args.params_from else None
    state = random_state(args.kind, rng, params)
    metadata: dict[str, Any] = {"kind": args.kind}
    if args.label:
        metadata["label"] = args.label
    if args.out:
        save_state(args.out, state, metadata)
        _emit(
            args,
            {"written": args.out, "kind": args.kind, "seed": _seed_json(state.seed)},
            [f"wrote {args.kind} state to {args.out}"],
        )
    else:
        print(json.dumps(state_to_json(state, metadata), indent=2))
    return 0


def _cmd_check_generic(args: argparse.Namespace) -> int:
    reports = []
    all_generic = True
    lines = []
    for path in args.files:
        seed = _load_seed_file(path)
        report = check_generic(seed)
        all_generic &= report.generic
        reports.append(
            {
                "file": path,
                "generic": report.generic,
                "margin": report.margin,
                "violations": [name for name, _ in report.violations],
            }
        )
        verdict = "generic" if report.generic else "NOT generic"
        lines.append(f"{path}: {verdict} (margin {report.margin:.3e})")
        for name, value in report.violations:
            lines.append(f"  violated: {name} (normalized magnitude {value:.3e})")
    _emit(args, reports if len(reports) > 1 else reports[0], lines)
    return 0 if all_generic else 2


def _cmd_standard_form(args: argparse.Namespace) -> int:
    reports = []
    lines = []
    for path in args.files:
        state = load_state(path)
        form = standard_form(state)
        reports.append(
            {
                "file": path,
                "seed": _seed_json(form.seed),
                "gauge": list(form.gauge),
                "coords": [[_num(z) for z in row] for row in form.coords],
            }
        )
        lines.append(f"{path}: gauge {form.gauge}")
        for i, row in enumerate(form.coords):
            rendered = ", ".join(f"{z.real:+.6f}{z.imag:+.6f}j" for z in row)
            lines.append(f"  party {i}: {rendered}")
    _emit(args, reports if len(reports) > 1 else reports[0], lines)
    return 0


def _cmd_lu_equiv(args: argparse.Namespace) -> int:
    a = load_state(args.first)
    b = load_state(args.second)
    try:
        verdict = lu_equivalent(a, b)
    except SeedMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _emit(
        args,
        {"equivalent": verdict},
        ["locally equivalent" if verdict else "not locally equivalent"],
    )
    return 0 if verdict else 2


def _classification_json(cls: Classification) -> dict[str, Any]:
    case = cls.sep_cases[0] if cls.sep_cases else None
    return {
        "sep_reachable": cls.sep_reachable,
        "case": case.kind if case else None,
        "permutation": list(case.parties) if case else None,
        "pair": list(case.pair) if case and case.pair else None,
        "locc_reachable": cls.locc_reachable,
        "sep_only": cls.sep_only,
        "locc_convertible": cls.locc_convertible,
        "support_tiling": cls.support_tiling,
        "in_mes": cls.in_mes,
        "isolated": cls.isolated,
        "supports": [sorted(list(p) for p in s) for s in cls.pattern.pairs],
        "warnings": list(cls.warnings),
    }


def _cmd_classify(args: argparse.Namespace) -> int:
    reports = []
    lines = []
    for path in args.files:
        state = load_state(path)
        cls = classify(state, cyclic_only=args.cyclic_perms_only)
        report = {"file": path, **_classification_json(cls)}
        reports.append(report)
        flags = [
            name
            for name in (
                "sep_reachable",
                "locc_reachable",
                "sep_only",
                "locc_convertible",
                "support_tiling",
                "in_mes",
                "isolated",
            )
            if report[name]
        ]
        lines.append(f"{path}: {', '.join(flags) if flags else '(no flags)'}")
        for w in cls.warnings:
            lines.append(f"  warning: {w}")
    _emit(args, reports if len(reports) > 1 else reports[0], lines)
    return 0


def _cmd_sep_decide(args: argparse.Namespace) -> int:
    source = load_state(args.src)
    target = load_state(args.to)
    try:
        inst = sep_instance(source, target)
    except SeedMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    result = sep_feasible(inst)
    payload: dict[str, Any] = {
        "feasible": result.feasible,
        "unique": result.unique,
        "nontrivial": result.nontrivial,
        "witness": list(result.witness) if result.witness is not None else None,
        "vertices": len(result.vertices),
        "residual": result.residual,
        "reason": result.reason,
    }
    lines = [
        "feasible" if result.feasible else f"infeasible ({result.reason})",
        f"  residual: {result.residual:.3e}",
    ]
    if result.feasible:
        lines.append(
            f"  vertices: {len(result.vertices)}"
            + (" (unique)" if result.unique else "")
            + (", nontrivial" if result.nontrivial else ", trivial only")
        )
    if args.oracle:
        verdict = brute_force_sep(inst, OracleBudget(starts=2000, iters=400))
        payload["oracle"] = {
            "feasible": verdict.feasible,
            "best_residual": verdict.best_residual,
        }
        lines.append(
            f"  oracle: {verdict.feasible} (best residual {verdict.best_residual:.3e})"
        )
        if verdict.feasible is not None and verdict.feasible != result.feasible:
            _emit(args, payload, lines)
            print("error: oracle disagrees with the decision engine", file=sys.stderr)
            return 1
    _emit(args, payload, lines)
    return 0 if result.feasible else 2


def _cmd_synth_protocol(args: argparse.Namespace) -> int:
    target = load_state(args.target)
    if args.source is None:
        try:
            obj = locc_reach_protocol(target)
        except ValueError as exc:
            print(f"not synthesized: {exc}", file=sys.stderr)
            return 2
    else:
        source = load_state(args.source)
        try:
            inst = sep_instance(source, target)
        except SeedMismatchError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        result = sep_feasible(inst)
        if not result.feasible:
            print(
                f"not synthesized: conversion is separably infeasible ({result.reason})",
                file=sys.stderr,
            )
            return 2
        obj = sep_map_from_witness(source, target, result.witness)
    if args.out:
        save_protocol(args.out, obj)
        _emit(
            args,
            {"written": args.out, "construction": obj.construction},
            [f"wrote {obj.construction} protocol to {args.out}"],
        )
    else:
        print(json.dumps(protocol_to_json(obj), indent=2))
    return 0


def _cmd_verify_protocol(args: argparse.Namespace) -> int:
    obj = load_protocol(args.file)
    residual = validate_povm(obj)
    report = simulate_branches(obj)
    ok = (
        residual <= POVM_TOL
        and report.all_matched
        and abs(report.probability_sum - 1.0) <= 1e-10
    )
    payload = {
        "construction": obj.construction,
        "povm_residual": residual,
        "probability_sum": report.probability_sum,
        "max_branch_residual": report.max_residual,
        "all_matched": report.all_matched,
        "ok": ok,
        "branches": [
            {
                "labels": [list(l) for l in b.labels],
                "probability": b.probability,
                "residual": b.residual,
                "vacuous": b.vacuous,
                "matched": b.matched,
            }
            for b in report.branches
        ],
    }
    lines = [
        f"{args.file}: {'ok' if ok else 'FAILED'}",
        f"  completeness residual: {residual:.3e}",
        f"  probability sum: {report.probability_sum:.12f}",
        f"  worst branch residual: {report.max_residual:.3e}",
        f"  branches: {len(report.branches)}",
    ]
    _emit(args, payload, lines)
    return 0 if ok else 2


def _cmd_symmetry_audit(args: argparse.Namespace) -> int:
    seed = _load_seed_file(args.file).canonical()
    report = symmetry_audit(seed)
    payload = {
        "seed": _seed_json(seed),
        "generic": report.genericity.generic,
        "candidates": report.n_candidates,
        "pairs_screened": report.n_pairs,
        "survivors": [
            {
                "pauli": list(r.pauli) if r.pauli else None,
                "b": r.b_label,
                "c": r.c_label,
                "projection_residual": r.projection_residual,
                "full_residual": r.full_residual,
            }
            for r in report.survivors
        ],
        "surplus": len(report.surplus),
        "max_full_residual": report.max_full_residual,
        "clean": report.clean,
    }
    lines = [
        f"{args.file}: {'clean' if report.clean else 'NOT clean'} "
        f"({len(report.survivors)} survivors, {len(report.surplus)} surplus)",
        f"  worst survivor residual: {report.max_full_residual:.3e}",
    ]
    for r in report.survivors:
        lines.append(f"  survivor {r.pauli}: residual {r.full_residual:.3e}")
    _emit(args, payload, lines)
    return 0 if report.clean else 2


# ---------------------------------------------------------------------------
# Parser assembly
# ---------------------------------------------------------------------------

def _common_flags() -> argparse.ArgumentParser:
    """Global flags, usable before or after the subcommand.

    Every caller gets a fresh parent parser: ``set_defaults`` on the main
    parser rewrites the defaults of its own copies of these actions, and
    sharing one parent would leak that onto the subparsers, whose re-applied
    defaults then clobber values parsed before the subcommand.  Suppressed
    defaults keep the subparsers from touching what they did not parse.
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--tolerance",
        type=float,
        default=argparse.SUPPRESS,
        help="numerical tolerance override",
    )
    common.add_argument(
        "--rng-seed",
        type=int,
        default=argparse.SUPPRESS,
        help="seed for random generation",
    )
    common.add_argument(
        "--oracle",
        action="store_true",
        default=argparse.SUPPRESS,
        help="cross-check decisions with the brute-force oracle",
    )
    common.add_argument(
        "--cyclic-perms-only",
        action="store_true",
        default=argparse.SUPPRESS,
        help="restrict case detection to cyclic party permutations",
    )
    common.add_argument(
        "--json",
        action="store_true",
        default=argparse.SUPPRESS,
        help="machine-readable output",
    )
    return common


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="qutritlocc",
        description=(
            "Decide and synthesize separable and local transformations of "
            "generic three-qutrit states."
        ),
        parents=[_common_flags()],
    )
    parser.set_defaults(
        tolerance=None, rng_seed=0, oracle=False, cyclic_perms_only=False, json=False
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_parser(name: str, help: str):
        return sub.add_parser(name, help=help, parents=[_common_flags()])

    p = add_parser("generate", help="draw a random state of a given kind")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("--out", help="output state file (default: stdout)")
    p.add_argument("--params-from", help="reuse the seed of an existing file")
    p.add_argument("--label", help="free-form label stored in metadata")
    p.set_defaults(func=_cmd_generate)

    p = add_parser("check-generic", help="test seeds against the exclusion list")
    p.add_argument("files", nargs="+")
    p.set_defaults(func=_cmd_check_generic)

    p = add_parser("standard-form", help="gauge-fixed coordinates of states")
    p.add_argument("files", nargs="+")
    p.set_defaults(func=_cmd_standard_form)

    p = add_parser("lu-equiv", help="decide local unitary equivalence")
    p.add_argument("first")
    p.add_argument("second")
    p.set_defaults(func=_cmd_lu_equiv)

    p = add_parser("classify", help="structural classification of states")
    p.add_argument("files", nargs="+")
    p.set_defaults(func=_cmd_classify)

    p = add_parser("sep-decide", help="decide separable convertibility")
    p.add_argument("--from", dest="src", required=True, help="source state file")
    p.add_argument("--to", required=True, help="target state file")
    p.set_defaults(func=_cmd_sep_decide)

    p = add_parser("synth-protocol", help="construct an explicit protocol")
    p.add_argument("--target", required=True, help="target state file")
    p.add_argument("--source", help="source state file (default: synthesize from scratch)")
    p.add_argument("--out", help="output protocol file (default: stdout)")
    p.set_defaults(func=_cmd_synth_protocol)

    p = add_parser("verify-protocol", help="simulate and check a protocol file")
    p.add_argument("file")
    p.set_defaults(func=_cmd_verify_protocol)

    p = add_parser("symmetry-audit", help="exhaustive symmetry search on a seed")
    p.add_argument("file")
    p.set_defaults(func=_cmd_symmetry_audit)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.tolerance is not None:
        if args.tolerance <= 0:
            print("error: --tolerance must be positive", file=sys.stderr)
            return 1
        set_default_tol(args.tolerance)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ProtocolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
