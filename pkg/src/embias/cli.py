"""Command line front end.

Four subcommands: `weat` (word-level association audit), `seat`
(sentence-level audit via templates), `subspace` (identify bias directions
and write them as an embedding file), `debias` (transform a table and
report before/after effects).

Exit codes: 0 success, 1 computation failed, 2 input data could not be
loaded or resolved, 64 usage error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from ._data import data_root
from .debias import apply_plan, evaluate_before_after, load_plan
from .embeddings import load_embeddings, write_embeddings
from .lexicon import builtin_suites, load_suite, resolve, translated_suite, with_devanagari
from .report import (
    audit_doc,
    audit_markdown,
    canonical_json,
    comparison_doc,
    comparison_markdown,
    run_config,
)
from .seat import builtin_templates, collect_sentences, ingest_precomputed, load_templates, resolve_seat, write_sentences
from .subspace import direction_from_spec, directions_table
from .weat import PermutationPlan, run_tests

USAGE_EXIT = 64


class _Parser(argparse.ArgumentParser):
    """argparse's default usage-error exit code is 2; this tool reserves 2
    for data errors, so usage problems exit 64 instead."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def _fail(code: int, exc: BaseException) -> int:
    print(f"error: {exc}", file=sys.stderr)
    return code


def _print_warnings(warnings) -> None:
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)


def _load_suite_arg(value: str):
    if value == "builtin":
        return list(builtin_suites())
    if value == "builtin-translated":
        return list(translated_suite())
    return list(load_suite(value))


def _load_templates_arg(value: str):
    if value == "builtin":
        return builtin_templates()
    return load_templates(value)


def _resolve_plan_arg(value: str) -> Path:
    p = Path(value)
    if p.exists():
        return p
    if "/" not in value and not value.endswith(".json"):
        bundled = Path(str(data_root())) / "debias" / f"{value}.json"
        if bundled.exists():
            return bundled
    raise FileNotFoundError(f"debias plan not found: {value!r}")


def _emit(payload: bytes, out: str) -> None:
    if out == "-":
        sys.stdout.buffer.write(payload)
        sys.stdout.buffer.flush()
    else:
        Path(out).write_bytes(payload)


def _permutation_plan(args) -> PermutationPlan:
    mode = None if args.mode == "auto" else args.mode
    return PermutationPlan(
        mode=mode,
        sample_count=args.permutations,
        seed=args.seed,
        exact_threshold=args.exact_threshold,
    )


def _audit_config(args) -> dict:
    return run_config(
        embeddings=args.embeddings or "",
        suite=args.suite,
        oov_policy=args.oov,
        normalize=args.normalize,
        seed=args.seed,
        sample_count=args.permutations,
        exact_threshold=args.exact_threshold,
        mode=None if args.mode == "auto" else args.mode,
        stddev_convention=args.stddev,
        tie_policy=args.tie_policy,
        extra={"devanagari": args.devanagari},
    )


def _add_measure_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument(
        "--suite",
        default="builtin",
        metavar="SUITE",
        help="'builtin', 'builtin-translated', or a path to a suite JSON "
        "(default: builtin)",
    )
    sp.add_argument(
        "--oov",
        choices=("drop", "strict"),
        default="drop",
        help="out-of-vocabulary policy (default: drop)",
    )
    sp.add_argument(
        "--normalize",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="unit-scale vectors at load time (default: on)",
    )
    sp.add_argument("--seed", type=int, default=0, help="base RNG seed (default: 0)")
    sp.add_argument(
        "--permutations",
        type=int,
        default=10000,
        metavar="N",
        help="sample size when sampling splits (default: 10000)",
    )
    sp.add_argument(
        "--exact-threshold",
        type=int,
        default=20000,
        metavar="N",
        help="enumerate splits exactly when their count is at most N "
        "(default: 20000)",
    )
    sp.add_argument(
        "--mode",
        choices=("auto", "exact", "sampled"),
        default="auto",
        help="force the significance mode (default: auto)",
    )
    sp.add_argument(
        "--stddev",
        choices=("population", "sample"),
        default="population",
        help="effect size denominator convention (default: population)",
    )
    sp.add_argument(
        "--tie-policy",
        choices=("strict", "inclusive"),
        default="strict",
        help="count splits strictly greater than the observed statistic, or "
        "ties as well (default: strict)",
    )
    sp.add_argument(
        "--jobs",
        type=int,
        default=1,
        metavar="N",
        help="worker threads across tests; never changes the numbers "
        "(default: 1)",
    )
    sp.add_argument(
        "--devanagari",
        action="store_true",
        help="measure the Devanagari forms carried by the suite, if any",
    )


def _add_output_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument(
        "--out", default="-", metavar="PATH", help="report destination (default: stdout)"
    )
    sp.add_argument(
        "--format",
        choices=("json", "md"),
        default="json",
        help="report format (default: json)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="embias",
        description="Measure and remove social association biases in word "
        "embeddings.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    w = sub.add_parser(
        "weat",
        help="word-level association audit",
        description="Run word-level association tests against an embedding "
        "file and write a report.",
    )
    w.add_argument("--embeddings", required=True, metavar="PATH")
    _add_measure_flags(w)
    _add_output_flags(w)

    s = sub.add_parser(
        "seat",
        help="sentence-level association audit",
        description="Expand each test's words into template sentences, embed "
        "the sentences, and run the association tests on those.",
    )
    s.add_argument("--embeddings", metavar="PATH")
    s.add_argument(
        "--templates",
        default="builtin",
        metavar="SET",
        help="'builtin' or a path to a template set JSON (default: builtin)",
    )
    s.add_argument(
        "--expand-attributes",
        choices=("true", "false"),
        default="true",
        help="expand attribute lists into sentences too, or keep them as "
        "words (default: true)",
    )
    s.add_argument(
        "--precomputed",
        metavar="PATH",
        help="sentence vectors (sentence TAB v1 v2 ...) from an external "
        "encoder; replaces --embeddings",
    )
    s.add_argument(
        "--emit-sentences",
        metavar="PATH",
        help="write the sentences the suite needs, one per line, and exit",
    )
    _add_measure_flags(s)
    _add_output_flags(s)

    d = sub.add_parser(
        "subspace",
        help="identify bias directions",
        description="Compute one or more bias directions from a spec file and "
        "write them in embedding format.",
    )
    d.add_argument("--embeddings", required=True, metavar="PATH")
    d.add_argument(
        "--spec",
        required=True,
        metavar="PATH",
        help="direction spec JSON: one spec object or {\"directions\": [...]}",
    )
    d.add_argument(
        "--normalize",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="unit-scale vectors at load time (default: on)",
    )
    d.add_argument(
        "--out",
        default="-",
        metavar="PATH",
        help="directions file destination (default: stdout)",
    )

    b = sub.add_parser(
        "debias",
        help="transform a table and compare before/after",
        description="Apply a debiasing plan, write the transformed embedding "
        "file, then measure every suite test against the original and the "
        "written artifact.",
    )
    b.add_argument("--embeddings", required=True, metavar="PATH")
    b.add_argument(
        "--plan",
        required=True,
        metavar="PLAN",
        help="path to a plan JSON, or the name of a bundled plan",
    )
    b.add_argument(
        "--artifact",
        required=True,
        metavar="PATH",
        help="where to write the transformed embedding file",
    )
    _add_measure_flags(b)
    b.add_argument(
        "--report", default="-", metavar="PATH", help="report destination (default: stdout)"
    )
    b.add_argument(
        "--format",
        choices=("json", "md"),
        default="json",
        help="report format (default: json)",
    )

    return parser


def cmd_weat(args) -> int:
    try:
        table = load_embeddings(args.embeddings, normalize=args.normalize)
        tests = _load_suite_arg(args.suite)
        if args.devanagari:
            tests = [with_devanagari(t) for t in tests]
        resolved = [resolve(t, table, policy=args.oov) for t in tests]
    except (OSError, ValueError) as exc:
        return _fail(2, exc)
    _print_warnings(table.warnings)
    try:
        plan = _permutation_plan(args)
        results = run_tests(
            resolved,
            plan,
            stddev_convention=args.stddev,
            tie_policy=args.tie_policy,
            jobs=args.jobs,
        )
        doc = audit_doc(resolved, results, _audit_config(args))
        payload = (
            canonical_json(doc)
            if args.format == "json"
            else audit_markdown(doc).encode("utf-8")
        )
    except (ValueError, RuntimeError, ArithmeticError) as exc:
        return _fail(1, exc)
    try:
        _emit(payload, args.out)
    except OSError as exc:
        return _fail(2, exc)
    return 0


def cmd_seat(args) -> int:
    expand_attributes = args.expand_attributes == "true"
    if args.emit_sentences is not None:
        try:
            tests = _load_suite_arg(args.suite)
            if args.devanagari:
                tests = [with_devanagari(t) for t in tests]
            templates = _load_templates_arg(args.templates)
            sentences = collect_sentences(
                tests, templates, expand_attributes=expand_attributes
            )
            if args.emit_sentences == "-":
                write_sentences(sentences, sys.stdout)
            else:
                write_sentences(sentences, args.emit_sentences)
        except (OSError, ValueError) as exc:
            return _fail(2, exc)
        return 0

    if bool(args.precomputed) == bool(args.embeddings):
        print(
            "embias seat: error: exactly one of --embeddings or --precomputed "
            "is required",
            file=sys.stderr,
        )
        return USAGE_EXIT

    try:
        tests = _load_suite_arg(args.suite)
        if args.devanagari:
            tests = [with_devanagari(t) for t in tests]
        templates = _load_templates_arg(args.templates)
        if args.precomputed:
            vectors = ingest_precomputed(args.precomputed)
        else:
            vectors = load_embeddings(args.embeddings, normalize=args.normalize)
        bound = [
            resolve_seat(
                t,
                vectors,
                templates,
                expand_attributes=expand_attributes,
                policy=args.oov,
            )
            for t in tests
        ]
    except (OSError, ValueError) as exc:
        return _fail(2, exc)
    if not args.precomputed:
        _print_warnings(vectors.warnings)
    try:
        plan = _permutation_plan(args)
        resolved = [r for r, _ in bound]
        results = run_tests(
            resolved,
            plan,
            stddev_convention=args.stddev,
            tie_policy=args.tie_policy,
            jobs=args.jobs,
        )
        results = [
            replace(res, composition_oov=skipped)
            for res, (_, skipped) in zip(results, bound)
        ]
        config = _audit_config(args)
        if args.precomputed:
            config["embeddings"] = args.precomputed
        doc = audit_doc(resolved, results, config)
        payload = (
            canonical_json(doc)
            if args.format == "json"
            else audit_markdown(doc).encode("utf-8")
        )
    except (ValueError, RuntimeError, ArithmeticError) as exc:
        return _fail(1, exc)
    try:
        _emit(payload, args.out)
    except OSError as exc:
        return _fail(2, exc)
    return 0


def cmd_subspace(args) -> int:
    import json as _json

    try:
        table = load_embeddings(args.embeddings, normalize=args.normalize)
        spec_doc = _json.loads(Path(args.spec).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        return _fail(2, exc)
    _print_warnings(table.warnings)
    if isinstance(spec_doc, dict) and "directions" in spec_doc:
        specs = spec_doc["directions"]
        if not isinstance(specs, list) or not specs:
            return _fail(2, ValueError("spec: 'directions' must be a non-empty list"))
    elif isinstance(spec_doc, dict):
        specs = [spec_doc]
    else:
        return _fail(2, ValueError("spec must be a JSON object"))
    try:
        directions = [direction_from_spec(table, s) for s in specs]
        out_table = directions_table(directions)
    except (ValueError, RuntimeError, ArithmeticError) as exc:
        return _fail(1, exc)
    try:
        if args.out == "-":
            write_embeddings(out_table, sys.stdout)
        else:
            write_embeddings(out_table, args.out)
    except OSError as exc:
        return _fail(2, exc)
    # pairwise overlaps help spot directions that measure the same thing;
    # keep them off stdout when the artifact itself goes there
    dest = sys.stderr if args.out == "-" else sys.stdout
    for i in range(len(directions)):
        for j in range(i + 1, len(directions)):
            a, b = directions[i], directions[j]
            dot = float(a.vector @ b.vector)
            print(f"dot({a.label}, {b.label}) = {dot:.6f}", file=dest)
    return 0


def cmd_debias(args) -> int:
    if args.artifact == "-":
        print(
            "embias debias: error: --artifact needs a filesystem path (the "
            "after side of the report is measured from the written file)",
            file=sys.stderr,
        )
        return USAGE_EXIT
    try:
        table = load_embeddings(args.embeddings, normalize=args.normalize)
        plan_path = _resolve_plan_arg(args.plan)
        plan = load_plan(plan_path)
        tests = _load_suite_arg(args.suite)
        if args.devanagari:
            tests = [with_devanagari(t) for t in tests]
    except (OSError, ValueError) as exc:
        return _fail(2, exc)
    _print_warnings(table.warnings)
    try:
        debiased, _direction = apply_plan(table, plan)
    except (ValueError, RuntimeError, ArithmeticError) as exc:
        return _fail(1, exc)
    _print_warnings(debiased.warnings[len(table.warnings):])
    try:
        write_embeddings(debiased, args.artifact)
        after = load_embeddings(args.artifact, normalize=False)
    except (OSError, ValueError) as exc:
        return _fail(2, exc)
    try:
        pplan = _permutation_plan(args)
        rows = evaluate_before_after(
            table,
            after,
            tests,
            pplan,
            policy=args.oov,
            stddev_convention=args.stddev,
            tie_policy=args.tie_policy,
            jobs=args.jobs,
        )
        config = _audit_config(args)
        config["plan"] = args.plan
        config["artifact"] = args.artifact
        doc = comparison_doc(rows, config)
        payload = (
            canonical_json(doc)
            if args.format == "json"
            else comparison_markdown(doc).encode("utf-8")
        )
    except (ValueError, RuntimeError, ArithmeticError) as exc:
        return _fail(1, exc)
    try:
        _emit(payload, args.report)
    except OSError as exc:
        return _fail(2, exc)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "weat":
        return cmd_weat(args)
    if args.command == "seat":
        return cmd_seat(args)
    if args.command == "subspace":
        return cmd_subspace(args)
    if args.command == "debias":
        return cmd_debias(args)
    parser.error(f"unknown command {args.command!r}")
    return USAGE_EXIT


if __name__ == "__main__":
    sys.exit(main())
