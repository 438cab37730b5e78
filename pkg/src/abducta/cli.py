"""Command line front end.

Exit codes of ``check`` and ``check-log``: 0 strong, 1 conditional,
2 non-compliant, 3 unknown (search budget exhausted), 64 usage or input
error. ``check-log`` exits with the worst code over its traces.
``log-completeness`` exits 0 for a complete log and 1 otherwise.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .bench import BenchConfig, rows_to_csv, run_bench, trend_violations, unknown_rows
from .conformance import (
    IncompleteTraceInLog,
    Verdict,
    VerdictKind,
    check_log,
    check_log_completeness,
    classify,
)
from .engine import Mode, SearchOptions, default_node_budget
from .ic import compile_model, dump
from .log import EventLog, ParseError, Trace, parse_log, parse_trace
from .model import (
    CapExceeded,
    ModelFormatError,
    ProcessModel,
    enumerate_runs,
    max_single_length,
    parse_model,
    validate,
)

EXIT_USAGE = 64


class UsageError(Exception):
    """Bad arguments or unreadable input; reported with exit code 64."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with 2, a verdict code here
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# -- input ------------------------------------------------------------------------

def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None


def load_model(path: str) -> ProcessModel:
    try:
        model = parse_model(_read(path))
    except ModelFormatError as exc:
        raise UsageError(f"{path}: {exc}") from None
    problems = validate(model)
    if problems:
        raise UsageError(f"{path}: invalid model: " + "; ".join(problems))
    return model


def load_trace(path: str) -> Trace:
    try:
        return parse_trace(_read(path))
    except ParseError as exc:
        raise UsageError(f"{path}: {exc}") from None


def load_log(path: str) -> EventLog:
    try:
        return parse_log(_read(path))
    except ParseError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _options(args, model: ProcessModel, longest_trace: int) -> SearchOptions:
    tml = args.tml
    if tml is None:
        tml = max(longest_trace, max_single_length(model.root))
    if tml < 1:
        raise UsageError("--tml must be positive")
    budget = args.max_nodes if args.max_nodes is not None else default_node_budget()
    return SearchOptions(tml, Mode(args.mode), max_nodes=budget)


# -- reports ------------------------------------------------------------------------

def format_verdict(verdict: Verdict, limit: int | None = None) -> str:
    lines = [
        f"verdict: {verdict.kind.value}"
        + (" (provisional: strength needs --mode all)" if verdict.provisional else "")
    ]
    lines.append(
        f"solutions: {verdict.solutions}  nodes: {verdict.nodes}  elapsed: {verdict.elapsed:.4f}s"
    )
    if verdict.reason:
        lines.append(f"reason: {verdict.reason}")
    shown = verdict.explanations if limit is None else verdict.explanations[:limit]
    for n, expl in enumerate(shown, start=1):
        witness = expl.witness()
        lines.append(f"explanation {n}: {' '.join(expl.run)}")
        for i, p in enumerate(expl.positions):
            if p.event is not None:
                lines.append(f"  [{i}] {p.activity:<6} matched {p.event} at t={witness[i]}")
            else:
                lo, hi = expl.time_range(i)
                span = f"{lo}..{hi}" if hi is not None else f">={lo}"
                rel = ", ".join(expl.relations(i))
                lines.append(
                    f"  [{i}] {p.activity:<6} abduced at t={witness[i]} (range {span}; {rel})"
                )
    hidden = len(verdict.explanations) - len(shown)
    if hidden > 0:
        lines.append(f"... {hidden} more (use --limit or --json)")
    return "\n".join(lines)


def _emit_json(data) -> None:
    json.dump(data, sys.stdout, indent=2)
    sys.stdout.write("\n")


# -- commands ---------------------------------------------------------------------

def cmd_check(args) -> int:
    model = load_model(args.model)
    trace = load_trace(args.trace)
    verdict = classify(model, trace, _options(args, model, len(trace)))
    if args.json:
        _emit_json(verdict.to_dict())
    else:
        print(format_verdict(verdict, args.limit))
    return verdict.kind.exit_code


def cmd_check_log(args) -> int:
    model = load_model(args.model)
    log = load_log(args.log)
    longest = max((len(t) for t in log.traces), default=0)
    verdicts = check_log(model, log, _options(args, model, longest), jobs=args.jobs)
    if args.json:
        _emit_json({"verdicts": [v.to_dict() for v in verdicts]})
    else:
        for i, v in enumerate(verdicts):
            print(f"# trace {i}")
            print(format_verdict(v, args.limit))
    if not verdicts:
        return 0
    return max(v.kind.exit_code for v in verdicts)


def cmd_log_completeness(args) -> int:
    model = load_model(args.model)
    log = load_log(args.log)
    tml = args.tml if args.tml is not None else max_single_length(model.root)
    try:
        report = check_log_completeness(model, log, tml)
    except IncompleteTraceInLog as exc:
        raise UsageError(str(exc)) from None
    if args.json:
        _emit_json(report.to_dict())
    else:
        print("complete" if report.complete else "incomplete")
        for run in report.missing_runs:
            print("missing: " + " ".join(run))
    return 0 if report.complete else 1


def cmd_compile(args) -> int:
    model = load_model(args.model)
    sys.stdout.write(dump(compile_model(model)))
    return 0


def cmd_runs(args) -> int:
    model = load_model(args.model)
    runs = sorted(enumerate_runs(model, args.tml))
    if args.json:
        _emit_json([list(r) for r in runs])
    else:
        for r in runs:
            print(" ".join(r))
    return 0


def cmd_bench(args) -> int:
    config = BenchConfig(
        seed=args.seed,
        n_activities=args.activities,
        pct_aoa=args.pct_aoa,
        num_observed=args.observed,
        tml=args.tml,
        modes=args.modes,
        repetitions=args.repetitions,
        wildcards=args.wildcards,
        max_nodes=args.max_nodes,
    )
    problems = config.problems()
    if problems:
        raise UsageError("; ".join(problems))
    rows = run_bench(config)
    table = rows_to_csv(rows)
    if args.out:
        from .plots import render_all  # matplotlib is only needed here

        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "bench.csv").write_text(table, encoding="utf-8")
        for path in [out / "bench.csv", *render_all(rows, out)]:
            print(path)
    else:
        sys.stdout.write(table)
    for line in trend_violations(rows):
        print(f"trend: {line}", file=sys.stderr)
    stuck = unknown_rows(rows)
    if stuck:
        print(f"{len(stuck)} rows ran out of search budget", file=sys.stderr)
    return 0


# -- parser -----------------------------------------------------------------------

def _search_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tml", type=int, help="trace max length (default: longest loop-free run)")
    p.add_argument("--mode", choices=[m.value for m in Mode], default="all")
    p.add_argument("--max-nodes", type=int, help="search node budget (env ABDUCTA_BUDGET_NODES)")
    p.add_argument("--json", action="store_true", help="machine-readable report")
    p.add_argument("--limit", type=int, default=10, help="explanations shown in text mode")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="abducta", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("check", help="classify one trace")
    p.add_argument("model")
    p.add_argument("trace")
    _search_flags(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("check-log", help="classify every trace of a log")
    p.add_argument("model")
    p.add_argument("log")
    _search_flags(p)
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.set_defaults(func=cmd_check_log)

    p = sub.add_parser("log-completeness", help="does the log cover every run?")
    p.add_argument("model")
    p.add_argument("log")
    p.add_argument("--tml", type=int)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_log_completeness)

    p = sub.add_parser("compile", help="print the integrity constraints of a model")
    p.add_argument("model")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("runs", help="list the runs of a model")
    p.add_argument("model")
    p.add_argument("--tml", type=int, required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_runs)

    p = sub.add_parser("bench", help="synthetic benchmark; CSV plus figures with --out")
    defaults = BenchConfig()
    p.add_argument("--seed", type=int, default=defaults.seed)
    p.add_argument("--activities", type=int, default=defaults.n_activities)
    p.add_argument("--pct-aoa", type=int, nargs="+", default=defaults.pct_aoa)
    p.add_argument("--observed", type=int, nargs="+", default=defaults.num_observed)
    p.add_argument("--tml", type=int, nargs="+", default=defaults.tml)
    p.add_argument("--modes", nargs="+", choices=["all", "first"], default=defaults.modes)
    p.add_argument("--repetitions", type=int, default=defaults.repetitions)
    p.add_argument("--wildcards", type=int, default=defaults.wildcards)
    p.add_argument("--max-nodes", type=int)
    p.add_argument("--out", help="directory for bench.csv and PNG figures")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help, --version and usage errors
        return exc.code if isinstance(exc.code, int) else 0
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"abducta: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapExceeded as exc:
        print(f"abducta: {exc}", file=sys.stderr)
        return VerdictKind.UNKNOWN.exit_code
    except ValueError as exc:
        print(f"abducta: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
