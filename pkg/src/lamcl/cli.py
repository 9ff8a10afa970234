"""Command line entry point: `lamcl check|reduce|enumerate|verify|corpus`."""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Sequence

from . import formula as F
from .normalize import (
    DEFAULT_STEP_BUDGET, BudgetError, InvariantError, StrategyError, budget_from_env,
    normalize_traced, reduce_simple,
)
from .reduction import enumerate_normal_forms
from .syntax import ParseError, SourceFile, parse_source, show
from .term import alpha_eq
from .trace import write_trace
from .typecheck import TypingError, typecheck
from .verify import verify_normal_form

# reason code -> exit status; argparse itself exits with 2 on usage errors
EXIT_CODES = {
    "E_PARSE": 10,
    "E_TYPE": 11,
    "E_BUDGET": 12,
    "E_EXPECT": 13,
    "E_VERIFY": 14,
    "E_INVARIANT": 15,
    "E_IO": 16,
}


class CliError(Exception):
    def __init__(self, code: str, msg: str):
        super().__init__(msg)
        self.code = code


def load(path: str) -> SourceFile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise CliError("E_IO", str(e)) from None
    try:
        src = parse_source(text, name=path)
    except ParseError as e:
        raise CliError("E_PARSE", f"{path}:{e.line}:{e.col}: {e.msg}") from None
    try:
        ty = typecheck(src.ctx, src.term, src.extension)
        if src.expect is not None:
            expected = typecheck(src.ctx, src.expect, src.extension)
            if expected != ty:
                raise CliError("E_TYPE", f"{path}: expect clause has type {F.show(expected)}, "
                                         f"term has type {F.show(ty)}")
    except TypingError as e:
        raise CliError("E_TYPE", f"{path}: {e}") from None
    return src


def run_reduction(src: SourceFile, strategy: str = "master", seed: int | None = None,
                  max_steps: int | None = None):
    budget = max_steps if max_steps is not None else budget_from_env(DEFAULT_STEP_BUDGET)
    try:
        if strategy == "master":
            return normalize_traced(src.ctx, src.term, step_budget=budget)
        return reduce_simple(src.ctx, src.term, strategy, seed, budget)
    except BudgetError as e:
        raise CliError("E_BUDGET", f"{src.name}: {e}") from None
    except (InvariantError, StrategyError) as e:
        raise CliError("E_INVARIANT", f"{src.name}: {e}") from None


# -- commands ----------------------------------------------------------------------

def cmd_check(args) -> int:
    src = load(args.file)
    print(F.show(typecheck(src.ctx, src.term, src.extension)))
    return 0


def cmd_reduce(args) -> int:
    src = load(args.file)
    result = run_reduction(src, args.strategy, args.seed, args.max_steps)
    if args.trace:
        try:
            write_trace(result.trace, args.trace)
        except OSError as e:
            raise CliError("E_IO", str(e)) from None
    print(show(result.term))
    print(f"steps: {len(result.trace)}", file=sys.stderr)
    return 0


def cmd_enumerate(args) -> int:
    src = load(args.file)
    found = enumerate_normal_forms(src.ctx, src.term, args.depth, args.limit)
    for text in sorted(show(t) for t in found.normal_forms):
        print(text)
    print(f"normal forms: {len(found.normal_forms)}, terms visited: {found.visited}"
          + (", search truncated" if found.truncated else ""), file=sys.stderr)
    return 0


def cmd_verify(args) -> int:
    src = load(args.file)
    result = run_reduction(src)
    report = verify_normal_form(src.ctx, result.term, subject=src.name)
    if args.json:
        print(json.dumps({"subject": report.subject, "ok": report.ok, "checks": report.as_records()}, indent=2))
    else:
        for c in report.checks:
            where = f" at {list(c.path)}" if c.path is not None else ""
            what = f" [{F.show(c.formula)}]" if c.formula is not None else ""
            print(f"{'pass' if c.ok else 'FAIL'} {c.name}{where}{what} {c.detail}".rstrip())
    if not report.ok:
        raise CliError("E_VERIFY", f"{src.name}: {len(report.failures)} failed check(s)")
    return 0


def run_corpus_file(path: Path) -> tuple[str, str]:
    """(status, message) for one corpus file; status is "ok" or a reason code."""
    try:
        src = load(str(path))
        result = run_reduction(src)
        report = verify_normal_form(src.ctx, result.term, subject=src.name)
        if not report.ok:
            first = report.failures[0]
            return "E_VERIFY", f"{first.name} failed at {list(first.path or ())}"
        if src.expect is not None and not alpha_eq(result.term, src.expect):
            return "E_EXPECT", f"got {show(result.term)}, expected {show(src.expect)}"
        return "ok", f"{len(result.trace)} steps: {show(result.term)}"
    except CliError as e:
        return e.code, str(e)


def cmd_corpus(args) -> int:
    files = sorted(Path(args.dir).glob("*.lamcl"))
    if not files:
        raise CliError("E_IO", f"no .lamcl files in {args.dir}")
    worst = None
    for path in files:
        t0 = time.perf_counter()
        status, msg = run_corpus_file(path)
        print(f"{status:<11} {path.name} ({time.perf_counter() - t0:.2f}s) {msg}")
        if status != "ok" and worst is None:
            worst = status
    if worst:
        raise CliError(worst, "corpus has failures")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lamcl", description="Classical proof terms with parallel communication.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="print the type of a source file's term")
    p.add_argument("file")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("reduce", help="reduce a term and print the result")
    p.add_argument("file")
    p.add_argument("--strategy", choices=("master", "leftmost", "random"), default="master")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--trace", metavar="PATH")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("enumerate", help="print every normal form reachable by any redex choice")
    p.add_argument("file")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--limit", type=int, default=100_000, help="maximum number of distinct terms visited")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("verify", help="normalize and check the normal form")
    p.add_argument("file")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("corpus", help="run every .lamcl file in a directory against its expect clause")
    p.add_argument("dir")
    p.set_defaults(func=cmd_corpus)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(f"lamcl: {e.code}: {e}", file=sys.stderr)
        return EXIT_CODES[e.code]


if __name__ == "__main__":
    sys.exit(main())
