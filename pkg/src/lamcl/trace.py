"""JSON-lines trace files: writing, reading and replaying reduction traces."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path as FilePath
from typing import IO, Iterable, Mapping

from .formula import Formula
from .normalize import AComplexity, MasterMeasure, TraceEvent
from .reduction import redex_at, step
from .syntax import parse_term, show
from .term import Term, alpha_eq

KEYS = ("step", "rule", "path", "sender", "child", "measure", "complexity", "term_after")


@dataclass(frozen=True)
class TraceRecord:
    step: int
    rule: str
    path: list[int]
    sender: list[int] | None
    child: int | None
    measure: list[int] | None
    complexity: list[int] | None
    term_after: str


def to_record(e: TraceEvent) -> TraceRecord:
    return TraceRecord(
        step=e.step,
        rule=str(e.rule),
        path=list(e.path),
        sender=list(e.sender) if e.sender is not None else None,
        child=e.child,
        measure=e.measure.as_list() if isinstance(e.measure, MasterMeasure) else None,
        complexity=e.complexity.as_list() if isinstance(e.complexity, AComplexity) else None,
        term_after=show(e.term_after),
    )


def dumps(record: TraceRecord) -> str:
    return json.dumps({k: getattr(record, k) for k in KEYS}, separators=(",", ":"), ensure_ascii=False)


def write_trace(events: Iterable[TraceEvent | TraceRecord], out: str | FilePath | IO[str]) -> int:
    """Write one JSON object per line, keys in a fixed order; returns the record count."""
    lines = [dumps(e if isinstance(e, TraceRecord) else to_record(e)) for e in events]
    text = "".join(line + "\n" for line in lines)
    if hasattr(out, "write"):
        out.write(text)
    else:
        FilePath(out).write_text(text, encoding="utf-8")
    return len(lines)


def read_trace(src: str | FilePath | IO[str]) -> list[TraceRecord]:
    text = src.read() if hasattr(src, "read") else FilePath(src).read_text(encoding="utf-8")
    records = []
    for n, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            records.append(TraceRecord(**{k: obj[k] for k in KEYS}))
        except (json.JSONDecodeError, KeyError, TypeError) as e:
            raise ValueError(f"trace line {n}: {e}") from None
    return records


class ReplayError(AssertionError):
    pass


def replay(ctx: Mapping[str, Formula], start: Term, records: Iterable[TraceRecord]) -> Term:
    """Re-apply every (rule, path) and check the result against term_after."""
    t = start
    for rec in records:
        r = redex_at(ctx, t, tuple(rec.path), rec.rule, rec.sender, rec.child)
        t = step(ctx, t, r)
        expected = parse_term(rec.term_after)
        if not alpha_eq(t, expected):
            raise ReplayError(f"step {rec.step} ({rec.rule} at {rec.path}): got {show(t)}, "
                              f"trace says {rec.term_after}")
    return t
