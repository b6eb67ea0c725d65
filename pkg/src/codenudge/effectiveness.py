"""Added and fixed violations between consecutive commits.

Counts are compared, not individual violations: fixing one S109 and adding
another in the same commit nets to zero.
"""

from __future__ import annotations

import csv
import io
from collections import defaultdict
from dataclasses import astuple, dataclass, fields
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional

from .rules import ALL_RULES
from .store import CommitRecord, Store, ViolationRecord

SUMMARY_FILE = "summary.csv"
DELTAS_FILE = "deltas.csv"
SERIES_FILE = "series.csv"


@dataclass(frozen=True)
class DeltaRow:
    user: str
    assignment: str
    rule: str
    from_commit: str
    to_commit: str
    prev_count: int
    curr_count: int
    added: int
    fixed: int
    timestamp: int


def delta(prev: int, curr: int) -> tuple[int, int]:
    return max(0, curr - prev), max(0, prev - curr)


def compute_deltas_from(
    commits: Iterable[CommitRecord],
    violations: Iterable[ViolationRecord],
    assignment: Optional[str] = None,
) -> list[DeltaRow]:
    """One row per adjacent commit pair for every (user, assignment, rule) seen at least once."""
    timeline: dict[tuple[str, str], dict[str, int]] = defaultdict(dict)
    for c in commits:
        if assignment is None or c.assignment == assignment:
            timeline[(c.user, c.assignment)][c.commit] = c.timestamp
    counts: dict[tuple[str, str, str], int] = defaultdict(int)
    rules: dict[tuple[str, str], set[str]] = defaultdict(set)
    seen: set[tuple] = set()
    for v in violations:
        if (assignment is not None and v.assignment != assignment) or v.key in seen:
            continue
        seen.add(v.key)
        group = (v.user, v.assignment)
        timeline[group].setdefault(v.commit, v.timestamp)
        counts[(v.user, v.assignment, v.commit, v.rule)] += 1
        rules[group].add(v.rule)

    rows: list[DeltaRow] = []
    for (user, task), stamps in sorted(timeline.items()):
        ordered = sorted(stamps, key=lambda h: (stamps[h], h))
        for rule in sorted(rules[(user, task)]):
            for prev, curr in zip(ordered, ordered[1:]):
                a = counts.get((user, task, prev, rule), 0)
                b = counts.get((user, task, curr, rule), 0)
                added, fixed = delta(a, b)
                rows.append(DeltaRow(user, task, rule, prev, curr, a, b, added, fixed, stamps[curr]))
    return rows


def compute_deltas(store: Store, assignment: Optional[str] = None) -> list[DeltaRow]:
    return compute_deltas_from(store.commits(), store.violations(), assignment)


def summarize(rows: Iterable[DeltaRow]) -> dict[str, tuple[int, int]]:
    """Per-rule (added, fixed) totals; every rule is present."""
    totals = {rule: [0, 0] for rule in sorted(ALL_RULES)}
    for row in rows:
        totals[row.rule][0] += row.added
        totals[row.rule][1] += row.fixed
    return {rule: (a, f) for rule, (a, f) in totals.items()}


def _day(ts: int) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%d")


def series(rows: Iterable[DeltaRow]) -> list[tuple[str, str, int, int]]:
    """(day, rule, added, fixed) bucketed by the UTC day of the later commit."""
    buckets: dict[tuple[str, str], list[int]] = defaultdict(lambda: [0, 0])
    for row in rows:
        b = buckets[(_day(row.timestamp), row.rule)]
        b[0] += row.added
        b[1] += row.fixed
    return [(day, rule, a, f) for (day, rule), (a, f) in sorted(buckets.items())]


def _csv(header: Iterable[str], rows: Iterable[Iterable]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def emit_report(totals: dict[str, tuple[int, int]], deltas: list[DeltaRow], out_dir: str | Path) -> list[Path]:
    """Write summary, delta and daily-series CSV files.

    Only rules with at least one delta row appear in the summary, so an
    empty store gives header-only files.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    present = {row.rule for row in deltas}
    ordered = sorted(deltas, key=lambda r: (r.user, r.assignment, r.rule, r.timestamp, r.to_commit))
    contents = {
        SUMMARY_FILE: _csv(("rule", "added", "fixed"), ((r, *totals[r]) for r in sorted(totals) if r in present)),
        DELTAS_FILE: _csv((f.name for f in fields(DeltaRow)), (astuple(r) for r in ordered)),
        SERIES_FILE: _csv(("day", "rule", "added", "fixed"), series(deltas)),
    }
    written = []
    for name, text in contents.items():
        path = out / name
        path.write_bytes(text.encode("utf-8"))
        written.append(path)
    return written


def report(store: Store, out_dir: str | Path, assignment: Optional[str] = None) -> list[Path]:
    rows = compute_deltas(store, assignment)
    return emit_report(summarize(rows), rows, out_dir)
