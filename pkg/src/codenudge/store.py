"""Append-only record store for analyzed violations and executed commands.

Each record type lives in its own newline-delimited file.  A line is one flat
JSON object whose first field is the schema version tag ``v`` followed by
the record fields in a fixed order, so the files stay greppable::

    {"v": 1, "user": "alice", "assignment": "task-3", "rule": "S109", ...}

Appends are written with a single ``write`` on an ``O_APPEND`` descriptor and
fsynced before returning.  A crash can therefore only leave a torn final
line, which is dropped (and truncated away when opened for writing).
"""

from __future__ import annotations

import json
import logging
import os
import threading
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import ClassVar, Generic, Iterable, Optional, Type, TypeVar

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

VIOLATIONS_FILE = "violations.jsonl"
COMMANDS_FILE = "commands.jsonl"
COMMITS_FILE = "commits.jsonl"


@dataclass(frozen=True)
class ViolationRecord:
    user: str
    assignment: str
    rule: str
    file: str
    line: int
    commit: str
    timestamp: int

    @property
    def key(self) -> tuple:
        return (self.user, self.assignment, self.rule, self.file, self.line, self.commit)


@dataclass(frozen=True)
class CommitRecord:
    """Marks a commit as analyzed, so clean commits count as zero later on."""

    user: str
    assignment: str
    commit: str
    timestamp: int
    repo: str = ""

    @property
    def key(self) -> tuple:
        return (self.repo, self.commit)


@dataclass(frozen=True)
class CommandRecord:
    user: str
    timestamp: int
    task: str
    kind: str
    arg: str = ""
    repo: str = ""
    comment_id: int = 0

    @property
    def key(self) -> tuple:
        if self.comment_id:
            return (self.repo, self.comment_id)
        return (self.user, self.timestamp, self.task, self.kind, self.arg)


R = TypeVar("R", ViolationRecord, CommitRecord, CommandRecord)


class RecordLog(Generic[R]):
    """One newline-delimited file of records of a single type, deduplicated by key."""

    def __init__(self, path: Path, record_type: Type[R], readonly: bool = False):
        self.path = path
        self.record_type = record_type
        self.readonly = readonly
        self.records: list[R] = []
        self.keys: set[tuple] = set()
        self._field_names = [f.name for f in fields(record_type)]
        self._load()

    def _load(self) -> None:
        if not self.path.exists():
            if not self.readonly:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                self.path.touch()
            return
        data = self.path.read_bytes()
        end = data.rfind(b"\n") + 1
        if end < len(data):
            logger.warning("%s: dropping torn trailing record (%d bytes)", self.path, len(data) - end)
            if not self.readonly:
                with self.path.open("r+b") as fh:
                    fh.truncate(end)
                    os.fsync(fh.fileno())
        for lineno, raw in enumerate(data[:end].splitlines(), start=1):
            if not raw.strip():
                continue
            try:
                record = self._decode(raw)
            except (ValueError, TypeError, KeyError) as exc:
                logger.warning("%s:%d: skipping unreadable record (%s)", self.path, lineno, exc)
                continue
            if record.key not in self.keys:
                self.keys.add(record.key)
                self.records.append(record)

    def _decode(self, raw: bytes) -> R:
        obj = json.loads(raw)
        if obj.get("v") != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema version {obj.get('v')!r}")
        return self.record_type(**{name: obj[name] for name in self._field_names})

    def _encode(self, record: R) -> str:
        return json.dumps({"v": SCHEMA_VERSION, **asdict(record)}, ensure_ascii=False)

    def append(self, records: Iterable[R]) -> list[R]:
        """Write the records whose keys are new; return them."""
        if self.readonly:
            raise PermissionError(f"{self.path} is open read-only")
        fresh: list[R] = []
        batch_keys: set[tuple] = set()
        for record in records:
            if record.key in self.keys or record.key in batch_keys:
                continue
            batch_keys.add(record.key)
            fresh.append(record)
        if not fresh:
            return []
        payload = "".join(self._encode(r) + "\n" for r in fresh).encode("utf-8")
        fd = os.open(self.path, os.O_WRONLY | os.O_APPEND | os.O_CREAT, 0o644)
        try:
            view = memoryview(payload)
            while view:
                written = os.write(fd, view)
                view = view[written:]
            os.fsync(fd)
        finally:
            os.close(fd)
        self.records.extend(fresh)
        self.keys.update(batch_keys)
        return fresh


class Store:
    """The violation, commit and command logs of one deployment."""

    violation_file: ClassVar[str] = VIOLATIONS_FILE

    def __init__(self, directory: str | Path, readonly: bool = False):
        self.directory = Path(directory)
        if not readonly:
            self.directory.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._violations = RecordLog(self.directory / VIOLATIONS_FILE, ViolationRecord, readonly)
        self._commits = RecordLog(self.directory / COMMITS_FILE, CommitRecord, readonly)
        self._commands = RecordLog(self.directory / COMMANDS_FILE, CommandRecord, readonly)

    # -- writes --------------------------------------------------------------

    def append_violations(self, records: Iterable[ViolationRecord]) -> int:
        with self._lock:
            return len(self._violations.append(records))

    def append_commit(self, record: CommitRecord) -> bool:
        with self._lock:
            return bool(self._commits.append([record]))

    def append_command(self, record: CommandRecord) -> bool:
        with self._lock:
            return bool(self._commands.append([record]))

    # -- reads ---------------------------------------------------------------

    def violations(self) -> list[ViolationRecord]:
        with self._lock:
            return list(self._violations.records)

    def commits(self) -> list[CommitRecord]:
        with self._lock:
            return list(self._commits.records)

    def commands(self) -> list[CommandRecord]:
        with self._lock:
            return list(self._commands.records)

    def has_command(self, repo: str, comment_id: int) -> bool:
        with self._lock:
            return (repo, comment_id) in self._commands.keys

    def has_commit(self, repo: str, commit: str) -> bool:
        with self._lock:
            return (repo, commit) in self._commits.keys

    def query_by_commit(self, assignment: str, commit: str) -> list[ViolationRecord]:
        return [r for r in self.violations() if r.assignment == assignment and r.commit == commit]

    def query_by_rule(self, assignment: str, rule: str) -> list[ViolationRecord]:
        return [r for r in self.violations() if r.assignment == assignment and r.rule == rule]

    def query_timeline(self, user: str, rule: str) -> list[ViolationRecord]:
        found = [r for r in self.violations() if r.user == user and r.rule == rule]
        return sorted(found, key=lambda r: (r.timestamp, r.commit, r.file, r.line))

    def commit_timestamps(self, assignment: Optional[str] = None) -> dict[str, int]:
        return {c.commit: c.timestamp for c in self.commits() if assignment is None or c.assignment == assignment}
