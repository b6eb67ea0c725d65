"""A forge kept in plain directories, for tests and offline course simulations.

On-disk layout, one directory per repository::

    <root>/<owner>/<name>/
        commits.jsonl              one commit per line, oldest first:
                                   {"author", "hash", "message", "parents", "timestamp"}
        trees/<hash>/<path>        full snapshot of the files at that commit
        issues/<n>.json            {"author", "body", "number", "state", "title"}
        issues/<n>.comments.jsonl  one comment per line:
                                   {"author", "body", "id", "timestamp"}

Comment ids are unique per repository and increase by one.  A log line is
written in a single call after the data it refers to, and readers ignore an
unterminated last line, so a concurrent reader never sees half a commit.
"""

from __future__ import annotations

import fcntl
import hashlib
import json
import string
import threading
import time
from collections import defaultdict, deque
from contextlib import contextmanager
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Optional

from .base import (
    FAKE_HOST,
    Comment,
    CommitInfo,
    Forge,
    ForgeError,
    IssueRef,
    RepoRef,
    RepoUnreachable,
    UnknownCommit,
    UnknownIssue,
    UnknownSince,
)


def _read_jsonl(path: Path) -> list[dict]:
    if not path.exists():
        return []
    data = path.read_text(encoding="utf-8")
    complete = data[: data.rfind("\n") + 1]
    return [json.loads(line) for line in complete.splitlines() if line.strip()]


def _append_jsonl(path: Path, record: dict) -> None:
    with path.open("a", encoding="utf-8") as fh:
        fh.write(json.dumps(record, sort_keys=True) + "\n")


class FakeForge(Forge):
    def __init__(self, root: str | Path, bot_login: str = "sobo-bot", **kwargs):
        super().__init__(**kwargs)
        self.root = Path(root)
        self.bot_login = bot_login
        self._lock = threading.RLock()
        self._faults: dict[str, deque[ForgeError]] = defaultdict(deque)
        self._held: dict[Path, int] = {}

    # -- scripting helpers ---------------------------------------------------

    def repo_dir(self, repo: RepoRef) -> Path:
        return self.root / repo.owner / repo.name

    def create_repo(self, owner: str, name: str) -> RepoRef:
        repo = RepoRef(FAKE_HOST, owner, name)
        d = self.repo_dir(repo)
        (d / "trees").mkdir(parents=True, exist_ok=True)
        (d / "issues").mkdir(exist_ok=True)
        (d / "commits.jsonl").touch()
        return repo

    def repos(self) -> list[RepoRef]:
        if not self.root.exists():
            return []
        return sorted(
            RepoRef(FAKE_HOST, p.parent.name, p.name)
            for p in self.root.glob("*/*")
            if (p / "commits.jsonl").exists()
        )

    def push(
        self,
        repo: RepoRef,
        files: Mapping[str, str],
        author: str,
        timestamp: Optional[int] = None,
        message: str = "",
        replace: bool = False,
        delete: Iterable[str] = (),
    ) -> str:
        """Record a commit on top of the current head and return its hash.

        ``files`` are added or overwritten; with ``replace`` they become the
        whole snapshot.
        """
        with self._locked(repo) as d:
            log = _read_jsonl(d / "commits.jsonl")
            parent = log[-1]["hash"] if log else None
            tree = {} if replace or parent is None else self.snapshot(repo, parent)
            tree.update(files)
            for path in delete:
                tree.pop(path, None)
            ts = int(time.time()) if timestamp is None else int(timestamp)
            digest = hashlib.sha1()
            digest.update(json.dumps([parent, author, ts, message, len(log)], sort_keys=True).encode())
            for path in sorted(tree):
                digest.update(path.encode() + b"\0" + tree[path].encode("utf-8") + b"\0")
            commit = digest.hexdigest()
            tree_dir = d / "trees" / commit
            for path, text in tree.items():
                target = tree_dir / path
                target.parent.mkdir(parents=True, exist_ok=True)
                target.write_text(text, encoding="utf-8")
            tree_dir.mkdir(parents=True, exist_ok=True)
            _append_jsonl(
                d / "commits.jsonl",
                {
                    "hash": commit,
                    "author": author,
                    "timestamp": ts,
                    "parents": [parent] if parent else [],
                    "message": message,
                },
            )
            return commit

    def snapshot(self, repo: RepoRef, commit: str) -> dict[str, str]:
        """Every file of a commit, not only Java sources."""
        d = self._require(repo)
        if not commit or any(ch not in string.hexdigits for ch in commit) or not (d / "trees" / commit).is_dir():
            raise UnknownCommit(f"{repo.slug}: unknown commit {commit}")
        tree_dir = d / "trees" / commit
        return {
            p.relative_to(tree_dir).as_posix(): p.read_text(encoding="utf-8", errors="replace")
            for p in sorted(tree_dir.rglob("*"))
            if p.is_file()
        }

    def add_comment(self, issue: IssueRef, author: str, body: str, timestamp: Optional[int] = None) -> int:
        """Post a comment as somebody other than the bot (a student, say)."""
        return self._append_comment(issue, author, body, timestamp)

    def issues(self, repo: RepoRef) -> list[dict]:
        d = self._require(repo) / "issues"
        found = [json.loads(p.read_text(encoding="utf-8")) for p in d.glob("*.json")]
        return sorted(found, key=lambda i: i["number"])

    def issue_by_title(self, repo: RepoRef, title: str) -> Optional[IssueRef]:
        for issue in self.issues(repo):
            if issue["title"] == title:
                return IssueRef(repo, issue["number"], issue["title"])
        return None

    def close_issue(self, issue: IssueRef) -> None:
        path = self._require(issue.repo) / "issues" / f"{issue.number}.json"
        data = json.loads(path.read_text(encoding="utf-8"))
        data["state"] = "closed"
        path.write_text(json.dumps(data, sort_keys=True), encoding="utf-8")

    def inject(self, op: str, error: ForgeError, times: int = 1) -> None:
        """Make the next ``times`` calls of operation ``op`` raise ``error``."""
        for _ in range(times):
            self._faults[op].append(error)

    # -- internals -----------------------------------------------------------

    @contextmanager
    def _locked(self, repo: RepoRef) -> Iterator[Path]:
        """Serialize writers to one repository, across threads and processes.  Reentrant."""
        d = self._require(repo)
        with self._lock:
            if self._held.get(d):
                self._held[d] += 1
                try:
                    yield d
                finally:
                    self._held[d] -= 1
                return
            with open(d / ".lock", "a") as fh:
                fcntl.flock(fh, fcntl.LOCK_EX)
                self._held[d] = 1
                try:
                    yield d
                finally:
                    self._held[d] = 0
                    fcntl.flock(fh, fcntl.LOCK_UN)

    def _fault(self, op: str) -> None:
        queue = self._faults.get(op)
        if queue:
            raise queue.popleft()

    def _require(self, repo: RepoRef) -> Path:
        d = self.repo_dir(repo)
        if not (d / "commits.jsonl").exists():
            raise RepoUnreachable(f"no such repository: {repo.slug}")
        return d

    def _issue_path(self, issue: IssueRef) -> Path:
        path = self._require(issue.repo) / "issues" / f"{issue.number}.json"
        if not path.exists():
            raise UnknownIssue(f"{issue.repo.slug}#{issue.number} does not exist")
        return path

    def _next_comment_id(self, repo: RepoRef) -> int:
        highest = 0
        for path in (self._require(repo) / "issues").glob("*.comments.jsonl"):
            for row in _read_jsonl(path):
                highest = max(highest, row["id"])
        return highest + 1

    def _append_comment(self, issue: IssueRef, author: str, body: str, timestamp: Optional[int]) -> int:
        with self._locked(issue.repo):
            self._issue_path(issue)
            comment_id = self._next_comment_id(issue.repo)
            ts = int(time.time()) if timestamp is None else int(timestamp)
            path = self._require(issue.repo) / "issues" / f"{issue.number}.comments.jsonl"
            _append_jsonl(path, {"id": comment_id, "author": author, "body": body, "timestamp": ts})
            return comment_id

    def _commits_after(self, repo: RepoRef, since: Optional[str]) -> list[CommitInfo]:
        self._fault("list_new_commits")
        log = _read_jsonl(self._require(repo) / "commits.jsonl")
        commits = [CommitInfo(r["hash"], r["author"], r["timestamp"], tuple(r["parents"])) for r in log]
        if since is None:
            return commits
        for i, c in enumerate(commits):
            if c.hash == since:
                return commits[i + 1 :]
        raise UnknownSince(f"{repo.slug}: commit {since} not in history")

    def _read_files(self, repo: RepoRef, commit: str) -> dict[str, str]:
        self._fault("read_tree")
        return self.snapshot(repo, commit)

    def create_issue(self, repo: RepoRef, title: str, body: str, author: Optional[str] = None) -> IssueRef:
        """Always open a new issue, even if one with this title exists."""
        with self._locked(repo) as d:
            number = max((i["number"] for i in self.issues(repo)), default=0) + 1
            data = {"number": number, "title": title, "body": body, "state": "open", "author": author or self.bot_login}
            (d / "issues" / f"{number}.json").write_text(json.dumps(data, sort_keys=True), encoding="utf-8")
            return IssueRef(repo, number, title)

    def _open_issue(self, repo: RepoRef, title: str, body: str) -> IssueRef:
        self._fault("open_issue")
        with self._locked(repo):
            for issue in self.issues(repo):
                if issue["title"] == title and issue["state"] == "open":
                    return IssueRef(repo, issue["number"], title)
            return self.create_issue(repo, title, body)

    def _post_comment(self, issue: IssueRef, body: str) -> int:
        self._fault("post_comment")
        return self._append_comment(issue, self.bot_login, body, None)

    def _list_comments(self, issue: IssueRef) -> list[Comment]:
        self._fault("list_comments")
        path = self._issue_path(issue).with_name(f"{issue.number}.comments.jsonl")
        return [Comment(r["id"], r["author"], r["body"], r["timestamp"]) for r in _read_jsonl(path)]
