from __future__ import annotations

import logging
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Optional, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")

FAKE_HOST = "fake"
JAVA_SUFFIX = ".java"


@dataclass(frozen=True, order=True)
class RepoRef:
    host: str
    owner: str
    name: str

    @property
    def slug(self) -> str:
        return f"{self.owner}/{self.name}"

    @property
    def key(self) -> str:
        """Filesystem-safe identifier."""
        host = self.host.split("://", 1)[-1].replace("/", "_").replace(":", "_")
        return f"{host}__{self.owner}__{self.name}"

    def __str__(self) -> str:
        return f"{self.host} {self.slug}"

    @classmethod
    def parse(cls, text: str) -> "RepoRef":
        host, _, slug = text.strip().rpartition(" ")
        owner, _, name = slug.partition("/")
        if not host or not owner or not name:
            raise ValueError(f"not a repository reference: {text!r}")
        return cls(host.strip(), owner, name)


@dataclass(frozen=True)
class CommitInfo:
    hash: str
    author: str
    timestamp: int
    parents: tuple[str, ...] = ()


@dataclass(frozen=True)
class IssueRef:
    repo: RepoRef
    number: int
    title: str


@dataclass(frozen=True)
class Comment:
    id: int
    author: str
    body: str
    timestamp: int


class ForgeError(Exception):
    retryable = False


class RepoUnreachable(ForgeError):
    retryable = True


class UnknownSince(ForgeError):
    """The cursor commit vanished, usually after a history rewrite."""


class UnknownCommit(ForgeError):
    pass


class UnknownIssue(ForgeError):
    pass


class AuthFailure(ForgeError):
    pass


class RateLimited(ForgeError):
    retryable = True

    def __init__(self, message: str = "rate limited", retry_after: float = 0.0):
        super().__init__(message)
        self.retry_after = retry_after


class Forge(ABC):
    """A host of git repositories plus an issue tracker.

    Subclasses implement the underscore methods; the public methods add
    retries with exponential backoff when the host reports rate limiting.
    """

    def __init__(self, max_retries: int = 4, backoff: float = 0.5, sleep: Callable[[float], None] = time.sleep):
        self.max_retries = max_retries
        self.backoff = backoff
        self.sleep = sleep

    def _retry(self, fn: Callable[..., T], *args) -> T:
        attempt = 0
        while True:
            try:
                return fn(*args)
            except RateLimited as exc:
                if attempt >= self.max_retries:
                    raise
                delay = max(exc.retry_after, self.backoff * (2**attempt))
                logger.warning("rate limited on %s, retrying in %.2fs", fn.__name__, delay)
                self.sleep(delay)
                attempt += 1

    def list_new_commits(self, repo: RepoRef, since: Optional[str] = None) -> list[CommitInfo]:
        """Commits after ``since`` (all commits when None), oldest first."""
        commits = self._retry(self._commits_after, repo, since)
        order = {c.hash: i for i, c in enumerate(commits)}
        return sorted(commits, key=lambda c: (c.timestamp, order[c.hash]))

    def read_tree(self, repo: RepoRef, commit: str) -> dict[str, str]:
        """Java source files of the snapshot at ``commit``."""
        files = self._retry(self._read_files, repo, commit)
        return {path: text for path, text in files.items() if path.endswith(JAVA_SUFFIX)}

    def open_issue(self, repo: RepoRef, title: str, body: str) -> IssueRef:
        """Open an issue, or return the open issue that already has ``title``."""
        return self._retry(self._open_issue, repo, title, body)

    def post_comment(self, issue: IssueRef, body: str) -> int:
        return self._retry(self._post_comment, issue, body)

    def list_comments(self, issue: IssueRef, since: Optional[int] = None) -> list[Comment]:
        comments = self._retry(self._list_comments, issue)
        return sorted((c for c in comments if since is None or c.id > since), key=lambda c: c.id)

    @abstractmethod
    def _commits_after(self, repo: RepoRef, since: Optional[str]) -> list[CommitInfo]:
        """Commits strictly after ``since`` in topological order; raise UnknownSince."""

    @abstractmethod
    def _read_files(self, repo: RepoRef, commit: str) -> dict[str, str]: ...

    @abstractmethod
    def _open_issue(self, repo: RepoRef, title: str, body: str) -> IssueRef: ...

    @abstractmethod
    def _post_comment(self, issue: IssueRef, body: str) -> int: ...

    @abstractmethod
    def _list_comments(self, issue: IssueRef) -> list[Comment]: ...
