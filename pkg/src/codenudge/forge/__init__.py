"""Access to repositories and issue trackers."""

from .base import (
    FAKE_HOST,
    AuthFailure,
    Comment,
    CommitInfo,
    Forge,
    ForgeError,
    IssueRef,
    RateLimited,
    RepoRef,
    RepoUnreachable,
    UnknownCommit,
    UnknownIssue,
    UnknownSince,
)
from .fake import FakeForge
from .github import DEFAULT_BASE_URL, GitHubForge

__all__ = [
    "DEFAULT_BASE_URL",
    "FAKE_HOST",
    "AuthFailure",
    "Comment",
    "CommitInfo",
    "FakeForge",
    "Forge",
    "ForgeError",
    "GitHubForge",
    "IssueRef",
    "RateLimited",
    "RepoRef",
    "RepoUnreachable",
    "UnknownCommit",
    "UnknownIssue",
    "UnknownSince",
]
