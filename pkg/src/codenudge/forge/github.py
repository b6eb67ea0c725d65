"""GitHub REST v3 adapter; works against github.com and enterprise hosts."""

from __future__ import annotations

import base64
import logging
import time
from datetime import datetime
from typing import Any, Optional

import requests

from .base import (
    AuthFailure,
    Comment,
    CommitInfo,
    Forge,
    ForgeError,
    IssueRef,
    RepoRef,
    RepoUnreachable,
    RateLimited,
    UnknownCommit,
    UnknownIssue,
    UnknownSince,
)

logger = logging.getLogger(__name__)

DEFAULT_BASE_URL = "https://api.github.com"
PER_PAGE = 100


class _NotFound(ForgeError):
    pass


def _epoch(stamp: Optional[str]) -> int:
    if not stamp:
        return 0
    return int(datetime.fromisoformat(stamp.replace("Z", "+00:00")).timestamp())


class GitHubForge(Forge):
    def __init__(
        self,
        base_url: str = DEFAULT_BASE_URL,
        token: Optional[str] = None,
        session: Optional[requests.Session] = None,
        timeout: float = 30.0,
        **kwargs: Any,
    ):
        super().__init__(**kwargs)
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.session = session or requests.Session()
        self.session.headers["Accept"] = "application/vnd.github+json"
        if token:
            self.session.headers["Authorization"] = f"Bearer {token}"

    def _request(self, method: str, path: str, **kwargs: Any) -> requests.Response:
        url = f"{self.base_url}{path}"
        try:
            resp = self.session.request(method, url, timeout=self.timeout, **kwargs)
        except requests.RequestException as exc:
            raise RepoUnreachable(f"{method} {path}: {exc.__class__.__name__}") from exc
        status = resp.status_code
        if status < 400:
            return resp
        if status == 401:
            raise AuthFailure(f"{method} {path}: bad credentials")
        if status == 429 or (status == 403 and self._is_rate_limit(resp)):
            raise RateLimited(f"{method} {path}: rate limited", self._retry_after(resp))
        if status == 403:
            raise AuthFailure(f"{method} {path}: forbidden")
        if status in (404, 422):
            raise _NotFound(f"{method} {path}: {status}")
        if status == 409:
            # empty repository
            raise _NotFound(f"{method} {path}: conflict")
        raise RepoUnreachable(f"{method} {path}: HTTP {status}")

    @staticmethod
    def _is_rate_limit(resp: requests.Response) -> bool:
        if resp.headers.get("X-RateLimit-Remaining") == "0":
            return True
        return "rate limit" in resp.text.lower()

    @staticmethod
    def _retry_after(resp: requests.Response) -> float:
        if "Retry-After" in resp.headers:
            try:
                return float(resp.headers["Retry-After"])
            except ValueError:
                return 0.0
        reset = resp.headers.get("X-RateLimit-Reset")
        if reset and reset.isdigit():
            return max(0.0, int(reset) - time.time())
        return 0.0

    def _pages(self, path: str, params: Optional[dict] = None):
        page = 1
        while True:
            query = dict(params or {}, per_page=PER_PAGE, page=page)
            items = self._request("GET", path, params=query).json()
            if not items:
                return
            yield items
            if len(items) < PER_PAGE:
                return
            page += 1

    def _commits_after(self, repo: RepoRef, since: Optional[str]) -> list[CommitInfo]:
        newest_first: list[CommitInfo] = []
        found = since is None
        try:
            for page in self._pages(f"/repos/{repo.slug}/commits"):
                for item in page:
                    if item["sha"] == since:
                        found = True
                        break
                    commit = item.get("commit") or {}
                    login = (item.get("author") or {}).get("login") or (commit.get("author") or {}).get("name", "")
                    newest_first.append(
                        CommitInfo(
                            hash=item["sha"],
                            author=login,
                            timestamp=_epoch((commit.get("author") or {}).get("date")),
                            parents=tuple(p["sha"] for p in item.get("parents", [])),
                        )
                    )
                if found and since is not None:
                    break
        except _NotFound:
            if since is not None:
                raise UnknownSince(f"{repo.slug}: history unavailable") from None
            return []
        if not found:
            raise UnknownSince(f"{repo.slug}: commit {since} not in history")
        return newest_first[::-1]

    def _read_files(self, repo: RepoRef, commit: str) -> dict[str, str]:
        try:
            tree = self._request("GET", f"/repos/{repo.slug}/git/trees/{commit}", params={"recursive": "1"}).json()
        except _NotFound:
            raise UnknownCommit(f"{repo.slug}: unknown commit {commit}") from None
        files: dict[str, str] = {}
        for entry in tree.get("tree", []):
            if entry.get("type") != "blob" or not entry["path"].endswith(".java"):
                continue
            blob = self._request("GET", f"/repos/{repo.slug}/git/blobs/{entry['sha']}").json()
            raw = base64.b64decode(blob["content"]) if blob.get("encoding") == "base64" else blob["content"].encode()
            files[entry["path"]] = raw.decode("utf-8", errors="replace")
        return files

    def _open_issue(self, repo: RepoRef, title: str, body: str) -> IssueRef:
        try:
            for page in self._pages(f"/repos/{repo.slug}/issues", {"state": "open"}):
                for item in page:
                    if item.get("title") == title and "pull_request" not in item:
                        return IssueRef(repo, item["number"], title)
        except _NotFound:
            raise RepoUnreachable(f"no such repository: {repo.slug}") from None
        created = self._request("POST", f"/repos/{repo.slug}/issues", json={"title": title, "body": body}).json()
        return IssueRef(repo, created["number"], title)

    def _post_comment(self, issue: IssueRef, body: str) -> int:
        try:
            resp = self._request(
                "POST", f"/repos/{issue.repo.slug}/issues/{issue.number}/comments", json={"body": body}
            )
        except _NotFound:
            raise UnknownIssue(f"{issue.repo.slug}#{issue.number} does not exist") from None
        return int(resp.json()["id"])

    def _list_comments(self, issue: IssueRef) -> list[Comment]:
        comments: list[Comment] = []
        try:
            for page in self._pages(f"/repos/{issue.repo.slug}/issues/{issue.number}/comments"):
                for item in page:
                    comments.append(
                        Comment(
                            id=int(item["id"]),
                            author=(item.get("user") or {}).get("login", ""),
                            body=item.get("body") or "",
                            timestamp=_epoch(item.get("created_at")),
                        )
                    )
        except _NotFound:
            raise UnknownIssue(f"{issue.repo.slug}#{issue.number} does not exist") from None
        return comments
