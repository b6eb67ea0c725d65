"""Test doubles shared by several test modules."""

from __future__ import annotations

import base64
import hashlib
import json
import re
import threading
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional
from urllib.parse import parse_qs, urlparse

from codenudge.config import init_config, load_config
from codenudge.forge import FAKE_HOST, FakeForge, IssueRef, RepoRef, UnknownCommit

FIXTURES = Path(__file__).parent / "fixtures"
JAVA_FIXTURES = FIXTURES / "java"

BOT_TOKEN = "bot-token"
STUDENT_TOKEN = "student-token"


def _iso(ts: int) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


class FakeGitHub:
    """A tiny GitHub REST v3 server backed by a FakeForge directory.

    Only the endpoints the adapter uses are served.  ``rate_limit_next``
    makes the next N requests fail with a rate-limit 403.
    """

    def __init__(self, forge: FakeForge, users: Optional[dict[str, str]] = None):
        self.forge = forge
        self.users = users or {BOT_TOKEN: forge.bot_login, STUDENT_TOKEN: "student"}
        self.rate_limit_next = 0
        self.requests: list[tuple[str, str]] = []
        self._blobs: dict[str, bytes] = {}
        self._lock = threading.Lock()
        handler = self._handler_class()
        self.server = ThreadingHTTPServer(("127.0.0.1", 0), handler)
        self.thread = threading.Thread(target=self.server.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        host, port = self.server.server_address[:2]
        return f"http://{host}:{port}"

    def __enter__(self) -> "FakeGitHub":
        self.thread.start()
        return self

    def __exit__(self, *exc) -> None:
        self.server.shutdown()
        self.server.server_close()

    def _handler_class(self):
        gh = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):  # keep test output quiet
                pass

            def _send(self, status: int, payload, headers: Optional[dict] = None) -> None:
                body = json.dumps(payload).encode()
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(body)))
                for k, v in (headers or {}).items():
                    self.send_header(k, v)
                self.end_headers()
                self.wfile.write(body)

            def _dispatch(self, method: str) -> None:
                parsed = urlparse(self.path)
                query = {k: v[-1] for k, v in parse_qs(parsed.query).items()}
                gh.requests.append((method, parsed.path))
                with gh._lock:
                    if gh.rate_limit_next > 0:
                        gh.rate_limit_next -= 1
                        return self._send(
                            403,
                            {"message": "API rate limit exceeded"},
                            {"X-RateLimit-Remaining": "0", "Retry-After": "0"},
                        )
                auth = self.headers.get("Authorization", "")
                login = gh.users.get(auth.removeprefix("Bearer "))
                if login is None:
                    return self._send(401, {"message": "Bad credentials"})
                body = None
                if method == "POST":
                    length = int(self.headers.get("Content-Length", 0))
                    body = json.loads(self.rfile.read(length) or b"{}")
                try:
                    status, payload = gh.route(method, parsed.path, query, body, login)
                except KeyError:
                    status, payload = 404, {"message": "Not Found"}
                self._send(status, payload)

            def do_GET(self):
                self._dispatch("GET")

            def do_POST(self):
                self._dispatch("POST")

        return Handler

    def _repo(self, owner: str, name: str) -> RepoRef:
        repo = RepoRef(FAKE_HOST, owner, name)
        if not (self.forge.repo_dir(repo) / "commits.jsonl").exists():
            raise KeyError(name)
        return repo

    @staticmethod
    def _page(items: list, query: dict) -> list:
        per_page = int(query.get("per_page", 30))
        page = int(query.get("page", 1))
        return items[(page - 1) * per_page : page * per_page]

    def route(self, method: str, path: str, query: dict, body, login: str):
        m = re.fullmatch(r"/repos/([^/]+)/([^/]+)(/.*)", path)
        if not m:
            raise KeyError(path)
        repo = self._repo(m.group(1), m.group(2))
        rest = m.group(3)
        if method == "GET" and rest == "/commits":
            commits = self.forge._commits_after(repo, None)
            if not commits:
                return 409, {"message": "Git Repository is empty."}
            items = [
                {
                    "sha": c.hash,
                    "commit": {"author": {"name": c.author, "date": _iso(c.timestamp)}},
                    "author": {"login": c.author},
                    "parents": [{"sha": p} for p in c.parents],
                }
                for c in reversed(commits)
            ]
            return 200, self._page(items, query)
        if method == "GET" and (t := re.fullmatch(r"/git/trees/([^/]+)", rest)):
            try:
                files = self.forge.snapshot(repo, t.group(1))
            except UnknownCommit:
                return 404, {"message": "Not Found"}
            entries = []
            for p, text in sorted(files.items()):
                raw = text.encode("utf-8")
                sha = hashlib.sha1(b"blob " + raw).hexdigest()
                self._blobs[sha] = raw
                entries.append({"path": p, "type": "blob", "sha": sha})
            return 200, {"sha": t.group(1), "tree": entries, "truncated": False}
        if method == "GET" and (b := re.fullmatch(r"/git/blobs/([0-9a-f]+)", rest)):
            raw = self._blobs[b.group(1)]
            return 200, {"sha": b.group(1), "encoding": "base64", "content": base64.encodebytes(raw).decode()}
        if rest == "/issues":
            if method == "POST":
                issue = self.forge.create_issue(repo, body["title"], body.get("body", ""), author=login)
                return 201, {"number": issue.number, "title": issue.title}
            state = query.get("state", "open")
            items = [
                {"number": i["number"], "title": i["title"], "state": i["state"]}
                for i in reversed(self.forge.issues(repo))
                if state == "all" or i["state"] == state
            ]
            return 200, self._page(items, query)
        if c := re.fullmatch(r"/issues/(\d+)/comments", rest):
            number = int(c.group(1))
            meta = {i["number"]: i for i in self.forge.issues(repo)}
            if number not in meta:
                return 404, {"message": "Not Found"}
            issue = IssueRef(repo, number, meta[number]["title"])
            if method == "POST":
                cid = self.forge._append_comment(issue, login, body["body"], None)
                return 201, {"id": cid, "body": body["body"]}
            items = [
                {"id": x.id, "user": {"login": x.author}, "body": x.body, "created_at": _iso(x.timestamp)}
                for x in self.forge._list_comments(issue)
            ]
            return 200, self._page(items, query)
        raise KeyError(rest)


def make_config(tmp: Path, forge_root: Path, repos: list[RepoRef], interval: Optional[float] = None, **settings):
    """A config directory listing ``repos``, loaded in test mode."""
    root = tmp / "config"
    init_config(root)
    with open(root / "repos.txt", "a", encoding="utf-8") as fh:
        for repo in repos:
            fh.write(f"{repo.host} {repo.slug}\n")
    if settings:
        with open(root / "settings.toml", "a", encoding="utf-8") as fh:
            for key, value in settings.items():
                fh.write(f"{key} = {json.dumps(value)}\n")
    return load_config(root, test_forge=forge_root, interval=interval)


def bot_comments(forge: FakeForge, issue: IssueRef) -> list:
    return [c for c in forge.list_comments(issue) if c.author == forge.bot_login]


def java_class(name: str, body: str) -> str:
    return f"public class {name} {{\n{body}}}\n"


def method_with(lines: list[str], name: str = "work") -> str:
    """A method whose body is ``lines``; each line is indented by eight spaces."""
    inner = "".join(f"        {line}\n" for line in lines)
    return f"    public void {name}() {{\n{inner}    }}\n"


class Course:
    """A config directory plus fake forge with a few student repositories."""

    def __init__(self, tmp: Path, names=(("alice", "task-1"),), interval: Optional[float] = None, **settings):
        from codenudge.bot import Coordinator

        self.forge = FakeForge(tmp / "forge", sleep=lambda _s: None)
        self.repos = [self.forge.create_repo(owner, name) for owner, name in names]
        self.config = make_config(tmp, self.forge.root, self.repos, interval, **settings)
        self.coordinator = Coordinator(self.config, forge_for=lambda _repo: self.forge)
        self.bot = self.coordinator.bot
        self.store = self.coordinator.store
        self.clock = 1_000

    def tick(self):
        return self.coordinator.run_once()

    def push(self, repo: RepoRef, files: dict, author: Optional[str] = None, **kw) -> str:
        self.clock += 60
        return self.forge.push(repo, files, author or repo.owner, timestamp=kw.pop("timestamp", self.clock), **kw)

    def feedback_issue(self, repo: RepoRef) -> IssueRef:
        return self.forge.issue_by_title(repo, self.config.settings.feedback_issue_title)

    def command_issue(self, repo: RepoRef) -> IssueRef:
        return self.forge.issue_by_title(repo, self.config.settings.command_issue_title)

    def feedback(self, repo: RepoRef) -> list:
        """Bot comments on the feedback issue after the greeting."""
        return bot_comments(self.forge, self.feedback_issue(repo))[1:]

    def replies(self, repo: RepoRef) -> list:
        """Bot comments on the command issue after the help text."""
        return bot_comments(self.forge, self.command_issue(repo))[1:]

    def say(self, repo: RepoRef, body: str, author: Optional[str] = None) -> int:
        self.clock += 1
        return self.forge.add_comment(self.command_issue(repo), author or repo.owner, body, timestamp=self.clock)

    def state(self, repo: RepoRef):
        return self.bot.states.load(repo)

    def close(self) -> None:
        self.coordinator.close()


TEMPLATE_SOURCE = """\
import java.util.Random;

public class Game {
    private int score;

    public int roll() {
        Random dice = new Random();
        return dice.nextInt(6) + score;
    }
}
"""
