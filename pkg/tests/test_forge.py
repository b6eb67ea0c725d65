"""One contract suite, run against the fake forge and the REST adapter.

The REST adapter talks to a local HTTP double backed by a fake forge, so the
same scripted state is seen through both adapters.
"""

from __future__ import annotations

import pytest

from codenudge.forge import (
    AuthFailure,
    FakeForge,
    GitHubForge,
    IssueRef,
    RateLimited,
    RepoRef,
    RepoUnreachable,
    UnknownCommit,
    UnknownIssue,
    UnknownSince,
)

from helpers import BOT_TOKEN, FakeGitHub


class Env:
    """``forge`` is under test; ``script`` is a fake forge used to set up state."""

    def __init__(self, forge, script: FakeForge, server=None):
        self.forge = forge
        self.script = script
        self.server = server

    def repo(self, owner="alice", name="task-1") -> RepoRef:
        ref = self.script.create_repo(owner, name)
        if isinstance(self.forge, GitHubForge):
            return RepoRef(self.forge.base_url, owner, name)
        return ref

    def fake_ref(self, repo: RepoRef) -> RepoRef:
        return RepoRef("fake", repo.owner, repo.name)

    def fake_issue(self, issue: IssueRef) -> IssueRef:
        return IssueRef(self.fake_ref(issue.repo), issue.number, issue.title)


@pytest.fixture(params=["fake", "rest"])
def env(request, tmp_path):
    script = FakeForge(tmp_path / "forge", sleep=lambda _s: None)
    if request.param == "fake":
        yield Env(script, script)
        return
    with FakeGitHub(script) as server:
        forge = GitHubForge(server.url, token=BOT_TOKEN, sleep=lambda _s: None)
        yield Env(forge, script, server)


def push(env: Env, repo: RepoRef, files, ts, author="alice"):
    return env.script.push(env.fake_ref(repo), files, author=author, timestamp=ts)


# -- commits --------------------------------------------------------------------


def test_up_to_date_returns_empty(env):
    repo = env.repo()
    head = push(env, repo, {"A.java": "class A {}"}, 10)
    assert env.forge.list_new_commits(repo, head) == []


def test_commits_after_since_in_order(env):
    repo = env.repo()
    c1 = push(env, repo, {"A.java": "class A {}"}, 10)
    c2 = push(env, repo, {"B.java": "class B {}"}, 20)
    c3 = push(env, repo, {"C.java": "class C {}"}, 30)
    assert [c.hash for c in env.forge.list_new_commits(repo, c1)] == [c2, c3]
    got = env.forge.list_new_commits(repo, None)
    assert [c.hash for c in got] == [c1, c2, c3]
    assert got[1].parents == (c1,)
    assert got[1].author == "alice" and got[1].timestamp == 20


def test_equal_timestamps_keep_topological_order(env):
    repo = env.repo()
    hashes = [push(env, repo, {f"F{i}.java": "class F {}"}, 5) for i in range(4)]
    assert [c.hash for c in env.forge.list_new_commits(repo)] == hashes


def test_unknown_since(env):
    repo = env.repo()
    push(env, repo, {"A.java": "class A {}"}, 10)
    with pytest.raises(UnknownSince):
        env.forge.list_new_commits(repo, "f" * 40)


def test_empty_repo_has_no_commits(env):
    repo = env.repo()
    assert env.forge.list_new_commits(repo) == []


def test_missing_repo_unreachable(env):
    repo = env.repo()
    ghost = RepoRef(repo.host, "nobody", "nothing")
    with pytest.raises(RepoUnreachable):
        env.forge.open_issue(ghost, "t", "b")


def test_cursor_never_skips_or_duplicates(env):
    repo = env.repo()
    seen, cursor = [], None
    pushed = []
    for batch in range(4):
        for i in range(batch + 1):
            pushed.append(push(env, repo, {f"B{batch}_{i}.java": "class X {}"}, 100 * batch + i))
        new = env.forge.list_new_commits(repo, cursor)
        seen.extend(c.hash for c in new)
        cursor = new[-1].hash
    assert seen == pushed


# -- trees ----------------------------------------------------------------------


def test_read_tree_only_java(env):
    repo = env.repo()
    head = push(env, repo, {"src/A.java": "class A {}", "src/B.java": "class B {}", "README.md": "# hi"}, 10)
    assert env.forge.read_tree(repo, head) == {"src/A.java": "class A {}", "src/B.java": "class B {}"}


def test_read_tree_is_a_full_snapshot(env):
    repo = env.repo()
    push(env, repo, {"A.java": "class A {}"}, 10)
    head = push(env, repo, {"B.java": "class B {}"}, 20)
    assert set(env.forge.read_tree(repo, head)) == {"A.java", "B.java"}


def test_read_tree_unknown_commit(env):
    repo = env.repo()
    push(env, repo, {"A.java": "class A {}"}, 10)
    with pytest.raises(UnknownCommit):
        env.forge.read_tree(repo, "0" * 40)


def test_read_tree_non_ascii(env):
    repo = env.repo()
    head = push(env, repo, {"Å.java": 'class A { String s = "héllo ✓"; }'}, 10)
    assert env.forge.read_tree(repo, head) == {"Å.java": 'class A { String s = "héllo ✓"; }'}


# -- issues and comments --------------------------------------------------------


def test_open_issue_idempotent(env):
    repo = env.repo()
    first = env.forge.open_issue(repo, "SOBO - Commit Analyzer", "body")
    second = env.forge.open_issue(repo, "SOBO - Commit Analyzer", "body")
    assert first == second
    assert first.number >= 1
    titles = [i["title"] for i in env.script.issues(env.fake_ref(repo))]
    assert titles == ["SOBO - Commit Analyzer"]


def test_open_issue_reopens_after_close(env):
    repo = env.repo()
    first = env.forge.open_issue(repo, "t", "b")
    env.script.close_issue(env.fake_issue(first))
    second = env.forge.open_issue(repo, "t", "b")
    assert second.number != first.number


def test_post_comment_ids_increase(env):
    repo = env.repo()
    issue = env.forge.open_issue(repo, "t", "b")
    a = env.forge.post_comment(issue, "one")
    b = env.forge.post_comment(issue, "two")
    assert b > a
    bodies = [(c.body, c.author) for c in env.forge.list_comments(issue)]
    assert bodies == [("one", "sobo-bot"), ("two", "sobo-bot")]


def test_post_to_closed_issue_succeeds(env):
    repo = env.repo()
    issue = env.forge.open_issue(repo, "t", "b")
    env.script.close_issue(env.fake_issue(issue))
    env.forge.post_comment(issue, "still here")
    assert [c.body for c in env.forge.list_comments(issue)] == ["still here"]


def test_list_comments_since(env):
    repo = env.repo()
    issue = env.forge.open_issue(repo, "t", "b")
    assert env.forge.list_comments(issue) == []
    first = env.forge.post_comment(issue, "hello")
    assert env.forge.list_comments(issue, first) == []
    env.script.add_comment(env.fake_issue(issue), "alice", "<stop>")
    rows = env.forge.list_comments(issue, first)
    assert [(c.author, c.body) for c in rows] == [("alice", "<stop>")]


def test_unknown_issue(env):
    repo = env.repo()
    with pytest.raises(UnknownIssue):
        env.forge.list_comments(IssueRef(repo, 99, "nope"))
    with pytest.raises(UnknownIssue):
        env.forge.post_comment(IssueRef(repo, 99, "nope"), "x")


# -- rate limiting ----------------------------------------------------------------


def test_rate_limited_call_is_retried(env):
    repo = env.repo()
    issue = env.forge.open_issue(repo, "t", "b")
    delays = []
    env.forge.sleep = delays.append
    if env.server is not None:
        env.server.rate_limit_next = 2
    else:
        env.script.inject("post_comment", RateLimited("slow down"), times=2)
    env.forge.post_comment(issue, "after backoff")
    assert [c.body for c in env.forge.list_comments(issue)] == ["after backoff"]
    assert len(delays) == 2 and delays[1] > delays[0]


def test_rate_limit_gives_up_eventually(env):
    repo = env.repo()
    issue = env.forge.open_issue(repo, "t", "b")
    env.forge.max_retries = 1
    if env.server is not None:
        env.server.rate_limit_next = 5
    else:
        env.script.inject("post_comment", RateLimited("slow down"), times=5)
    with pytest.raises(RateLimited):
        env.forge.post_comment(issue, "never")


# -- REST only ----------------------------------------------------------------------


def test_rest_bad_token(tmp_path):
    script = FakeForge(tmp_path / "forge")
    script.create_repo("alice", "task-1")
    with FakeGitHub(script) as server:
        forge = GitHubForge(server.url, token="wrong")
        with pytest.raises(AuthFailure):
            forge.list_new_commits(RepoRef(server.url, "alice", "task-1"))


def test_rest_paginates_commits(tmp_path):
    script = FakeForge(tmp_path / "forge")
    repo = script.create_repo("alice", "task-1")
    hashes = [script.push(repo, {"A.java": f"class A{i} {{}}"}, "alice", timestamp=i) for i in range(130)]
    with FakeGitHub(script) as server:
        forge = GitHubForge(server.url, token=BOT_TOKEN)
        ref = RepoRef(server.url, "alice", "task-1")
        assert [c.hash for c in forge.list_new_commits(ref)] == hashes
        assert [c.hash for c in forge.list_new_commits(ref, hashes[5])] == hashes[6:]


def test_rest_server_down():
    forge = GitHubForge("http://127.0.0.1:9", token=BOT_TOKEN, timeout=1)
    with pytest.raises(RepoUnreachable):
        forge.list_new_commits(RepoRef("x", "a", "b"))


def test_fake_injected_unreachable(forge):
    repo = forge.create_repo("alice", "task-1")
    forge.inject("list_new_commits", RepoUnreachable("down"))
    with pytest.raises(RepoUnreachable):
        forge.list_new_commits(repo)
    assert forge.list_new_commits(repo) == []
