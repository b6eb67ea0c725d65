from __future__ import annotations

import pytest

from codenudge.commands import NOT_A_COMMAND, parse_command
from codenudge.forge import RepoUnreachable

from helpers import TEMPLATE_SOURCE, Course


@pytest.mark.parametrize(
    "body, expected",
    [
        ("<help>", ("help", "")),
        ("  <stop>\n", ("stop", "")),
        ("<GO>", ("go", "")),
        ("< more  abc123 >", ("more", "abc123")),
        ("<rule S109>", ("rule", "S109")),
        ("<select s1481>", ("select", "s1481")),
        ("<help me>", (NOT_A_COMMAND, "")),
        ("<more>", (NOT_A_COMMAND, "")),
        ("<rule S109 S1481>", (NOT_A_COMMAND, "")),
        ("please <stop>", (NOT_A_COMMAND, "")),
        ("<stop> now", (NOT_A_COMMAND, "")),
        ("<stop><go>", (NOT_A_COMMAND, "")),
        ("<launch>", (NOT_A_COMMAND, "")),
        ("thanks!", (NOT_A_COMMAND, "")),
        ("", (NOT_A_COMMAND, "")),
    ],
)
def test_parse(body, expected):
    assert parse_command(body) == expected


@pytest.fixture
def course(tmp_path):
    c = Course(tmp_path)
    repo = c.repos[0]
    c.push(repo, {"src/Game.java": TEMPLATE_SOURCE}, author="teacher")
    c.tick()
    yield c
    c.close()


def student_push(course, line="int wasted = 3;"):
    source = TEMPLATE_SOURCE.replace("    public int roll() {\n", f"    public int roll() {{\n        {line}\n")
    return course.push(course.repos[0], {"src/Game.java": source})


def test_each_command_gets_exactly_one_reply(course):
    repo = course.repos[0]
    head = student_push(course)
    course.tick()
    for body in ["<help>", "<stop>", "<go>", f"<more {head[:8]}>", "<rule S109>", "<select S2119>"]:
        course.say(repo, body)
    course.tick()
    replies = [c.body for c in course.replies(repo)]
    assert len(replies) == 6
    assert replies[0] == course.bot.templates.help
    assert "<go>" in replies[1]
    assert "S1481" in replies[3] and "S109" in replies[3]
    assert "`3`" not in replies[4] and "int wasted = 3;" in replies[4]
    assert replies[5].startswith("**SYNTHETIC DATA**")
    kinds = [r.kind for r in course.store.commands()]
    assert kinds == ["help", "stop", "go", "more", "rule", "select"]
    assert not course.state(repo).muted


def test_chatter_is_ignored(course):
    repo = course.repos[0]
    for body in ["thanks for the help!", "<stop> please", "<launch>", "what does S109 mean?"]:
        course.say(repo, body)
    course.tick()
    assert course.replies(repo) == []
    assert course.store.commands() == []
    assert not course.state(repo).muted


def test_bot_comments_are_not_commands(course):
    repo = course.repos[0]
    course.forge.add_comment(course.command_issue(repo), "sobo-bot", "<stop>")
    course.tick()
    assert not course.state(repo).muted


def test_command_record_fields(course):
    repo = course.repos[0]
    cid = course.say(repo, "<rule s1155>")
    course.tick()
    (record,) = course.store.commands()
    assert (record.user, record.task, record.kind, record.arg, record.repo, record.comment_id) == (
        "alice",
        "task-1",
        "rule",
        "s1155",
        repo.key,
        cid,
    )
    assert record.timestamp == course.clock


def test_unknown_rule_lists_valid_ids(course):
    repo = course.repos[0]
    course.say(repo, "<rule S9999>")
    course.tick()
    (reply,) = [c.body for c in course.replies(repo)]
    assert "S9999" in reply
    for rule in ("S109", "S1155", "S1213", "S1481", "S2119"):
        assert rule in reply


def test_more_edge_cases(course):
    repo = course.repos[0]
    template_commit = course.state(repo).last_analyzed
    course.say(repo, "<more deadbeef>")
    course.say(repo, "<more xyz!>")
    course.say(repo, f"<more {template_commit[:6]}>")
    clean = course.push(repo, {"README.md": "hi"})
    course.tick()
    course.say(repo, f"<more {clean}>")
    course.tick()
    replies = [c.body for c in course.replies(repo)]
    assert "could not find" in replies[0]
    assert "does not look like a commit" in replies[1]
    assert "have not analyzed" in replies[2]
    assert "no code-quality issues" in replies[3]


def test_rule_before_any_student_commit(tmp_path):
    course = Course(tmp_path)
    repo = course.repos[0]
    course.tick()
    course.say(repo, "<rule S109>")
    course.tick()
    (reply,) = [c.body for c in course.replies(repo)]
    assert "not analyzed" in reply
    course.close()


def test_select_is_deterministic_and_does_not_read_store(course, monkeypatch):
    repo = course.repos[0]

    def forbidden(*_a, **_k):
        raise AssertionError("store read")

    monkeypatch.setattr(course.store, "violations", forbidden)
    monkeypatch.setattr(course.store, "query_by_rule", forbidden)
    course.say(repo, "<select S109>")
    course.say(repo, "<select S109>")
    course.tick()
    first, second = [c.body for c in course.replies(repo)]
    assert first == second and "SYNTHETIC DATA" in first


def test_stop_then_go_in_one_tick_ends_unmuted(course):
    repo = course.repos[0]
    course.say(repo, "<stop>")
    course.say(repo, "<go>")
    student_push(course)
    course.tick()
    assert not course.state(repo).muted
    assert len(course.feedback(repo)) == 1


def test_processed_comments_are_not_rerun(course):
    repo = course.repos[0]
    course.say(repo, "<help>")
    course.tick()
    course.tick()
    assert len(course.replies(repo)) == 1


def test_replay_after_lost_cursor_does_not_answer_twice(course):
    repo = course.repos[0]
    course.say(repo, "<stop>")
    course.tick()
    state = course.state(repo)
    # simulate a crash after the record was logged but before the state was saved
    state.last_command_comment = None
    state.muted = False
    course.bot.states.save(state)
    course.tick()
    assert len(course.replies(repo)) == 1
    assert len(course.store.commands()) == 1
    assert course.state(repo).muted


def test_post_failure_does_not_advance_cursor(course):
    repo = course.repos[0]
    cursor = course.state(repo).last_command_comment
    course.say(repo, "<help>")
    course.forge.inject("post_comment", RepoUnreachable("down"))
    course.tick()
    assert course.state(repo).last_command_comment == cursor
    assert course.store.commands() == []
    course.tick()
    assert len(course.replies(repo)) == 1
    assert len(course.store.commands()) == 1


def test_store_failure_does_not_advance_cursor(course, monkeypatch):
    repo = course.repos[0]
    cursor = course.state(repo).last_command_comment
    course.say(repo, "<stop>")

    def broken(_record):
        raise OSError("disk full")

    monkeypatch.setattr(course.store, "append_command", broken)
    course.tick()
    state = course.state(repo)
    assert state.last_command_comment == cursor and not state.muted
