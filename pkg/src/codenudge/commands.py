"""Angle-bracket commands students write on the command issue.

Grammar, after trimming surrounding whitespace and ignoring keyword case::

    <help>  <stop>  <go>  <more COMMIT>  <rule RULE>  <select RULE>

Anything else is chatter and is ignored without a reply.
"""

from __future__ import annotations

import hashlib
import logging
import re
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

from .forge import Comment
from .rules import RULES, UnknownRule, parse_rule_id
from .store import CommandRecord
from .templates import violation_table

if TYPE_CHECKING:
    from .bot import Bot, RepoState

logger = logging.getLogger(__name__)

HELP, STOP, GO, MORE, RULE, SELECT, NOT_A_COMMAND = "help", "stop", "go", "more", "rule", "select", "not-a-command"
KINDS = (HELP, STOP, GO, MORE, RULE, SELECT)
NEEDS_ARG = frozenset({MORE, RULE, SELECT})

_COMMAND_RE = re.compile(r"<\s*([A-Za-z]+)(?:\s+([^<>\s]+))?\s*>")
_HEX_RE = re.compile(r"[0-9a-fA-F]{4,40}")
SYNTHETIC_ROWS = 3


@dataclass(frozen=True)
class Command:
    kind: str
    arg: str = ""
    author: str = ""
    timestamp: int = 0
    comment_id: int = 0


def parse_command(body: str) -> tuple[str, str]:
    """Return ``(kind, arg)``; ``kind`` is ``not-a-command`` for anything unrecognized."""
    match = _COMMAND_RE.fullmatch(body.strip())
    if not match:
        return NOT_A_COMMAND, ""
    kind, arg = match.group(1).lower(), match.group(2) or ""
    if kind not in KINDS or (kind in NEEDS_ARG) != bool(arg):
        return NOT_A_COMMAND, ""
    return kind, arg


def from_comment(comment: Comment) -> Command:
    kind, arg = parse_command(comment.body)
    return Command(kind, arg, comment.author, comment.timestamp, comment.id)


@dataclass
class Outcome:
    reply: str
    muted: Optional[bool] = None


def _valid_rules_text() -> str:
    return ", ".join(sorted(RULES))


def _resolve_rule(arg: str) -> Optional[str]:
    try:
        return parse_rule_id(arg)
    except UnknownRule:
        return None


def execute(cmd: Command, state: "RepoState", bot: "Bot") -> Outcome:
    """Compute the reply and state change for one command; post nothing."""
    if cmd.kind == HELP:
        return Outcome(bot.templates.help)
    if cmd.kind == STOP:
        return Outcome(
            "Understood. I will not post automatic feedback on this repository any more. Write `<go>` to resume.",
            muted=True,
        )
    if cmd.kind == GO:
        return Outcome("Welcome back! Automatic feedback is on again for this repository.", muted=False)
    if cmd.kind == MORE:
        return Outcome(_more(cmd.arg, state, bot))
    if cmd.kind in (RULE, SELECT):
        rule = _resolve_rule(cmd.arg)
        if rule is None:
            return Outcome(f"I do not know the rule `{cmd.arg}`. The rules I check are: {_valid_rules_text()}.")
        return Outcome(_rule(rule, state, bot) if cmd.kind == RULE else _select(rule, state))
    raise ValueError(f"cannot execute {cmd.kind}")


def _more(arg: str, state: "RepoState", bot: "Bot") -> str:
    if not _HEX_RE.fullmatch(arg):
        return f"`{arg}` does not look like a commit id. Use at least the first 4 characters of the hash."
    history = bot.forge_for(state.repo).list_new_commits(state.repo, None)
    matches = [c for c in history if c.hash.lower().startswith(arg.lower())]
    if not matches:
        return f"Sorry, I could not find a commit `{arg}` in this repository."
    if len(matches) > 1:
        return f"Several commits start with `{arg}`. Please give a few more characters."
    commit = matches[0].hash
    if not bot.store.has_commit(state.repo.key, commit):
        return f"I have not analyzed commit `{commit[:10]}` (starter code and my own commits are skipped)."
    rows = sorted(bot.store.query_by_commit(state.assignment, commit), key=lambda r: (r.file, r.line, r.rule))
    if not rows:
        return f"Commit `{commit[:10]}` had no code-quality issues."
    lines = [f"All issues I found in commit `{commit[:10]}`:", "", "| Rule | File | Line |", "| --- | --- | --- |"]
    lines += [f"| {r.rule} | {r.file} | {r.line} |" for r in rows]
    return "\n".join(lines)


def _rule(rule: str, state: "RepoState", bot: "Bot") -> str:
    analysis = bot.head_analysis(state)
    if analysis is None:
        return "I have not analyzed any of your code yet."
    found = analysis.violations_by_rule.get(rule, [])
    if not found:
        return f"Your latest version (`{analysis.commit[:10]}`) has no {rule} issues."
    return "\n".join(
        [f"{rule} ({RULES[rule]}) in your latest version (`{analysis.commit[:10]}`):", "", violation_table(found)]
    )


def _select(rule: str, state: "RepoState") -> str:
    """Rows shaped like stored records, generated from a hash; never read from the store."""
    seed = hashlib.sha256(f"{state.repo.key}|{rule}".encode()).hexdigest()
    lines = [
        "**SYNTHETIC DATA**: these rows are generated examples shaped like my stored records. "
        "They do not come from your repository or from the database.",
        "",
        "| User | Assignment | Rule | File | Line | Commit |",
        "| --- | --- | --- | --- | --- | --- |",
    ]
    for i in range(SYNTHETIC_ROWS):
        chunk = seed[i * 8 : i * 8 + 8]
        line = int(chunk[:4], 16) % 200 + 1
        lines.append(
            f"| synthetic-user-{i + 1} | {state.assignment} | {rule} | src/Example{i + 1}.java | {line} | {chunk}synthetic |"
        )
    return "\n".join(lines)


def process_comments(bot: "Bot", state: "RepoState") -> int:
    """Execute new commands on the command issue; return how many ran.

    For each comment: reply, log, then advance the cursor.  A comment whose
    id is already logged is a replay after a crash; its state change is
    re-applied but it is not answered twice.
    """
    if state.command_issue is None:
        return 0
    forge = bot.forge_for(state.repo)
    issue = state.issue("command", bot.settings.command_issue_title)
    executed = 0
    for comment in forge.list_comments(issue, state.last_command_comment):
        cmd = from_comment(comment)
        if comment.author != bot.settings.bot_login and cmd.kind != NOT_A_COMMAND:
            if bot.store.has_command(state.repo.key, comment.id):
                if cmd.kind in (STOP, GO):
                    state.muted = cmd.kind == STOP
            else:
                outcome = execute(cmd, state, bot)
                forge.post_comment(issue, outcome.reply)
                bot.store.append_command(
                    CommandRecord(
                        cmd.author, cmd.timestamp, state.assignment, cmd.kind, cmd.arg, state.repo.key, comment.id
                    )
                )
                if outcome.muted is not None:
                    state.muted = outcome.muted
                executed += 1
                logger.info("%s: executed <%s> from %s", state.repo, " ".join(filter(None, (cmd.kind, cmd.arg))), cmd.author)
        state.last_command_comment = comment.id
        bot.states.save(state)
    return executed
