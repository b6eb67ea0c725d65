"""Per-repository monitoring: enrollment, the poll tick, and the coordinator loop."""

from __future__ import annotations

import json
import logging
import os
import tempfile
import threading
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Optional, Sequence

from . import commands
from .config import Config, Settings
from .forge import (
    DEFAULT_BASE_URL,
    FAKE_HOST,
    CommitInfo,
    FakeForge,
    Forge,
    ForgeError,
    GitHubForge,
    IssueRef,
    RepoRef,
    UnknownSince,
)
from .rules import Violation, check_source, is_java_path
from .store import CommitRecord, Store, ViolationRecord
from .templates import FeedbackMessage, TemplateSet

logger = logging.getLogger(__name__)

Triple = tuple[str, str, str]

FEEDBACK_ISSUE_BODY = "Automatic code-quality feedback on your pushes is posted here."
COMMAND_ISSUE_BODY = "Write commands for the feedback bot here. Start with `<help>`."


@dataclass
class RepoState:
    repo: RepoRef
    assignment: str
    last_analyzed: Optional[str] = None
    feedback_issue: Optional[int] = None
    command_issue: Optional[int] = None
    last_command_comment: Optional[int] = None
    muted: bool = False
    baseline: frozenset[Triple] = frozenset()
    baseline_ready: bool = False
    baseline_commit: Optional[str] = None

    def issue(self, which: str, title: str) -> IssueRef:
        number = self.feedback_issue if which == "feedback" else self.command_issue
        if number is None:
            raise RuntimeError(f"{self.repo} has no {which} issue yet")
        return IssueRef(self.repo, number, title)

    def to_json(self) -> dict:
        return {
            "repo": [self.repo.host, self.repo.owner, self.repo.name],
            "assignment": self.assignment,
            "last_analyzed": self.last_analyzed,
            "feedback_issue": self.feedback_issue,
            "command_issue": self.command_issue,
            "last_command_comment": self.last_command_comment,
            "muted": self.muted,
            "baseline": sorted(list(t) for t in self.baseline),
            "baseline_ready": self.baseline_ready,
            "baseline_commit": self.baseline_commit,
        }

    @classmethod
    def from_json(cls, data: dict) -> "RepoState":
        return cls(
            repo=RepoRef(*data["repo"]),
            assignment=data["assignment"],
            last_analyzed=data["last_analyzed"],
            feedback_issue=data["feedback_issue"],
            command_issue=data["command_issue"],
            last_command_comment=data["last_command_comment"],
            muted=data["muted"],
            baseline=frozenset(tuple(t) for t in data["baseline"]),
            baseline_ready=data["baseline_ready"],
            baseline_commit=data.get("baseline_commit"),
        )


class StateStore:
    """One JSON file per repository, replaced atomically on save."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)

    def path(self, repo: RepoRef) -> Path:
        return self.directory / f"{repo.key}.json"

    def load(self, repo: RepoRef) -> Optional[RepoState]:
        path = self.path(repo)
        if not path.exists():
            return None
        return RepoState.from_json(json.loads(path.read_text(encoding="utf-8")))

    def save(self, state: RepoState) -> None:
        self.directory.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=self.directory, prefix=".state-")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(state.to_json(), fh, sort_keys=True)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, self.path(state.repo))
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise


@dataclass
class CommitAnalysis:
    repo: RepoRef
    commit: str
    author: str
    timestamp: int
    violations_by_rule: dict[str, list[Violation]] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(len(vs) for vs in self.violations_by_rule.values())

    def violations(self) -> list[Violation]:
        found = [v for vs in self.violations_by_rule.values() for v in vs]
        return sorted(found, key=lambda v: v.sort_key)

    def counts(self) -> dict[str, int]:
        return {rule: len(vs) for rule, vs in self.violations_by_rule.items() if vs}


@dataclass
class TickResult:
    analyzed: list[str] = field(default_factory=list)
    posted: Optional[int] = None
    rule: Optional[str] = None
    commands: int = 0


def triple(v: Violation) -> Triple:
    return (v.rule, v.file, v.line_text)


def filter_baseline(violations: Iterable[Violation], baseline: Iterable[Triple]) -> list[Violation]:
    """Drop violations whose (rule, file, line text) the starter code already had."""
    baseline = frozenset(baseline)
    return [v for v in violations if triple(v) not in baseline]


def select_prevalent(analysis: CommitAnalysis) -> Optional[str]:
    """The rule with most violations; ties go to the smallest rule id."""
    counts = analysis.counts()
    if not counts:
        return None
    return min(counts, key=lambda rule: (-counts[rule], rule))


def render_feedback(rule: str, violations: Sequence[Violation], templates: TemplateSet) -> FeedbackMessage:
    return templates.render(rule, violations)


def render_clean(templates: TemplateSet) -> str:
    return templates.clean


def analyze_files(files: Mapping[str, str], enabled: Iterable[str]) -> list[Violation]:
    enabled = frozenset(enabled)
    found: list[Violation] = []
    for path in sorted(files):
        if not is_java_path(path):
            continue
        try:
            found.extend(check_source(files[path], path, enabled))
        except Exception:  # a checker bug must not hide the rest of the push
            logger.exception("analysis of %s failed", path)
    found.sort(key=lambda v: v.sort_key)
    return found


class Bot:
    """Services repositories one tick at a time.  Callers serialize ticks per repository."""

    def __init__(
        self,
        forge_for: Callable[[RepoRef], Forge],
        store: Store,
        templates: TemplateSet,
        settings: Settings,
        states: StateStore,
    ):
        self.forge_for = forge_for
        self.store = store
        self.templates = templates
        self.settings = settings
        self.states = states

    # -- enrollment ----------------------------------------------------------

    def enroll(self, repo: RepoRef) -> RepoState:
        state = self.states.load(repo) or RepoState(repo, self.settings.assignment_of(repo))
        forge = self.forge_for(repo)
        if state.feedback_issue is None:
            issue = forge.open_issue(repo, self.settings.feedback_issue_title, FEEDBACK_ISSUE_BODY)
            self._greet(forge, issue, self.templates.greeting)
            state.feedback_issue = issue.number
            self.states.save(state)
        if state.command_issue is None:
            issue = forge.open_issue(repo, self.settings.command_issue_title, COMMAND_ISSUE_BODY)
            self._greet(forge, issue, self.templates.help)
            state.command_issue = issue.number
            self.states.save(state)
        if not state.baseline_ready:
            self._compute_baseline(forge, state)
        return state

    def _greet(self, forge: Forge, issue: IssueRef, text: str) -> None:
        """Post ``text`` unless the bot already commented, so re-enrollment stays quiet."""
        if not any(c.author == self.settings.bot_login for c in forge.list_comments(issue)):
            forge.post_comment(issue, text)

    def _compute_baseline(self, forge: Forge, state: RepoState) -> None:
        history = forge.list_new_commits(state.repo, None)
        if not history:
            return
        first = history[0]
        violations = analyze_files(forge.read_tree(state.repo, first.hash), self.settings.enabled_rules)
        state.baseline = frozenset(triple(v) for v in violations)
        state.baseline_ready = True
        state.last_analyzed = first.hash
        state.baseline_commit = first.hash
        self.states.save(state)
        logger.info("%s: baseline of %d violations from %s", state.repo, len(state.baseline), first.hash[:10])

    # -- analysis ------------------------------------------------------------

    def analyze(self, state: RepoState, commit: CommitInfo) -> CommitAnalysis:
        forge = self.forge_for(state.repo)
        files = forge.read_tree(state.repo, commit.hash)
        kept = filter_baseline(analyze_files(files, self.settings.enabled_rules), state.baseline)
        by_rule: dict[str, list[Violation]] = {}
        for v in kept:
            by_rule.setdefault(v.rule, []).append(v)
        return CommitAnalysis(state.repo, commit.hash, commit.author, commit.timestamp, by_rule)

    def head_analysis(self, state: RepoState) -> Optional[CommitAnalysis]:
        """Fresh analysis of the last analyzed commit, for ``<rule>``."""
        if state.last_analyzed is None:
            return None
        forge = self.forge_for(state.repo)
        info = next((c for c in forge.list_new_commits(state.repo, None) if c.hash == state.last_analyzed), None)
        if info is None:
            return None
        return self.analyze(state, info)

    def _persist(self, state: RepoState, analysis: CommitAnalysis) -> None:
        if state.muted and not self.settings.store_muted:
            return
        self.store.append_violations(
            ViolationRecord(analysis.author, state.assignment, v.rule, v.file, v.line, analysis.commit, analysis.timestamp)
            for v in analysis.violations()
        )
        self.store.append_commit(
            CommitRecord(analysis.author, state.assignment, analysis.commit, analysis.timestamp, state.repo.key)
        )

    # -- the tick ------------------------------------------------------------

    def tick(self, repo: RepoRef) -> TickResult:
        """Handle commands, then analyze new commits and post at most one comment.

        Forge errors propagate; whatever was saved before them stays valid and
        the rest is retried on the next tick.
        """
        result = TickResult()
        state = self.enroll(repo)
        result.commands = commands.process_comments(self, state)
        if not state.baseline_ready:
            return result
        forge = self.forge_for(repo)
        try:
            new = forge.list_new_commits(repo, state.last_analyzed)
        except UnknownSince:
            logger.warning("%s: history rewritten, rescanning all commits", repo)
            new = [
                c
                for c in forge.list_new_commits(repo, None)
                if c.hash != state.baseline_commit and not self.store.has_commit(repo.key, c.hash)
            ]
        if not new:
            return result
        student = [c for c in new if c.author != self.settings.bot_login]
        analyses = [self.analyze(state, c) for c in student]
        for analysis in analyses:
            self._persist(state, analysis)
        result.analyzed = [a.commit for a in analyses]
        if analyses and not state.muted:
            head = analyses[-1]
            rule = select_prevalent(head)
            if rule is None:
                body = render_clean(self.templates)
            else:
                body = render_feedback(rule, head.violations_by_rule[rule], self.templates).rendered
            issue = state.issue("feedback", self.settings.feedback_issue_title)
            result.posted = forge.post_comment(issue, body)
            result.rule = rule
        state.last_analyzed = new[-1].hash
        self.states.save(state)
        return result


# -- coordinator -------------------------------------------------------------


def github_base_url(host: str) -> str:
    """Map a repo-list host to an API base URL."""
    if "://" in host:
        return host
    if host in ("github.com", "api.github.com"):
        return DEFAULT_BASE_URL
    return f"https://{host}/api/v3"


class ForgeRegistry:
    def __init__(self, config: Config):
        self.config = config
        self._forges: dict[str, Forge] = {}
        self._lock = threading.Lock()

    def __call__(self, repo: RepoRef) -> Forge:
        with self._lock:
            forge = self._forges.get(repo.host)
            if forge is None:
                forge = self._make(repo.host)
                self._forges[repo.host] = forge
            return forge

    def _make(self, host: str) -> Forge:
        if host == FAKE_HOST:
            root = self.config.fake_root
            if root is None:
                raise ForgeError("fake repositories listed but no fake forge configured")
            return FakeForge(root, bot_login=self.config.settings.bot_login)
        base = self.config.settings.base_url if host == DEFAULT_BASE_URL else github_base_url(host)
        return GitHubForge(base, token=self.config.token())


class Coordinator:
    """Owns the monitoring list and runs at most one tick per repository at a time."""

    def __init__(self, config: Config, forge_for: Optional[Callable[[RepoRef], Forge]] = None):
        self.config = config
        self.store = Store(config.store_dir)
        self.bot = Bot(
            forge_for or ForgeRegistry(config),
            self.store,
            config.templates(),
            config.settings,
            StateStore(config.state_dir),
        )
        self.repos: list[RepoRef] = []
        self._repos_mtime: Optional[float] = None
        self._locks: dict[RepoRef, threading.Lock] = {}
        self._in_flight: dict[RepoRef, Future] = {}
        self._executor = ThreadPoolExecutor(max_workers=max(1, config.settings.workers), thread_name_prefix="tick")

    def reload_repos(self) -> bool:
        """Re-read the repository list if it changed; keep the old list if it is broken."""
        path = self.config.repos_path
        try:
            mtime = path.stat().st_mtime_ns
        except FileNotFoundError:
            mtime = None
        if mtime == self._repos_mtime:
            return False
        try:
            repos = self.config.read_repos()
        except (ValueError, OSError) as exc:
            logger.error("repository list not reloaded: %s", exc)
            return False
        self._repos_mtime = mtime
        added = set(repos) - set(self.repos)
        for repo in sorted(added):
            logger.info("monitoring %s", repo)
        self.repos = repos
        return True

    def _tick_one(self, repo: RepoRef) -> Optional[TickResult]:
        lock = self._locks.setdefault(repo, threading.Lock())
        if not lock.acquire(blocking=False):
            return None
        try:
            return self.bot.tick(repo)
        except (ForgeError, OSError) as exc:
            logger.warning("%s: tick failed, retrying next round: %s", repo, exc)
        except Exception:
            logger.exception("%s: tick crashed", repo)
        finally:
            lock.release()
        return None

    def run_once(self) -> dict[RepoRef, Optional[TickResult]]:
        """Tick every repository once and wait for all of them."""
        self.reload_repos()
        futures = {repo: self._executor.submit(self._tick_one, repo) for repo in self.repos}
        return {repo: f.result() for repo, f in futures.items()}

    def run(self, stop: threading.Event) -> None:
        """Poll until ``stop`` is set, then let in-flight ticks finish."""
        interval = self.config.settings.poll_interval
        logger.info("polling every %.2fs", interval)
        try:
            while not stop.is_set():
                self.reload_repos()
                for repo in self.repos:
                    running = self._in_flight.get(repo)
                    if running is None or running.done():
                        self._in_flight[repo] = self._executor.submit(self._tick_one, repo)
                stop.wait(interval)
        finally:
            self.close()

    def close(self) -> None:
        self._executor.shutdown(wait=True)
