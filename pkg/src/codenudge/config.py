"""Deployment configuration: one directory holding everything the bot needs.

::

    <config>/
        settings.toml    optional, see Settings
        repos.txt        one repository per line: ``host owner/name``
        templates/       feedback templates
        store/           record logs and per-repository state
"""

from __future__ import annotations

import json
import os
import re
import shutil
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .forge import DEFAULT_BASE_URL, FAKE_HOST, RepoRef
from .rules import ALL_RULES, UnknownRule, parse_rule_id
from .templates import TemplateError, TemplateSet, default_directory

SETTINGS_FILE = "settings.toml"
REPOS_FILE = "repos.txt"
TEMPLATES_DIR = "templates"
STORE_DIR = "store"

DEFAULT_POLL_INTERVAL = 5.0
# Test mode scales the poll interval by this factor: 5 s becomes 0.1 s.
TEST_MODE_SCALE = 0.02


class ConfigError(ValueError):
    def __init__(self, problems: list[str]):
        super().__init__("\n".join(problems))
        self.problems = problems


@dataclass
class Settings:
    poll_interval: float = DEFAULT_POLL_INTERVAL
    base_url: str = DEFAULT_BASE_URL
    token_env: str = "GITHUB_TOKEN"
    bot_login: str = "sobo-bot"
    assignment_pattern: str = r"(task-\d+)$"
    store_muted: bool = True
    enabled_rules: tuple[str, ...] = tuple(sorted(ALL_RULES))
    feedback_issue_title: str = "SOBO - Commit Analyzer"
    command_issue_title: str = "SOBO - Commands"
    fake_root: Optional[str] = None
    workers: int = 4

    def assignment_of(self, repo: RepoRef) -> str:
        match = re.search(self.assignment_pattern, repo.name)
        if not match:
            return repo.name
        return match.group(1) if match.groups() else match.group(0)


def parse_settings(data: dict) -> tuple[Settings, list[str]]:
    settings = Settings()
    problems: list[str] = []
    known = {f.name for f in fields(Settings)}
    for key, value in data.items():
        if key not in known:
            problems.append(f"{SETTINGS_FILE}: unknown setting {key!r}")
            continue
        if key == "enabled_rules":
            try:
                value = tuple(sorted({parse_rule_id(str(r)) for r in value}))
            except UnknownRule as exc:
                problems.append(f"{SETTINGS_FILE}: {exc}")
                continue
        elif key == "poll_interval":
            if not isinstance(value, (int, float)) or value <= 0:
                problems.append(f"{SETTINGS_FILE}: poll_interval must be a positive number")
                continue
            value = float(value)
        elif key == "assignment_pattern":
            try:
                re.compile(value)
            except re.error as exc:
                problems.append(f"{SETTINGS_FILE}: bad assignment_pattern: {exc}")
                continue
        setattr(settings, key, value)
    return settings, problems


def parse_repo_list(text: str) -> tuple[list[RepoRef], list[str]]:
    """Parse ``host owner/name`` lines; ``owner/name`` alone means github.com."""
    repos: list[RepoRef] = []
    problems: list[str] = []
    seen: set[RepoRef] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) == 1:
            host, slug = DEFAULT_BASE_URL, parts[0]
        elif len(parts) == 2:
            host, slug = parts
        else:
            problems.append(f"{REPOS_FILE}:{lineno}: expected 'host owner/name', got {raw.strip()!r}")
            continue
        host = host.rstrip(":") if host.rstrip(":") == FAKE_HOST else host.rstrip("/")
        owner, sep, name = slug.partition("/")
        if not sep or not owner or not name or "/" in name:
            problems.append(f"{REPOS_FILE}:{lineno}: malformed repository {slug!r}")
            continue
        repo = RepoRef(host, owner, name)
        if repo not in seen:
            seen.add(repo)
            repos.append(repo)
    return repos, problems


@dataclass
class Config:
    root: Path
    settings: Settings = field(default_factory=Settings)
    test_forge: Optional[Path] = None

    @property
    def repos_path(self) -> Path:
        return self.root / REPOS_FILE

    @property
    def templates_dir(self) -> Path:
        return self.root / TEMPLATES_DIR

    @property
    def store_dir(self) -> Path:
        return self.root / STORE_DIR

    @property
    def state_dir(self) -> Path:
        return self.store_dir / "state"

    @property
    def fake_root(self) -> Optional[Path]:
        if self.test_forge is not None:
            return self.test_forge
        if self.settings.fake_root:
            return (self.root / self.settings.fake_root).resolve()
        return None

    def token(self) -> Optional[str]:
        return os.environ.get(self.settings.token_env) or None

    def read_repos(self) -> list[RepoRef]:
        if not self.repos_path.exists():
            return []
        repos, problems = parse_repo_list(self.repos_path.read_text(encoding="utf-8"))
        if problems:
            raise ConfigError(problems)
        return repos

    def templates(self) -> TemplateSet:
        return TemplateSet.load(self.templates_dir, self.settings.enabled_rules)


def load_config(
    root: str | Path,
    test_forge: Optional[str | Path] = None,
    interval: Optional[float] = None,
) -> Config:
    """Read settings.  Test mode scales the interval unless one is given."""
    root = Path(root)
    data: dict = {}
    settings_path = root / SETTINGS_FILE
    if settings_path.exists():
        try:
            data = tomllib.loads(settings_path.read_text(encoding="utf-8"))
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError([f"{SETTINGS_FILE}: {exc}"]) from None
    settings, problems = parse_settings(data)
    if problems:
        raise ConfigError(problems)
    if test_forge is not None:
        settings.poll_interval *= TEST_MODE_SCALE
    if interval is not None:
        if interval <= 0:
            raise ConfigError(["--interval must be positive"])
        settings.poll_interval = interval
    return Config(root, settings, Path(test_forge) if test_forge is not None else None)


def check_config(root: str | Path, test_forge: Optional[str | Path] = None) -> list[str]:
    """Every problem that would stop ``run`` from starting, one per line."""
    root = Path(root)
    if not root.is_dir():
        return [f"config directory {root} does not exist"]
    try:
        config = load_config(root, test_forge)
    except ConfigError as exc:
        return exc.problems
    problems: list[str] = []
    if not config.repos_path.exists():
        problems.append(f"missing repository list {config.repos_path}")
        repos: list[RepoRef] = []
    else:
        repos, repo_problems = parse_repo_list(config.repos_path.read_text(encoding="utf-8"))
        problems.extend(repo_problems)
    try:
        config.templates()
    except TemplateError as exc:
        problems.extend(exc.problems)
    if any(r.host != FAKE_HOST for r in repos) and not config.token():
        problems.append(f"environment variable {config.settings.token_env} is not set")
    if any(r.host == FAKE_HOST for r in repos) and config.fake_root is None:
        problems.append("repository list names fake repositories but no fake forge is configured")
    problems.extend(_check_writable(config.store_dir))
    return problems


def _check_writable(directory: Path) -> list[str]:
    try:
        directory.mkdir(parents=True, exist_ok=True)
        probe = directory / ".write-probe"
        probe.write_text("ok")
        probe.unlink()
    except OSError as exc:
        return [f"store directory {directory} is not writable: {exc.strerror or exc}"]
    return []


def init_config(root: str | Path, fake_root: Optional[str] = None) -> Path:
    """Create a config directory with the default templates and an empty repo list."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    if not (root / TEMPLATES_DIR).exists():
        shutil.copytree(default_directory(), root / TEMPLATES_DIR, ignore=shutil.ignore_patterns("__*"))
    repos = root / REPOS_FILE
    if not repos.exists():
        repos.write_text("# one repository per line: host owner/name\n", encoding="utf-8")
    settings = root / SETTINGS_FILE
    if not settings.exists():
        lines = [f"poll_interval = {DEFAULT_POLL_INTERVAL}", 'bot_login = "sobo-bot"']
        if fake_root:
            lines.append(f"fake_root = {json.dumps(str(fake_root))}")
        settings.write_text("\n".join(lines) + "\n", encoding="utf-8")
    (root / STORE_DIR).mkdir(exist_ok=True)
    return root
