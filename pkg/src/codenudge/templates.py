"""Feedback message templates.

A template directory holds ``greeting.md``, ``clean.md``, ``help.md`` and one
``<RULE>.md`` per rule.  Rule templates may use the placeholders below; the
text after a line reading ``<!-- example -->`` is cut off and substituted for
``{{EXAMPLE}}``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .rules import ALL_RULES, RULES, Violation

PLACEHOLDERS = frozenset({"RULE_ID", "RULE_TITLE", "VIOLATION_TABLE", "EXAMPLE"})
REQUIRED_PLACEHOLDER = "VIOLATION_TABLE"
EXAMPLE_MARKER = "<!-- example -->"
FIXED_TEMPLATES = ("greeting", "clean", "help")
SUFFIX = ".md"

_PLACEHOLDER_RE = re.compile(r"\{\{\s*([^{}]*?)\s*\}\}")
_RULE_ID_RE = re.compile(r"\bS\d{3,4}\b")


class TemplateError(ValueError):
    def __init__(self, problems: Sequence[str]):
        super().__init__("; ".join(problems))
        self.problems = list(problems)


@dataclass(frozen=True)
class FeedbackMessage:
    rule: str
    presentation: str
    rows: tuple[tuple[str, int, str], ...]
    example: str
    rendered: str


def _escape_cell(text: str) -> str:
    return text.replace("\\", "\\\\").replace("|", "\\|").replace("`", "'")


def violation_table(violations: Iterable[Violation]) -> str:
    lines = ["| File | Line | Code |", "| --- | --- | --- |"]
    for v in sorted(violations, key=lambda v: (v.file, v.line)):
        lines.append(f"| {_escape_cell(v.file)} | {v.line} | `{_escape_cell(v.line_text)}` |")
    return "\n".join(lines)


def _split_example(text: str) -> tuple[str, str]:
    head, marker, tail = text.partition(EXAMPLE_MARKER)
    if not marker:
        return text.rstrip() + "\n", ""
    return head.rstrip() + "\n", tail.strip("\n")


class TemplateSet:
    """A validated set of templates.  Build with :meth:`load`."""

    def __init__(self, texts: Mapping[str, str], enabled: Iterable[str] = ALL_RULES):
        self.enabled = frozenset(enabled)
        problems = validate_texts(texts, self.enabled)
        if problems:
            raise TemplateError(problems)
        self._texts = dict(texts)

    @classmethod
    def load(cls, directory: str | Path, enabled: Iterable[str] = ALL_RULES) -> "TemplateSet":
        enabled = frozenset(enabled)
        texts, problems = read_directory(directory, enabled)
        if problems:
            raise TemplateError(problems)
        return cls(texts, enabled)

    @classmethod
    def default(cls) -> "TemplateSet":
        return cls(default_texts())

    @property
    def greeting(self) -> str:
        return self._texts["greeting"]

    @property
    def clean(self) -> str:
        return self._texts["clean"]

    @property
    def help(self) -> str:
        return self._texts["help"]

    def render(self, rule: str, violations: Sequence[Violation]) -> FeedbackMessage:
        if rule not in self._texts:
            raise KeyError(f"no template for rule {rule}")
        stray = {v.rule for v in violations} - {rule}
        if stray:
            raise ValueError(f"violations of {sorted(stray)} passed to the {rule} template")
        body, example = _split_example(self._texts[rule])
        table = violation_table(violations)
        values = {"RULE_ID": rule, "RULE_TITLE": RULES[rule], "VIOLATION_TABLE": table, "EXAMPLE": example}
        rendered = _PLACEHOLDER_RE.sub(lambda m: values[m.group(1)], body)
        presentation = body.split("{{", 1)[0].strip()
        rows = tuple((v.file, v.line, v.line_text) for v in sorted(violations, key=lambda v: (v.file, v.line)))
        return FeedbackMessage(rule, presentation, rows, example, rendered)


def default_directory() -> Path:
    return Path(str(resources.files("codenudge") / "default_templates"))


def default_texts() -> dict[str, str]:
    texts, problems = read_directory(default_directory(), ALL_RULES)
    assert not problems, problems
    return texts


def read_directory(directory: str | Path, enabled: Iterable[str]) -> tuple[dict[str, str], list[str]]:
    directory = Path(directory)
    texts: dict[str, str] = {}
    problems: list[str] = []
    if not directory.is_dir():
        return texts, [f"template directory {directory} does not exist"]
    for name in (*FIXED_TEMPLATES, *sorted(enabled)):
        path = directory / f"{name}{SUFFIX}"
        if not path.is_file():
            what = f"rule {name}" if name in ALL_RULES else f"the {name} message"
            problems.append(f"missing template for {what}: {path}")
            continue
        texts[name] = path.read_text(encoding="utf-8")
    return texts, problems


def validate_texts(texts: Mapping[str, str], enabled: Iterable[str]) -> list[str]:
    problems: list[str] = []
    for name in (*FIXED_TEMPLATES, *sorted(enabled)):
        text = texts.get(name)
        if text is None:
            problems.append(f"missing template for {'rule ' + name if name in ALL_RULES else 'the ' + name + ' message'}")
            continue
        if not text.strip():
            problems.append(f"template {name} is empty")
        body, example = _split_example(text) if name in ALL_RULES else (text, "")
        used = {m.group(1) for m in _PLACEHOLDER_RE.finditer(body)}
        for bad in sorted(used - PLACEHOLDERS):
            problems.append(f"template {name}: unknown placeholder {{{{{bad}}}}}")
        if _PLACEHOLDER_RE.search(example):
            problems.append(f"template {name}: placeholders are not allowed in the example section")
        if name in ALL_RULES:
            if REQUIRED_PLACEHOLDER not in used:
                problems.append(f"template {name}: missing {{{{{REQUIRED_PLACEHOLDER}}}}}")
            others = set(_RULE_ID_RE.findall(text)) - {name}
            if others:
                problems.append(f"template {name}: mentions other rules {', '.join(sorted(others))}")
        elif name != "help":
            if used:
                problems.append(f"template {name}: placeholders are only allowed in rule templates")
            ids = set(_RULE_ID_RE.findall(text))
            if ids:
                problems.append(f"template {name}: must not mention rule ids ({', '.join(sorted(ids))})")
    return problems
