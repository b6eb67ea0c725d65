"""Command-line entry point: ``codenudge run|analyze|report|check-config|init``."""

from __future__ import annotations

import argparse
import logging
import signal
import sys
import threading
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .bot import Coordinator, analyze_files
from .config import ConfigError, check_config, init_config, load_config
from .effectiveness import report
from .forge import FakeForge, ForgeError, RepoRef
from .rules import ALL_RULES, UnknownRule, Violation, is_java_path, parse_rule_id
from .store import Store
from .templates import TemplateError

EXIT_OK, EXIT_FOUND, EXIT_ERROR = 0, 1, 2

logger = logging.getLogger("codenudge")


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", default=".", help="config directory (default: current directory)")
    parser.add_argument("--test-forge", metavar="DIR", help="use the fake forge in DIR and shrink the poll interval")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="codenudge", description="Code-quality feedback bot for student Java repositories.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="poll the monitored repositories until interrupted")
    _common(run)
    run.add_argument("--interval", type=float, help="poll interval in seconds")
    run.add_argument("--once", action="store_true", help="tick every repository once and exit")

    analyze = sub.add_parser("analyze", help="analyze a local path or a fake-forge repository, no posting")
    analyze.add_argument("target", help="file, directory, or owner/name with --test-forge")
    analyze.add_argument("--commit", help="commit to analyze (fake-forge repositories; default: head)")
    analyze.add_argument("--rules", help="comma-separated rule ids (default: all)")
    analyze.add_argument("--test-forge", metavar="DIR", help="read the repository from the fake forge in DIR")

    rep = sub.add_parser("report", help="write the added/fixed effectiveness report")
    _common(rep)
    rep.add_argument("--assignment", help="only this assignment")
    rep.add_argument("--out", help="output directory (default: <config>/report)")

    check = sub.add_parser("check-config", help="validate a config directory")
    _common(check)

    init = sub.add_parser("init", help="create a config directory with default templates")
    init.add_argument("--config", default=".", help="directory to create")
    init.add_argument("--fake-root", help="fake forge directory to record in settings")
    return parser


def _print_violations(violations: Sequence[Violation]) -> None:
    if not violations:
        print("No violations.")
        return
    width = max(len(v.file) for v in violations)
    print(f"{'FILE':<{width}}  {'LINE':>5}  {'RULE':<6} CODE")
    for v in violations:
        print(f"{v.file:<{width}}  {v.line:>5}  {v.rule:<6} {v.line_text}")


def _local_files(target: Path) -> dict[str, str]:
    if target.is_file():
        return {target.name: target.read_text(encoding="utf-8", errors="replace")}
    if target.is_dir():
        return {
            p.relative_to(target).as_posix(): p.read_text(encoding="utf-8", errors="replace")
            for p in sorted(target.rglob("*"))
            if p.is_file() and is_java_path(p.name)
        }
    raise FileNotFoundError(f"no such file or directory: {target}")


def cmd_analyze(args: argparse.Namespace) -> int:
    try:
        rules = ALL_RULES if not args.rules else {parse_rule_id(r) for r in args.rules.split(",") if r.strip()}
    except UnknownRule as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    try:
        if args.test_forge:
            forge = FakeForge(args.test_forge)
            owner, _, name = args.target.partition("/")
            repo = RepoRef("fake", owner, name)
            commit = args.commit
            if commit is None:
                history = forge.list_new_commits(repo, None)
                if not history:
                    print("Repository has no commits.")
                    return EXIT_OK
                commit = history[-1].hash
            files = forge.read_tree(repo, commit)
        else:
            if args.commit:
                print("error: --commit needs --test-forge", file=sys.stderr)
                return EXIT_ERROR
            files = _local_files(Path(args.target))
    except (OSError, ForgeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    violations = analyze_files(files, rules)
    _print_violations(violations)
    return EXIT_FOUND if violations else EXIT_OK


def cmd_check_config(args: argparse.Namespace) -> int:
    problems = check_config(args.config, args.test_forge)
    for problem in problems:
        print(f"error: {problem}")
    if not problems:
        print("Configuration OK.")
    return EXIT_ERROR if problems else EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    try:
        config = load_config(args.config, args.test_forge)
        store = Store(config.store_dir, readonly=True)
        out = Path(args.out) if args.out else config.root / "report"
        for path in report(store, out, args.assignment):
            print(path)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    problems = check_config(args.config, args.test_forge)
    if problems:
        for problem in problems:
            print(f"error: {problem}", file=sys.stderr)
        return EXIT_ERROR
    try:
        config = load_config(args.config, args.test_forge, args.interval)
        coordinator = Coordinator(config)
    except (ConfigError, TemplateError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if args.once:
        coordinator.run_once()
        coordinator.close()
        return EXIT_OK
    stop = threading.Event()

    def _stop(signum: int, _frame: object) -> None:
        logger.info("received %s, finishing in-flight ticks", signal.Signals(signum).name)
        stop.set()

    signal.signal(signal.SIGINT, _stop)
    signal.signal(signal.SIGTERM, _stop)
    coordinator.run(stop)
    return EXIT_OK


def cmd_init(args: argparse.Namespace) -> int:
    root = init_config(args.config, args.fake_root)
    print(f"Initialized {root}")
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "analyze": cmd_analyze,
    "report": cmd_report,
    "check-config": cmd_check_config,
    "init": cmd_init,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
