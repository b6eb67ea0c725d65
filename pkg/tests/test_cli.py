from __future__ import annotations

import os
import signal
import subprocess
import sys
import time

import pytest

from codenudge.cli import main
from codenudge.forge import FakeForge
from codenudge.store import Store

from helpers import JAVA_FIXTURES, TEMPLATE_SOURCE, java_class, method_with


@pytest.fixture
def src(tmp_path):
    d = tmp_path / "src"
    d.mkdir()
    (d / "Clean.java").write_text(java_class("Clean", method_with(["System.out.println(1);"])))
    return d


def test_analyze_clean_exits_zero(src, capsys):
    assert main(["analyze", str(src)]) == 0
    assert "No violations" in capsys.readouterr().out


def test_analyze_directory_with_two_magic_numbers(src, capsys):
    (src / "pkg").mkdir()
    (src / "pkg" / "Bad.java").write_text(java_class("Bad", method_with(["int a = 42;", "int b = a * 37;", "use(a, b);"])))
    assert main(["analyze", str(src)]) == 1
    out = capsys.readouterr().out
    assert out.count("S109") == 2 and "pkg/Bad.java" in out


def test_analyze_rule_filter(capsys):
    target = JAVA_FIXTURES / "S2119" / "Dice.java"
    assert main(["analyze", str(target), "--rules", "s1155"]) == 0
    assert main(["analyze", str(target), "--rules", "S2119"]) == 1


def test_analyze_errors(tmp_path, capsys):
    assert main(["analyze", str(tmp_path / "missing")]) == 2
    assert main(["analyze", str(tmp_path), "--rules", "S1"]) == 2
    assert main(["analyze", str(tmp_path), "--commit", "abc"]) == 2
    assert "error" in capsys.readouterr().err


def test_analyze_fake_forge_repository(tmp_path, capsys):
    forge = FakeForge(tmp_path / "forge")
    repo = forge.create_repo("alice", "task-1")
    first = forge.push(repo, {"src/Game.java": TEMPLATE_SOURCE}, "teacher")
    forge.push(repo, {"src/Game.java": "class Game {}\n"}, "alice")
    root = str(tmp_path / "forge")
    assert main(["analyze", "alice/task-1", "--test-forge", root]) == 0
    assert main(["analyze", "alice/task-1", "--test-forge", root, "--commit", first]) == 1
    assert main(["analyze", "alice/task-1", "--test-forge", root, "--commit", "f" * 40]) == 2


def test_init_and_check_config(tmp_path, capsys):
    cfg = tmp_path / "cfg"
    assert main(["init", "--config", str(cfg), "--fake-root", str(tmp_path / "forge")]) == 0
    (cfg / "repos.txt").write_text("fake alice/task-1\n")
    assert main(["check-config", "--config", str(cfg), "--test-forge", str(tmp_path / "forge")]) == 0
    (cfg / "repos.txt").write_text("fake alice\n")
    assert main(["check-config", "--config", str(cfg), "--test-forge", str(tmp_path / "forge")]) == 2
    assert "repos.txt:1" in capsys.readouterr().out


def test_run_refuses_bad_config(tmp_path, capsys):
    cfg = tmp_path / "cfg"
    main(["init", "--config", str(cfg)])
    (cfg / "repos.txt").write_text("broken\n")
    assert main(["run", "--config", str(cfg), "--test-forge", str(tmp_path / "forge"), "--once"]) == 2


def seeded_config(tmp_path):
    forge = FakeForge(tmp_path / "forge")
    repo = forge.create_repo("alice", "task-1")
    forge.push(repo, {"src/Game.java": TEMPLATE_SOURCE}, "teacher", timestamp=1000)
    cfg = tmp_path / "cfg"
    main(["init", "--config", str(cfg)])
    (cfg / "repos.txt").write_text("fake alice/task-1\n")
    return forge, repo, cfg


def test_run_once_then_report(tmp_path, capsys):
    forge, repo, cfg = seeded_config(tmp_path)
    fargs = ["--config", str(cfg), "--test-forge", str(tmp_path / "forge")]
    assert main(["run", *fargs, "--once"]) == 0
    forge.push(repo, {"src/Game.java": TEMPLATE_SOURCE.replace("score;", "score + 17;")}, "alice", timestamp=2000)
    assert main(["run", *fargs, "--once"]) == 0
    assert main(["run", *fargs, "--once"]) == 0
    assert [r.rule for r in Store(cfg / "store").violations()] == ["S109"]

    assert main(["report", *fargs, "--out", str(tmp_path / "r1")]) == 0
    assert main(["report", *fargs, "--out", str(tmp_path / "r2")]) == 0
    for name in ("summary.csv", "deltas.csv", "series.csv"):
        assert (tmp_path / "r1" / name).read_bytes() == (tmp_path / "r2" / name).read_bytes()
    # a single analyzed commit has no pair to compare yet
    assert (tmp_path / "r1" / "summary.csv").read_text() == "rule,added,fixed\n"

    assert main(["report", *fargs, "--assignment", "task-9", "--out", str(tmp_path / "r3")]) == 0
    assert (tmp_path / "r3" / "deltas.csv").read_text().count("\n") == 1


def test_report_does_not_modify_store(tmp_path):
    forge, repo, cfg = seeded_config(tmp_path)
    fargs = ["--config", str(cfg), "--test-forge", str(tmp_path / "forge")]
    main(["run", *fargs, "--once"])
    store_file = cfg / "store" / "violations.jsonl"
    store_file.parent.mkdir(parents=True, exist_ok=True)
    with open(store_file, "ab") as fh:
        fh.write(b'{"v": 1, "us')
    before = store_file.read_bytes()
    assert main(["report", *fargs, "--out", str(tmp_path / "r")]) == 0
    assert store_file.read_bytes() == before


def test_run_stops_on_sigterm(tmp_path):
    _, _, cfg = seeded_config(tmp_path)
    env = dict(os.environ, PYTHONUNBUFFERED="1")
    proc = subprocess.Popen(
        [sys.executable, "-m", "codenudge.cli", "run", "--config", str(cfg), "--test-forge", str(tmp_path / "forge")],
        env=env,
    )
    deadline = time.monotonic() + 10
    state_dir = cfg / "store" / "state"
    while not (state_dir.exists() and any(state_dir.iterdir())) and time.monotonic() < deadline:
        time.sleep(0.05)
    proc.send_signal(signal.SIGTERM)
    assert proc.wait(timeout=10) == 0
