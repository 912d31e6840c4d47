"""Shared fixtures and the acceptance-criteria summary hook."""

import re

import pytest

from tagsel.learner import TrainConfig
from tagsel.synth import SynthConfig, generate_treebank
from tagsel.templates import builtin_templates


@pytest.fixture(scope="session")
def templates_all():
    return builtin_templates()


@pytest.fixture(scope="session")
def tiny_treebank():
    """60 deterministic synthetic sentences with case marking."""
    return generate_treebank(SynthConfig(sentences=60, seed=11, with_case=True))


@pytest.fixture(scope="session")
def plain_treebank():
    """80 deterministic synthetic sentences, POS only."""
    return generate_treebank(SynthConfig(sentences=80, seed=5))


@pytest.fixture()
def fast_config():
    return TrainConfig(iterations=4, seed=1)


_CRITERION = re.compile(r"test_criterion_(\d+)_(\w+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion."""
    lines = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            m = _CRITERION.search(getattr(rep, "nodeid", ""))
            if m and "test_acceptance" in rep.nodeid:
                num = int(m.group(1))
                label = m.group(2).replace("_", " ")
                verdict = "PASS" if outcome == "passed" else "FAIL"
                lines[num] = f"CRITERION {num:2d} [{verdict}] {label}"
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for num in sorted(lines):
            terminalreporter.write_line(lines[num])
