"""Shared test configuration.

Registers a hypothesis profile suited to numerical property tests (no
deadline: BLAS warm-up and cache effects make per-example timing
meaningless) and prints a one-line PASS/FAIL verdict per acceptance
criterion after the run, collected from the ``test_criterion_*`` tests.
"""

from __future__ import annotations

from hypothesis import HealthCheck, settings

settings.register_profile(
    "numeric",
    deadline=None,
    max_examples=100,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("numeric")

_criterion_outcomes: dict[str, str] = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if not name.startswith("test_criterion_"):
        return
    if report.when == "call":
        _criterion_outcomes[name] = report.outcome
    elif report.when == "setup" and report.outcome != "passed":
        # setup failures/skips never reach "call"
        _criterion_outcomes[name] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _criterion_outcomes:
        return
    words = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}
    terminalreporter.section("acceptance criteria")
    for name in sorted(_criterion_outcomes):
        outcome = _criterion_outcomes[name]
        word = words.get(outcome, outcome.upper())
        terminalreporter.write_line(f"{word}  {name}")
