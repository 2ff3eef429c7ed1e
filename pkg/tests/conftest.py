"""Shared pytest wiring: slow-test gating and the release-gate summary.

Tests marked ``slow`` are skipped unless BOANNEAL_RUN_SLOW=1 is set.  After
the run, every test from test_acceptance.py gets a one-line verdict so the
release checklist can be read straight off the terminal.
"""

import os

import pytest

_ACCEPTANCE_FILE = "test_acceptance.py"

# nodeids of acceptance tests in collection order
_acceptance_order = []


def pytest_collection_modifyitems(config, items):
    run_slow = os.environ.get("BOANNEAL_RUN_SLOW", "") == "1"
    skip_slow = pytest.mark.skip(reason="slow: set BOANNEAL_RUN_SLOW=1 to run")
    for item in items:
        if "slow" in item.keywords and not run_slow:
            item.add_marker(skip_slow)
        if _ACCEPTANCE_FILE in str(item.fspath):
            _acceptance_order.append(item.nodeid)


def _verdicts(terminalreporter):
    outcomes = {}
    for category, verdict in (
        ("passed", "PASS"),
        ("failed", "FAIL"),
        ("error", "FAIL"),
        ("skipped", "SKIP"),
    ):
        for report in terminalreporter.stats.get(category, ()):
            nodeid = getattr(report, "nodeid", None)
            if nodeid is None or _ACCEPTANCE_FILE not in nodeid:
                continue
            # a FAIL from any phase (setup/call/teardown) must not be
            # masked by a later PASS entry for another phase
            if outcomes.get(nodeid) != "FAIL":
                outcomes[nodeid] = verdict
    return outcomes


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    outcomes = _verdicts(terminalreporter)
    if not outcomes:
        return
    ordered = [n for n in _acceptance_order if n in outcomes]
    ordered += sorted(set(outcomes) - set(ordered))
    terminalreporter.section("acceptance criteria")
    for nodeid in ordered:
        name = nodeid.split("::")[-1]
        if name.startswith("test_"):
            name = name[len("test_"):]
        terminalreporter.write_line(f"ACCEPTANCE: {name} {outcomes[nodeid]}")
