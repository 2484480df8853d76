from __future__ import annotations

import pytest


# -- one summary line per acceptance criterion -----------------------------------

_CRITERIA: dict[int, list[str]] = {}
_TITLES = {
    1: "flat compilation: decoded controllers solve random micro problems",
    2: "hierarchical compilation: decoded hierarchies solve random micro problems",
    3: "flat synthesis on list, summatory, blocks, gripper",
    4: "synthesized flat controllers generalize to held-out instances",
    5: "recursive tree traversal",
    6: "incremental visitall with injected sub-controllers",
    7: "property suites",
    8: "planner soundness and breadth-first optimality",
}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    for key, ids in report.user_properties:
        if key == "criterion":
            for c in ids:
                _CRITERIA.setdefault(c, []).append(report.outcome)


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            item.user_properties.append(("criterion", tuple(m.args)))


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(*ids): acceptance criterion numbers a test belongs to")
    config.addinivalue_line("markers", "slow: long-running synthesis")


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for c in sorted(_TITLES):
        outcomes = _CRITERIA.get(c)
        if not outcomes:
            verdict = "NOT RUN"
        elif all(o == "passed" for o in outcomes):
            verdict = "PASS"
        elif any(o == "failed" for o in outcomes):
            verdict = "FAIL"
        else:
            verdict = "SKIPPED"
        terminalreporter.write_line(f"criterion {c}: {verdict} ({_TITLES[c]}, {len(outcomes or [])} checks)")


@pytest.fixture
def tmp_out(tmp_path):
    return tmp_path / "out"
