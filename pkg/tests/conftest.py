"""Shared fixtures and the per-criterion acceptance summary."""

from __future__ import annotations

from collections import OrderedDict

import pytest

# criterion number -> {"text": str, "outcomes": [str], "notes": [str]}
_CRITERIA: "OrderedDict[int, dict]" = OrderedDict()
_NODE_TO_CRITERION = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion covered by a test")


def pytest_collection_finish(session):
    for item in session.items:
        mark = item.get_closest_marker("criterion")
        if mark is None:
            continue
        number, text = mark.args
        entry = _CRITERIA.setdefault(number, {"text": text, "outcomes": [], "notes": []})
        entry["text"] = text
        _NODE_TO_CRITERION[item.nodeid] = number


def pytest_runtest_logreport(report):
    number = _NODE_TO_CRITERION.get(report.nodeid)
    if number is None:
        return
    entry = _CRITERIA[number]
    if report.when == "call":
        entry["outcomes"].append(report.outcome)
        entry["notes"].extend(str(v) for k, v in report.user_properties if k == "measured")
    elif report.outcome != "passed":
        entry["outcomes"].append("failed" if report.failed else report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        outs = entry["outcomes"]
        if not outs:
            status = "NOT RUN"
        elif all(o == "passed" for o in outs):
            status = "PASS"
        elif any(o == "failed" for o in outs):
            status = "FAIL"
        else:
            status = "SKIP"
        line = f"criterion {number:2d} {status:7s} {entry['text']} ({len(outs)} test(s))"
        tr.write_line(line)
        for note in entry["notes"]:
            tr.write_line(f"    {note}")


@pytest.fixture
def record_measured(record_property):
    """Attach a measured value to the acceptance summary line of the test."""

    def record(text: str):
        record_property("measured", text)

    return record
