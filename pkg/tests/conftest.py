import re

import numpy as np
import pytest

ALL_SPECS = ("l2", "l1", "linf-max", "linf-min")
SIP_SPECS = ("l2", "l1", "linf-min")

_CRITERION = re.compile(r"test_criterion_(\d+)_")
_results: dict[int, list[str]] = {}
_notes: dict[int, list[str]] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def note():
    """``note(k, text)`` attaches a measured value to criterion k's summary line."""
    def add(k: int, text: str) -> None:
        _notes.setdefault(k, []).append(text)
        print(f"criterion {k}: {text}")
    return add


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _results.setdefault(int(m.group(1)), []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_results):
        ok = all(o == "passed" for o in _results[k])
        detail = "; ".join(_notes.get(k, []))
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}"
                                    + (f"  ({detail})" if detail else ""))
