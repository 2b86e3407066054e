"""Shared fixtures and the acceptance-criterion result banner."""

from __future__ import annotations

import time
from contextlib import contextmanager

import pytest

_CRITERIA: list[tuple[str, str, float]] = []


@pytest.fixture
def criterion():
    """Times a named acceptance criterion and records pass/fail/skip.

    Results are printed as one line per criterion in the terminal
    summary, independent of output capture.
    """

    @contextmanager
    def runner(name: str, budget_s: float):
        start = time.perf_counter()
        try:
            yield
        except pytest.skip.Exception as exc:
            _CRITERIA.append((name, f"SKIP ({exc})", time.perf_counter() - start))
            raise
        except BaseException:
            _CRITERIA.append((name, "FAIL", time.perf_counter() - start))
            raise
        elapsed = time.perf_counter() - start
        if elapsed > budget_s:
            _CRITERIA.append(
                (name, f"FAIL (over {budget_s}s budget)", elapsed)
            )
            pytest.fail(f"{name}: took {elapsed:.2f}s, budget {budget_s}s")
        _CRITERIA.append((name, "PASS", elapsed))

    return runner


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, status, elapsed in _CRITERIA:
        terminalreporter.write_line(f"[{status}] {name} ({elapsed:.2f}s)")
