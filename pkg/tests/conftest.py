import functools

import pytest

from crom.harness import ExperimentSpec, run_experiment

_ACCEPTANCE_LINES: list[str] = []


@functools.lru_cache(maxsize=None)
def _cached(spec: ExperimentSpec):
    return tuple(run_experiment(spec))


@pytest.fixture(scope="session")
def curve():
    """Run (and memoise) an experiment; returns ``{rate: row}`` for the codec rows."""
    def run(spec: ExperimentSpec):
        return {row["rate_nats"]: row for row in _cached(spec) if row["codec"] != "reference"}
    return run


@pytest.fixture(scope="session")
def acceptance_report():
    def report(criterion: int, ok: bool, detail: str):
        _ACCEPTANCE_LINES.append(f"criterion {criterion:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
