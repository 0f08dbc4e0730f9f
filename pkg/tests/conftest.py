import os
from pathlib import Path

import pytest

from holoarima.ingest import bundled_fixture_path, parse_percentiles_csv

REPO = Path(__file__).resolve().parents[1]
GOLDEN = Path(__file__).resolve().parent / "golden"


def real_data_path() -> Path:
    """Location of the Temp12k percentile file (env var TEMP12K_CSV overrides)."""
    return Path(os.environ.get("TEMP12K_CSV", REPO / "data" / "temp12k_allmethods_percentiles.csv"))


@pytest.fixture(scope="session")
def fixture_path() -> str:
    return bundled_fixture_path()


@pytest.fixture(scope="session")
def fixture_table(fixture_path):
    return parse_percentiles_csv(fixture_path)


ACCEPTANCE_LINES: list[str] = []


def report(criterion: str, ok: bool, detail: str) -> None:
    """Record one pass/fail line for the acceptance summary."""
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
