import json
from pathlib import Path

import pytest

from pibo.bench import brute_force
from pibo.space import table_i_space
from pibo.stripline import StriplineObjective

GOLDEN = Path(__file__).parent / "fixtures" / "golden_oracle.json"


def pytest_addoption(parser):
    parser.addoption(
        "--regen-golden", action="store_true",
        help="recompute the brute-force golden optimum and rewrite the fixture",
    )


@pytest.fixture(scope="session")
def table_space():
    return table_i_space()


@pytest.fixture(scope="session")
def stripline():
    return StriplineObjective()


@pytest.fixture(scope="session")
def oracle(table_space, stripline):
    """Brute-force optimum of the default problem, with the full value table."""
    return brute_force(table_space, stripline, keep_table=True)


@pytest.fixture(scope="session")
def golden(request, oracle):
    if request.config.getoption("--regen-golden"):
        GOLDEN.write_text(json.dumps({
            "indices": list(oracle.point.indices),
            "values": list(oracle.point.values),
            "objective": oracle.value,
        }, indent=2) + "\n")
    return json.loads(GOLDEN.read_text())


ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def report_criterion(capsys):
    """Record and echo one PASS/FAIL line for an acceptance criterion."""

    def report(number: int, ok: bool, detail: str) -> None:
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES[number] = line
        with capsys.disabled():
            print("\n" + line)

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
