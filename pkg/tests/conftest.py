from __future__ import annotations

import pytest

from klac.gf2 import BitMatrix
from klac.instance import instance_from_rows


def bm(*rows: str) -> BitMatrix:
    return BitMatrix.from_strings(list(rows))


# Six independent vectors g1..g6 plus three dependent ones:
# g7 = g1+g2+g3+g4, g8 = g1+g2+g5+g6, g9 = g1+g2+g3+g5, so O(u1) = {v1, v2, v3}.
FIG7_ROWS = ("100000", "010000", "001000", "000100", "000010", "000001",
             "111100", "110011", "111010")


@pytest.fixture
def fig7() -> BitMatrix:
    return bm(*FIG7_ROWS)


@pytest.fixture
def fig1_instance():
    # four clients over five messages; pairs (1,2) and (3,4) hold each other's request
    return instance_from_rows([1, 2, 3, 4], [[2], [1], [4], [3]], m=5)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
