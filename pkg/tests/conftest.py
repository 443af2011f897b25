from fractions import Fraction as Q

import pytest

from polybound import builtin_system, shipped_certificate

KR6_X = Q(100, 463)
KR6_WITNESS = {
    "E": Q(34, 67), "F": Q(139, 103), "G": Q(67, 82),
    "H": Q(101, 155), "L": Q(95, 126), "M": Q(106, 177),
}
BS17_X = Q(10000, 45238)
BS17_WITNESS = {
    "C": Q(871, 2500), "D": Q(2157, 5000), "E": Q(2879, 5000), "F": Q(1003, 625),
    "G": Q(4757, 5000), "H": Q(1851, 2500), "P": Q(3267, 5000), "Q": Q(939, 2500),
    "R": Q(599, 2500), "S": Q(309, 1000), "T": Q(727, 2500), "U": Q(633, 1250),
    "V": Q(621, 5000), "W": Q(509, 5000), "X": Q(833, 5000), "Y": Q(689, 5000),
    "Z": Q(567, 5000),
}


@pytest.fixture(scope="session")
def kr6():
    return builtin_system("KR6")


@pytest.fixture(scope="session")
def bs17():
    return builtin_system("BS17")


@pytest.fixture(scope="session")
def kr6_cert():
    return shipped_certificate("KR6")


@pytest.fixture(scope="session")
def bs17_cert():
    return shipped_certificate("BS17")


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one acceptance line; the assertion still decides the test."""

    def record(number, label, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {label}" + (f" ({detail})" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
