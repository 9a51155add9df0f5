import random

import pytest

from orbitdec.words import FreeWord

_ACCEPTANCE: dict[str, str] = {}


def random_word(rng: random.Random, rank: int, max_len: int, min_len: int = 0) -> FreeWord:
    n = rng.randint(min_len, max_len)
    letters: list[int] = []
    while len(letters) < n:
        x = rng.choice([i for i in range(1, rank + 1)] + [-i for i in range(1, rank + 1)])
        if letters and letters[-1] == -x:
            continue
        letters.append(x)
    return FreeWord(rank, tuple(letters))


@pytest.fixture
def rng():
    return random.Random(20240611)


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and (report.when == "call" or report.outcome != "passed"):
        name = report.nodeid.split("::")[-1]
        if report.outcome != "passed" or name not in _ACCEPTANCE:
            _ACCEPTANCE[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        status = "PASS" if _ACCEPTANCE[name] == "passed" else "FAIL"
        terminalreporter.write_line(f"{status}  {name}")


def random_unimodular(rng: random.Random, n: int, max_entry: int = 4):
    """Random matrix in GL_n(Z) with entries bounded by max_entry (rejection sampling)."""
    from orbitdec.lattice import IntMatrix

    while True:
        M = IntMatrix.of([[rng.randint(-max_entry, max_entry) for _ in range(n)] for _ in range(n)])
        if abs(M.det()) == 1:
            return M


def random_vector(rng: random.Random, n: int, bound: int = 4) -> tuple[int, ...]:
    return tuple(rng.randint(-bound, bound) for _ in range(n))
