import itertools

import numpy as np
import pytest

from npverify import _kernels
from npverify.satgen import Formula, gen_balanced_planted


@pytest.fixture(params=sorted(_kernels.backends()))
def backend(request):
    return _kernels.backends()[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def planted16():
    return gen_balanced_planted(16, 4, seed=7)


def naive_best(f: Formula):
    """Independent oracle: itertools over all assignments, popcount-style clause check."""
    best_sat, best_code = -1, None
    for code in range(1 << f.n):
        sat = 0
        for c in f.clauses:
            mask = sum(1 << (i - 1) for i in c)
            if bin(code & mask).count("1") == 2:
                sat += 1
        if sat > best_sat:
            best_sat, best_code = sat, code
    return best_sat, best_code


def all_assignments(n):
    return itertools.product((0, 1), repeat=n)


def popcount_best(f: Formula):
    """Vectorized popcount scan; same contract as naive_best, fast enough for n <= 20."""
    codes = np.arange(1 << f.n, dtype=np.int64)
    sat = np.zeros(codes.size, dtype=np.int32)
    for c in f.clauses:
        mask = int(sum(1 << (int(i) - 1) for i in c))
        v = codes & mask
        pc = np.zeros(codes.size, dtype=np.int8)
        for i in c:
            pc += ((v >> (int(i) - 1)) & 1).astype(np.int8)
        sat += pc == 2
    best = int(np.argmax(sat))  # first maximum = lowest code
    return int(sat[best]), best


# one line per acceptance criterion, filled by test_acceptance and echoed in the summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
