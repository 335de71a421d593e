import sys

import numpy as np
import pytest

from polyhencky.sampling import chunk_rng, random_gl_plus


@pytest.fixture
def rng():
    return chunk_rng(12345, 0)


def sample_F(count, n, lo=0.2, hi=5.0, seed=0):
    return random_gl_plus(chunk_rng(seed, 0), count, n, lo, hi)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
