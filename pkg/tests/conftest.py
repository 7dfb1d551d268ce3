import math
import os
import sys
from itertools import product
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.cnf import CnfFormula  # noqa: E402

DATA_DIR = Path(__file__).parent / "data"
UF20_PLANTED = DATA_DIR / "uf20-91-planted.cnf"
# x_i is true iff i is not a multiple of 3.
UF20_MODEL = "11011011011011011011"


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running solver checks")


def brute_count(clauses, bits):
    """Clause-by-clause reference evaluator over DIMACS integer clauses."""
    total = 0
    for clause in clauses:
        for lit in clause:
            value = bool(bits[abs(lit) - 1])
            if (lit > 0 and value) or (lit < 0 and not value):
                total += 1
                break
    return total


def brute_force_optimum(num_vars, clauses):
    return max(brute_count(clauses, bits) for bits in product((0, 1), repeat=num_vars))


def within_sigma(observed, p, trials, k=3.0):
    """Is a Bernoulli frequency within k standard errors of p?"""
    sigma = math.sqrt(p * (1 - p) / trials)
    return abs(observed - p) <= k * max(sigma, 1e-12)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def two_clause():
    # (x1 v x2) & (-x1 v x2)
    return CnfFormula.from_ints(2, [[1, 2], [-1, 2]])


@pytest.fixture
def contradiction():
    # (x1) & (-x1)
    return CnfFormula.from_ints(1, [[1], [-1]])


@pytest.fixture
def uf20_text():
    return UF20_PLANTED.read_text()
