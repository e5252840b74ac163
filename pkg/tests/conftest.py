import numpy as np
import pytest
from hypothesis import strategies as st

from incentive_mckp.model import Alternative, Individual, Instance, make_instance

# ind0 = {a(10,0), b(8,4), c(5,6)}, ind1 = {d(10,1), e(9,2), f(4,9)}
T1_ROWS = [[(10, 0), (8, 4), (5, 6)], [(10, 1), (9, 2), (4, 9)]]
A, B, C = 0, 1, 2
D, E, F = 0, 1, 2


@pytest.fixture
def t1():
    return make_instance(T1_ROWS, welfare_unit="kgCO2")


def random_individual(rng, iid, max_alts, high=20, integer=True):
    m = int(rng.integers(1, max_alts + 1))
    if integer:
        vals = rng.integers(0, high + 1, size=(m, 2)).astype(float)
    else:
        vals = rng.uniform(0, high, size=(m, 2))
    return Individual(iid, tuple(Alternative(j, u, s) for j, (u, s) in enumerate(vals)))


def random_instance(rng, max_individuals=6, max_alts=5, high=20, integer=True):
    n = int(rng.integers(1, max_individuals + 1))
    return Instance(tuple(random_individual(rng, i, max_alts, high, integer) for i in range(n)))


def _individual(iid, pairs):
    return Individual(iid, tuple(Alternative(j, float(u), float(s)) for j, (u, s) in enumerate(pairs)))


small_value = st.integers(min_value=0, max_value=8)
pair_lists = st.lists(st.tuples(small_value, small_value), min_size=1, max_size=6)


@st.composite
def individuals(draw, iid=0):
    return _individual(iid, draw(pair_lists))


@st.composite
def instances(draw, max_individuals=4):
    rows = draw(st.lists(pair_lists, min_size=1, max_size=max_individuals))
    return Instance(tuple(_individual(i, r) for i, r in enumerate(rows)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def record_criterion(number, ok, detail):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
