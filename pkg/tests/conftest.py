from fractions import Fraction

import numpy as np
import pytest
from hypothesis import strategies as st

from hyperprop.hypergraph import Hypergraph


def exact_solve(a, b):
    """Gauss-Jordan elimination over ``Fraction``; independent of LAPACK."""
    n = len(a)
    m = [[Fraction(x) for x in row] + [Fraction(v)] for row, v in zip(a, b)]
    for col in range(n):
        piv = next(r for r in range(col, n) if m[r][col] != 0)
        m[col], m[piv] = m[piv], m[col]
        p = m[col][col]
        m[col] = [x / p for x in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [row[-1] for row in m]


@st.composite
def hypergraphs(draw, max_n=12, max_m=6):
    n = draw(st.integers(3, max_n))
    m = draw(st.integers(1, max_m))
    edges = []
    for _ in range(m):
        e = draw(st.sets(st.integers(0, n - 1), min_size=2, max_size=n))
        edges.append(set(e))
    for v in range(n):
        if not any(v in e for e in edges):
            edges[draw(st.integers(0, m - 1))].add(v)
    weights = draw(st.lists(st.floats(0.05, 5.0), min_size=m, max_size=m))
    return Hypergraph.from_edges(edges, n, weights)


@pytest.fixture
def triangle():
    """Single hyperedge {0, 1, 2} with unit weight."""
    return Hypergraph.from_edges([[0, 1, 2]], 3)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE: dict[int, str] = {}


def report(criterion: int, passed: bool, detail: str) -> None:
    ACCEPTANCE[criterion] = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
