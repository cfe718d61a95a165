import itertools

import numpy as np
import pytest
from hypothesis import strategies as st

from sbcn.model import BinaryDataset, Dag


def brute_force_has_cycle(arcs, n):
    """Independent cycle check: DFS from every node looking for a return path."""
    succ = {i: [v for u, v in arcs if u == i] for i in range(n)}

    def reaches(start, target, seen):
        for nxt in succ[start]:
            if nxt == target:
                return True
            if nxt not in seen:
                seen.add(nxt)
                if reaches(nxt, target, seen):
                    return True
        return False

    return any(reaches(i, i, set()) for i in range(n))


def all_pairs(n):
    return [(u, v) for u in range(n) for v in range(n) if u != v]


def all_dags(n):
    for bits in itertools.product((0, 1), repeat=n * (n - 1)):
        arcs = [p for p, b in zip(all_pairs(n), bits) if b]
        if not brute_force_has_cycle(arcs, n):
            yield Dag(n, arcs)


def random_dataset(rng, m, n, p=0.5):
    return BinaryDataset((rng.random((m, n)) < p).astype(np.uint8))


def random_dag(rng, n, density=0.4, max_parents=3):
    order = rng.permutation(n)
    arcs = []
    for j in range(n):
        for i in range(j):
            if rng.random() < density:
                arcs.append((int(order[i]), int(order[j])))
    dag = Dag(n, arcs)
    for v in range(n):
        extra = list(dag.parents(v))[max_parents:]
        dag = dag.with_arcs(remove=[(u, v) for u in extra])
    return dag


@st.composite
def datasets(draw, max_m=30, max_n=4, min_n=1):
    n = draw(st.integers(min_n, max_n))
    m = draw(st.integers(1, max_m))
    cells = draw(st.lists(st.integers(0, 1), min_size=m * n, max_size=m * n))
    return BinaryDataset(np.array(cells, dtype=np.uint8).reshape(m, n))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_REPORT = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_REPORT:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_REPORT:
            terminalreporter.write_line(line)
