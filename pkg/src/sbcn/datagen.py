"""Random cumulative (monotonic progression) models and their datasets.

Single-source DAGs are layered: the root sits on level 1, every other node
on a level in [2, ceil(log2 n)], and parents of a level-l node are drawn from
level l-1.  Multi-root kinds are unions of independent single-source
components over a random partition of the nodes.
"""
import math
from dataclasses import dataclass

import numpy as np

from sbcn.model import BinaryDataset, Dag, topological_order

P_MIN = 0.05
P_MAX = 0.95
MAX_IN_DEGREE = 3

TOPOLOGIES = ("tree", "forest", "dag_conj_single", "dag_conj_multi",
              "dag_disj_single", "dag_disj_multi")

_KINDS = {
    # kind: (max parents, multiple roots, logic)
    "tree": (1, False, "and"),
    "forest": (1, True, "and"),
    "dag_conj_single": (MAX_IN_DEGREE, False, "and"),
    "dag_conj_multi": (MAX_IN_DEGREE, True, "and"),
    "dag_disj_single": (MAX_IN_DEGREE, False, "or"),
    "dag_disj_multi": (MAX_IN_DEGREE, True, "or"),
}


@dataclass(frozen=True)
class GenerativeModel:
    topology: str
    dag: Dag
    logic: str  # "and" | "or", shared by every node with parents
    theta: tuple  # per node: P(node=1 | parent condition holds); None for roots
    root_marginals: tuple  # per node: P(node=1) for roots; None otherwise

    @property
    def n(self):
        return self.dag.n

    def roots(self):
        return [v for v in range(self.n) if not self.dag.parents(v)]

    def to_document(self, **extra):
        return self.dag.to_document(
            topology=self.topology,
            logic=self.logic,
            theta=list(self.theta),
            root_marginals=list(self.root_marginals),
            **extra,
        )


def _levels(size):
    """Number of levels (root level included) for a component of ``size`` nodes."""
    if size <= 1:
        return 1
    return min(max(2, math.ceil(math.log2(size))), size)


def _single_source(nodes, max_parents, rng):
    """Arcs of one layered single-source DAG over ``nodes`` (first node is the root)."""
    root, rest = nodes[0], list(nodes[1:])
    if not rest:
        return []
    depth = _levels(len(nodes))
    n_levels = depth - 1  # levels 2..depth
    level_of = {}
    order = rng.permutation(len(rest))
    # first n_levels nodes seed one level each so none is empty
    for rank, idx in enumerate(order):
        level_of[rest[idx]] = 2 + rank if rank < n_levels else 2 + int(rng.integers(n_levels))
    by_level = {1: [root]}
    for node in rest:
        by_level.setdefault(level_of[node], []).append(node)
    arcs = []
    for node in rest:
        pool = sorted(by_level[level_of[node] - 1])
        k = min(int(rng.integers(1, max_parents + 1)), len(pool))
        for p in rng.choice(pool, size=k, replace=False):
            arcs.append((int(p), node))
    return arcs


def generate_structure(kind, n, rng):
    if kind not in _KINDS:
        raise ValueError(f"unknown topology {kind!r}; expected one of {TOPOLOGIES}")
    if n < 1:
        raise ValueError("n must be >= 1")
    max_parents, multi, logic = _KINDS[kind]
    labels = rng.permutation(n).tolist()
    n_roots = int(rng.integers(1, math.ceil(n / 5) + 1)) if multi else 1
    roots = labels[:n_roots]
    members = [[r] for r in roots]
    for node in labels[n_roots:]:
        members[int(rng.integers(n_roots))].append(node)
    arcs = []
    for comp in members:
        arcs.extend(_single_source(comp, max_parents, rng))
    dag = Dag(n, arcs)
    theta = []
    root_marginals = []
    for v in range(n):
        if dag.parents(v):
            theta.append(float(rng.uniform(P_MIN, P_MAX)))
            root_marginals.append(None)
        else:
            theta.append(None)
            root_marginals.append(float(rng.uniform(P_MIN, P_MAX)))
    return GenerativeModel(kind, dag, logic, tuple(theta), tuple(root_marginals))


def sample_dataset(model, m, rng, names=None):
    if m < 1:
        raise ValueError("m must be >= 1")
    n = model.n
    x = np.zeros((m, n), dtype=np.uint8)
    draws = rng.random((m, n))
    for v in topological_order(model.dag.arcs, n):
        parents = list(model.dag.parents(v))
        if not parents:
            x[:, v] = draws[:, v] < model.root_marginals[v]
            continue
        pa = x[:, parents].astype(bool)
        cond = pa.all(axis=1) if model.logic == "and" else pa.any(axis=1)
        x[:, v] = cond & (draws[:, v] < model.theta[v])
    if names is None:
        names = [f"X{i}" for i in range(n)]
    return BinaryDataset(x, names)


def inject_noise(data, nu, rng, fp_rate=None, fn_rate=None):
    """Flip each cell independently.

    By default both false positives (0 -> 1) and false negatives (1 -> 0)
    happen at rate ``nu``; ``fp_rate``/``fn_rate`` override either side.
    """
    fp = nu if fp_rate is None else fp_rate
    fn = nu if fn_rate is None else fn_rate
    for rate in (fp, fn):
        if not 0.0 <= rate <= 1.0:
            raise ValueError(f"noise rate {rate} outside [0, 1]")
    x = data.values
    u = rng.random(x.shape)
    flip = np.where(x == 1, u < fn, u < fp)
    return BinaryDataset(np.where(flip, 1 - x, x), data.variable_names)
