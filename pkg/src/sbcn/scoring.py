"""Decomposable structure scores for binary data.

Every score is a sum of per-family local scores computed from the family's
contingency counts:

* ``loglik``  maximum-likelihood log-likelihood
* ``aic``     loglik - k
* ``bic``     loglik - k * ln(m) / 2
* ``bde``     BDeu marginal likelihood, equivalent sample size alpha
* ``k2``      Cooper-Herskovits marginal likelihood (Dirichlet(1, 1) per row)

where k = 2**|parents| is the number of free parameters of the family.
"""
from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from sbcn import _accel
from sbcn.model import Dag, InvalidInput, ScoreCache, has_path

SCORE_KINDS = ("loglik", "aic", "bic", "bde", "k2")
DEFAULT_MAX_PARENTS = 3

_KIND_CODES = {
    "loglik": _accel.SCORE_LOGLIK,
    "aic": _accel.SCORE_AIC,
    "bic": _accel.SCORE_BIC,
    "bde": _accel.SCORE_BDE,
    "k2": _accel.SCORE_K2,
}


class ParentLimitExceeded(ValueError):
    pass


class InvalidMove(ValueError):
    pass


@dataclass(frozen=True)
class ScoreSpec:
    kind: str = "bic"
    equivalent_sample_size: float = 1.0

    def __post_init__(self):
        if self.kind not in SCORE_KINDS:
            raise ValueError(f"unknown score kind {self.kind!r}; expected one of {SCORE_KINDS}")
        if not self.equivalent_sample_size > 0:
            raise ValueError("equivalent_sample_size must be positive")


@dataclass(frozen=True)
class LocalCounts:
    child: int
    parents: tuple
    table: np.ndarray  # shape (2**len(parents), 2): (#child=0, #child=1) per configuration

    def row(self, assignment):
        """Counts for a parent assignment given as {parent: value}."""
        idx = sum(assignment[p] << b for b, p in enumerate(self.parents))
        return tuple(int(x) for x in self.table[idx])


def local_counts(data, child, parents, max_parents=DEFAULT_MAX_PARENTS):
    parents = tuple(sorted(int(p) for p in parents))
    if child in parents:
        raise InvalidInput(f"node {child} cannot be its own parent")
    if max_parents is not None and len(parents) > max_parents:
        raise ParentLimitExceeded(
            f"node {child} has {len(parents)} parents, cap is {max_parents}")
    for node in (child,) + parents:
        if not 0 <= node < data.n:
            raise InvalidInput(f"node {node} out of range for n={data.n}")
    table = _accel.contingency(data.values, int(child), parents)
    return LocalCounts(int(child), parents, table)


class Scorer:
    """Local-score evaluator bound to one dataset and one score spec.

    The cache it owns (or is given) is only valid for this dataset/spec pair.
    """

    def __init__(self, data, spec=None, cache=None, max_parents=DEFAULT_MAX_PARENTS):
        self.data = data
        self.spec = spec or ScoreSpec()
        self.cache = ScoreCache() if cache is None else cache
        self.max_parents = max_parents
        self._code = _KIND_CODES[self.spec.kind]
        self._alpha = float(self.spec.equivalent_sample_size)

    def compute_local(self, child, parents):
        counts = local_counts(self.data, child, parents, self.max_parents)
        return _accel.local_score(counts.table, self._code, self.data.m, self._alpha)

    def local(self, child, parents):
        return self.cache.get(child, parents, lambda ps: self.compute_local(child, ps))

    def total(self, g):
        _check_graph(self.data, g)
        return sum(self.local(v, g.parents(v)) for v in range(g.n))

    def delta(self, g, move, mask=None):
        """score(after) - score(before) for a legal single-arc move."""
        changes = move_changes(g, move, mask, self.max_parents)
        return sum(self.local(v, new) - self.local(v, old) for v, old, new in changes)


def _check_graph(data, g):
    if g.n != data.n:
        raise InvalidInput(f"graph has {g.n} nodes, dataset has {data.n} columns")


def log_likelihood(data, g):
    _check_graph(data, g)
    total = 0.0
    for v in range(g.n):
        counts = local_counts(data, v, g.parents(v), max_parents=None)
        total += _accel.local_score(counts.table, _accel.SCORE_LOGLIK, data.m, 1.0)
    return total


def dimension(g):
    return sum(1 << len(g.parents(v)) for v in range(g.n))


def score(data, g, spec=None, cache=None, max_parents=DEFAULT_MAX_PARENTS):
    return Scorer(data, spec, cache, max_parents).total(g)


Move = namedtuple("Move", "kind parent child")
MOVE_KINDS = ("add", "delete", "reverse")


def move_changes(g, move, mask=None, max_parents=None):
    """Validate ``move`` on ``g``; return [(node, old_parents, new_parents)]."""
    kind, u, v = move
    if kind not in MOVE_KINDS:
        raise InvalidMove(f"unknown move kind {kind!r}")
    if u == v or not (0 <= u < g.n and 0 <= v < g.n):
        raise InvalidMove(f"bad arc {u}->{v}")
    present = (u, v) in g.arcs
    pv = g.parents(v)
    if kind == "add":
        if present or (v, u) in g.arcs:
            raise InvalidMove(f"cannot add {u}->{v}: pair already connected")
        if mask is not None and not mask(u, v):
            raise InvalidMove(f"arc {u}->{v} not allowed by mask")
        if max_parents is not None and len(pv) >= max_parents:
            raise InvalidMove(f"node {v} already has {len(pv)} parents")
        if has_path(g.arcs, g.n, v, u):
            raise InvalidMove(f"adding {u}->{v} creates a cycle")
        return [(v, pv, tuple(sorted(pv + (u,))))]
    if not present:
        raise InvalidMove(f"arc {u}->{v} not in graph")
    new_v = tuple(p for p in pv if p != u)
    if kind == "delete":
        return [(v, pv, new_v)]
    pu = g.parents(u)
    if mask is not None and not mask(v, u):
        raise InvalidMove(f"reversed arc {v}->{u} not allowed by mask")
    if max_parents is not None and len(pu) >= max_parents:
        raise InvalidMove(f"node {u} already has {len(pu)} parents")
    if has_path(g.arcs - {(u, v)}, g.n, u, v):
        raise InvalidMove(f"reversing {u}->{v} creates a cycle")
    return [(v, pv, new_v), (u, pu, tuple(sorted(pu + (v,))))]


def apply_move(g, move):
    kind, u, v = move
    if kind == "add":
        return g.with_arcs(add=[(u, v)])
    if kind == "delete":
        return g.with_arcs(remove=[(u, v)])
    return g.with_arcs(add=[(v, u)], remove=[(u, v)])


def delta_score(data, g, move, spec=None, cache=None, mask=None,
                max_parents=DEFAULT_MAX_PARENTS):
    _check_graph(data, g)
    return Scorer(data, spec, cache, max_parents).delta(g, move, mask)


def empty_graph(data):
    return Dag(data.n, (), data.variable_names)
