"""Score-based structure search inside an arc mask.

Hill climbing and tabu search walk the space of single-arc moves
(add / delete / reverse); the genetic algorithm evolves linearized
adjacency matrices.  Every returned graph is acyclic, respects the mask and
the parent cap.
"""
import itertools
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from sbcn import _accel
from sbcn.model import Dag, ScoreCache, is_acyclic
from sbcn.scoring import DEFAULT_MAX_PARENTS, Move, Scorer, ScoreSpec

STRATEGIES = ("hc", "tabu", "ga")
ORACLE_MAX_NODES = 5


class OracleTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class SearchSpec:
    strategy: str = "hc"
    max_parents: int = DEFAULT_MAX_PARENTS
    tabu_tenure: int = 10
    tabu_max_iterations: int = 100
    ga_population: int = 32
    ga_generations: int = 100
    ga_mutation_rate: float = 0.01
    rng_seed: int = 0

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}; expected one of {STRATEGIES}")
        if self.ga_population < 2 or self.ga_population % 2:
            raise ValueError("ga_population must be even and >= 2")
        if not 0.0 <= self.ga_mutation_rate <= 1.0:
            raise ValueError("ga_mutation_rate must be in [0, 1]")
        if self.max_parents < 0 or self.tabu_tenure < 0 or self.tabu_max_iterations < 0:
            raise ValueError("counts must be non-negative")
        if self.ga_generations < 0:
            raise ValueError("ga_generations must be non-negative")


@dataclass
class SearchResult:
    dag: Dag
    score: float
    steps: int  # accepted moves (hc/tabu) or generations (ga)
    history: list = field(default_factory=list)  # best score per step


# --------------------------------------------------------------------------
# local search


class _Walk:
    """Mutable graph state for local search with cached local scores."""

    def __init__(self, scorer, mask, max_parents):
        n = scorer.data.n
        self.n = n
        self.scorer = scorer
        self.mask = mask.allowed
        self.max_parents = max_parents
        self.adj = np.zeros((n, n), dtype=np.uint8)
        self.parents = [() for _ in range(n)]
        self.local = [scorer.local(v, ()) for v in range(n)]

    @property
    def score(self):
        return sum(self.local)

    def arcs(self):
        us, vs = np.nonzero(self.adj)
        return list(zip(us.tolist(), vs.tolist()))

    def dag(self, names=None):
        return Dag(self.n, self.arcs(), names)

    def moves(self):
        """Legal moves as (key, move, [(node, new_parents)]) in tie-break order."""
        n = self.n
        adj = self.adj
        reach = _accel.transitive_closure(adj)
        cap = self.max_parents
        out = []
        for v in range(n):
            pv = self.parents[v]
            for u in range(n):
                if u == v:
                    continue
                if adj[u, v]:
                    new_v = tuple(p for p in pv if p != u)
                    out.append(((v, u, 1), Move("delete", u, v), [(v, new_v)]))
                    if self.mask[v, u] and len(self.parents[u]) < cap:
                        # another u ~> v path would close a cycle with v->u
                        other = any(adj[u, w] and reach[w, v] for w in range(n) if w != v)
                        if not other:
                            pu = self.parents[u]
                            out.append(((v, u, 2), Move("reverse", u, v),
                                        [(v, new_v), (u, tuple(sorted(pu + (v,))))]))
                elif self.mask[u, v] and not adj[v, u] and len(pv) < cap and not reach[v, u]:
                    out.append(((v, u, 0), Move("add", u, v),
                                [(v, tuple(sorted(pv + (u,))))]))
        return out

    def delta(self, changes):
        local = self.scorer.local
        return sum(local(v, new) - self.local[v] for v, new in changes)

    def apply(self, move, changes):
        kind, u, v = move
        if kind == "add":
            self.adj[u, v] = 1
        elif kind == "delete":
            self.adj[u, v] = 0
        else:
            self.adj[u, v] = 0
            self.adj[v, u] = 1
        for node, new in changes:
            self.parents[node] = new
            self.local[node] = self.scorer.local(node, new)


def _inverse(move):
    kind, u, v = move
    if kind == "add":
        return Move("delete", u, v)
    if kind == "delete":
        return Move("add", u, v)
    return Move("reverse", v, u)


def _local_search(data, mask, spec, search, tenure, patience):
    scorer = Scorer(data, spec, ScoreCache(), search.max_parents)
    walk = _Walk(scorer, mask, search.max_parents)
    best_score = walk.score
    best_arcs = walk.arcs()
    tabu = deque(maxlen=tenure) if tenure > 0 else None
    history = [best_score]
    steps = 0
    stale = 0
    while True:
        current = walk.score
        choice = None
        choice_delta = None
        for _, move, changes in walk.moves():
            d = walk.delta(changes)
            if tabu is not None and move in tabu and not current + d > best_score:
                continue
            if choice_delta is None or d > choice_delta:
                choice, choice_delta = (move, changes), d
        if choice is None:
            break
        if tabu is None and patience == 0 and not choice_delta > 0:
            break
        walk.apply(*choice)
        steps += 1
        if tabu is not None:
            tabu.append(_inverse(choice[0]))
        if tabu is None and patience == 0:
            improved = True  # plain hill climbing only accepts positive deltas
        else:
            improved = walk.score > best_score
        if improved:
            best_score = walk.score
            best_arcs = walk.arcs()
            stale = 0
        else:
            stale += 1
            if stale > patience:
                break
        history.append(best_score)
    dag = Dag(data.n, best_arcs, data.variable_names)
    return SearchResult(dag, scorer.total(dag), steps, history)


def hill_climb_result(data, mask, spec=None, search=None):
    search = search or SearchSpec("hc")
    return _local_search(data, mask, spec or ScoreSpec(), search, tenure=0, patience=0)


def tabu_result(data, mask, spec=None, search=None):
    search = search or SearchSpec("tabu")
    return _local_search(data, mask, spec or ScoreSpec(), search,
                         tenure=search.tabu_tenure, patience=search.tabu_max_iterations)


def hill_climb(data, mask, spec=None, search=None):
    return hill_climb_result(data, mask, spec, search).dag


def tabu_search(data, mask, spec=None, search=None):
    return tabu_result(data, mask, spec, search).dag


def improving_moves(data, g, mask, spec=None, max_parents=DEFAULT_MAX_PARENTS):
    """All legal single moves on ``g`` with a strictly positive delta."""
    scorer = Scorer(data, spec or ScoreSpec(), ScoreCache(), max_parents)
    walk = _Walk(scorer, mask, max_parents)
    for u, v in g.arcs:
        walk.adj[u, v] = 1
    for v in range(g.n):
        walk.parents[v] = g.parents(v)
        walk.local[v] = scorer.local(v, walk.parents[v])
    found = []
    for _, move, changes in walk.moves():
        d = walk.delta(changes)
        if d > 0:
            found.append((move, d))
    return found


# --------------------------------------------------------------------------
# genetic algorithm


def genome_index(n):
    """(rows, cols) of the off-diagonal adjacency entries in genome order."""
    rows, cols = [], []
    for i in range(n):
        for j in range(n):
            if i != j:
                rows.append(i)
                cols.append(j)
    return np.array(rows, dtype=np.intp), np.array(cols, dtype=np.intp)


def encode(dag):
    rows, cols = genome_index(dag.n)
    return dag.adjacency()[rows, cols].astype(np.uint8)


def decode(genome, n, names=None):
    rows, cols = genome_index(n)
    on = np.nonzero(genome)[0]
    return Dag(n, zip(rows[on].tolist(), cols[on].tolist()), names)


def _find_cycle(adj):
    """Arcs of one directed cycle in ``adj`` or None."""
    n = adj.shape[0]
    color = [0] * n
    succ = [np.nonzero(adj[i])[0].tolist() for i in range(n)]
    for start in range(n):
        if color[start]:
            continue
        path = [start]
        iters = [iter(succ[start])]
        color[start] = 1
        while iters:
            nxt = next(iters[-1], None)
            if nxt is None:
                color[path.pop()] = 2
                iters.pop()
                continue
            if color[nxt] == 1:
                cyc = path[path.index(nxt):] + [nxt]
                return list(zip(cyc[:-1], cyc[1:]))
            if color[nxt] == 0:
                color[nxt] = 1
                path.append(nxt)
                iters.append(iter(succ[nxt]))
    return None


def repair(genome, mask, rng, max_parents=DEFAULT_MAX_PARENTS):
    """Project a genome onto acyclic, mask-legal, parent-capped graphs."""
    n = mask.n
    rows, cols = genome_index(n)
    genome = np.asarray(genome, dtype=np.uint8)
    if len(genome) != len(rows):
        raise ValueError(f"genome length {len(genome)} != n(n-1) = {len(rows)}")
    adj = np.zeros((n, n), dtype=np.uint8)
    adj[rows, cols] = genome
    adj &= mask.allowed
    while True:
        cycle = _find_cycle(adj)
        if cycle is None:
            break
        u, v = cycle[rng.integers(len(cycle))]
        adj[u, v] = 0
    if max_parents is not None:
        for v in range(n):
            pa = np.nonzero(adj[:, v])[0]
            extra = len(pa) - max_parents
            if extra > 0:
                adj[rng.choice(pa, size=extra, replace=False), v] = 0
    return adj[rows, cols].copy()


def _rank_weights(fitness):
    order = sorted(range(len(fitness)), key=lambda i: (fitness[i], -i))
    w = np.empty(len(fitness))
    for rank, i in enumerate(order, start=1):
        w[i] = rank
    return w / w.sum()


def _crossover(a, b, rng):
    if len(a) < 2:
        return a.copy(), b.copy()
    cut = int(rng.integers(1, len(a)))
    return (np.concatenate([a[:cut], b[cut:]]),
            np.concatenate([b[:cut], a[cut:]]))


def ga_result(data, mask, spec=None, search=None, initial_population=None):
    spec = spec or ScoreSpec()
    search = search or SearchSpec("ga")
    n = data.n
    q = search.ga_population
    cap = search.max_parents
    rng = np.random.default_rng(search.rng_seed)
    scorer = Scorer(data, spec, ScoreCache(), cap)
    rows, cols = genome_index(n)
    memo = {}

    def fitness(genome):
        key = genome.tobytes()
        if key not in memo:
            on = genome.astype(bool)
            adj = np.zeros((n, n), dtype=bool)
            adj[rows[on], cols[on]] = True
            memo[key] = sum(scorer.local(v, tuple(np.nonzero(adj[:, v])[0].tolist()))
                            for v in range(n))
        return memo[key]

    if n < 2:
        dag = Dag(n, (), data.variable_names)
        return SearchResult(dag, scorer.total(dag), 0, [scorer.total(dag)])

    if initial_population is None:
        p_on = min(1.0, 2.0 / n)
        population = [repair((rng.random(len(rows)) < p_on).astype(np.uint8), mask, rng, cap)
                      for _ in range(q)]
    else:
        population = [repair(np.asarray(g, dtype=np.uint8), mask, rng, cap)
                      for g in initial_population]
        if len(population) != q:
            raise ValueError(f"initial population has {len(population)} individuals, expected {q}")
    fit = [fitness(g) for g in population]
    elite = max(range(q), key=lambda i: (fit[i], -i))
    history = [fit[elite]]
    pm = search.ga_mutation_rate
    for _ in range(search.ga_generations):
        pool = rng.choice(q, size=q, p=_rank_weights(fit))
        offspring = []
        for a, b in zip(pool[0::2], pool[1::2]):
            offspring.extend(_crossover(population[a], population[b], rng))
        children = []
        for child in offspring:
            flips = rng.random(len(child)) < pm
            child = np.where(flips, 1 - child, child).astype(np.uint8)
            children.append(repair(child, mask, rng, cap))
        child_fit = [fitness(g) for g in children]
        worst = min(range(q), key=lambda i: (child_fit[i], i))
        children[worst] = population[elite]
        child_fit[worst] = fit[elite]
        population, fit = children, child_fit
        elite = max(range(q), key=lambda i: (fit[i], -i))
        history.append(fit[elite])
    best = population[elite]
    dag = decode(best, n, data.variable_names)
    return SearchResult(dag, scorer.total(dag), search.ga_generations, history)


def ga_search(data, mask, spec=None, search=None, initial_population=None):
    return ga_result(data, mask, spec, search, initial_population).dag


# --------------------------------------------------------------------------
# exhaustive oracle


def _arc_key(arcs):
    return (len(arcs), sorted(arcs))


def exhaustive_result(data, mask, spec=None, max_parents=DEFAULT_MAX_PARENTS, tol=1e-9):
    n = data.n
    if n > ORACLE_MAX_NODES:
        raise OracleTooLarge(f"exhaustive search is limited to n <= {ORACLE_MAX_NODES}")
    scorer = Scorer(data, spec or ScoreSpec(), ScoreCache(), max_parents)
    options = []
    for v in range(n):
        allowed = [u for u in range(n) if u != v and mask(u, v)]
        cap = len(allowed) if max_parents is None else min(max_parents, len(allowed))
        sets = [ps for k in range(cap + 1) for ps in itertools.combinations(allowed, k)]
        options.append([(ps, scorer.local(v, ps)) for ps in sets])
    best = None
    visited = 0
    for combo in itertools.product(*options):
        arcs = [(u, v) for v, (ps, _) in enumerate(combo) for u in ps]
        if not is_acyclic(arcs, n):
            continue
        visited += 1
        s = sum(local for _, local in combo)
        if best is None:
            best = (s, arcs)
            continue
        margin = tol * max(1.0, abs(best[0]))
        if s > best[0] + margin or (s >= best[0] - margin and _arc_key(arcs) < _arc_key(best[1])):
            best = (s, arcs)
    dag = Dag(n, best[1], data.variable_names)
    return SearchResult(dag, scorer.total(dag), visited, [best[0]])


def exhaustive_search(data, mask, spec=None, max_parents=DEFAULT_MAX_PARENTS):
    return exhaustive_result(data, mask, spec, max_parents).dag


# --------------------------------------------------------------------------


def run_search(data, mask, spec=None, search=None):
    search = search or SearchSpec()
    runner = {"hc": hill_climb_result, "tabu": tabu_result, "ga": ga_result}[search.strategy]
    return runner(data, mask, spec or ScoreSpec(), search)
