"""Core data types: binary datasets, DAGs, arc masks and the local-score cache."""
import csv
import io
import json
from collections import deque

import numpy as np


class InvalidGraph(ValueError):
    pass


class InvalidComparison(ValueError):
    pass


class InvalidInput(ValueError):
    pass


class DatasetParseError(ValueError):
    """Malformed dataset file; carries the offending (1-based) row and column."""

    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


def _frozen(array):
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


class BinaryDataset:
    """An m x n matrix of 0/1 observations with one name per column."""

    def __init__(self, values, variable_names=None):
        arr = np.asarray(values)
        if arr.ndim != 2:
            raise InvalidInput(f"dataset must be 2-dimensional, got shape {arr.shape}")
        m, n = arr.shape
        if m < 1 or n < 1:
            raise InvalidInput(f"dataset needs m >= 1 and n >= 1, got {m}x{n}")
        if not np.isin(arr, (0, 1)).all():
            raise InvalidInput("every cell must be exactly 0 or 1")
        if variable_names is None:
            variable_names = [f"X{i}" for i in range(n)]
        names = tuple(str(v) for v in variable_names)
        if len(names) != n:
            raise InvalidInput(f"{len(names)} names for {n} columns")
        if len(set(names)) != n:
            raise InvalidInput("variable names must be unique")
        self.values = _frozen(np.ascontiguousarray(arr, dtype=np.uint8))
        self.variable_names = names

    @property
    def m(self):
        return self.values.shape[0]

    @property
    def n(self):
        return self.values.shape[1]

    def column(self, i):
        return self.values[:, i]

    def select(self, columns):
        """Dataset restricted to (and reordered by) ``columns``."""
        columns = list(columns)
        return BinaryDataset(self.values[:, columns], [self.variable_names[c] for c in columns])

    def __eq__(self, other):
        if not isinstance(other, BinaryDataset):
            return NotImplemented
        return (self.variable_names == other.variable_names
                and np.array_equal(self.values, other.values))

    def __repr__(self):
        return f"BinaryDataset(m={self.m}, n={self.n})"

    def to_csv(self, header_lines=()):
        buf = io.StringIO()
        for line in header_lines:
            buf.write(f"# {line}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.variable_names)
        writer.writerows(self.values.tolist())
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text):
        """Parse headered CSV; lines starting with ``#`` are comments."""
        names = None
        rows = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = next(csv.reader([line]))
            if names is None:
                names = [f.strip() for f in fields]
                continue
            if len(fields) != len(names):
                raise DatasetParseError(
                    f"line {lineno}: expected {len(names)} cells, found {len(fields)}",
                    row=lineno)
            row = []
            for col, cell in enumerate(fields, start=1):
                cell = cell.strip()
                if cell not in ("0", "1"):
                    raise DatasetParseError(
                        f"line {lineno}, column {col} ({names[col - 1]}): "
                        f"cell {cell!r} is not 0 or 1", row=lineno, column=col)
                row.append(int(cell))
            rows.append(row)
        if names is None:
            raise DatasetParseError("dataset file has no header")
        if not rows:
            raise DatasetParseError("dataset file has no samples")
        try:
            return cls(rows, names)
        except InvalidInput as exc:
            raise DatasetParseError(str(exc)) from exc


def _check_arcs(arcs, n):
    out = set()
    for arc in arcs:
        u, v = (int(x) for x in arc)
        if not (0 <= u < n and 0 <= v < n):
            raise InvalidGraph(f"arc {u}->{v} out of range for n={n}")
        if u == v:
            raise InvalidGraph(f"self-loop on node {u}")
        out.add((u, v))
    return out


def is_acyclic(arcs, n):
    """Kahn's topological sort; True iff every node can be ordered."""
    arcs = _check_arcs(arcs, n)
    indeg = [0] * n
    children = [[] for _ in range(n)]
    for u, v in arcs:
        children[u].append(v)
        indeg[v] += 1
    queue = deque(i for i in range(n) if indeg[i] == 0)
    seen = 0
    while queue:
        u = queue.popleft()
        seen += 1
        for v in children[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                queue.append(v)
    return seen == n


def topological_order(arcs, n):
    arcs = _check_arcs(arcs, n)
    indeg = [0] * n
    children = [[] for _ in range(n)]
    for u, v in sorted(arcs):
        children[u].append(v)
        indeg[v] += 1
    queue = deque(i for i in range(n) if indeg[i] == 0)
    order = []
    while queue:
        u = queue.popleft()
        order.append(u)
        for v in children[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                queue.append(v)
    if len(order) != n:
        raise InvalidGraph("graph has a cycle")
    return order


def has_path(arcs, n, src, dst):
    """True iff a directed path of length >= 1 leads from src to dst."""
    children = [[] for _ in range(n)]
    for u, v in arcs:
        children[u].append(v)
    stack = list(children[src])
    seen = set()
    while stack:
        u = stack.pop()
        if u == dst:
            return True
        if u in seen:
            continue
        seen.add(u)
        stack.extend(children[u])
    return False


class Dag:
    """Immutable directed acyclic graph over nodes 0..n-1."""

    __slots__ = ("n", "arcs", "names", "_parents")

    def __init__(self, n, arcs=(), names=None):
        n = int(n)
        if n < 0:
            raise InvalidGraph("node count must be non-negative")
        arcs = frozenset(_check_arcs(arcs, n))
        if not is_acyclic(arcs, n):
            raise InvalidGraph("arc set contains a cycle")
        if names is not None:
            names = tuple(str(x) for x in names)
            if len(names) != n:
                raise InvalidGraph(f"{len(names)} names for {n} nodes")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "arcs", arcs)
        object.__setattr__(self, "names", names)
        parents = [[] for _ in range(n)]
        for u, v in arcs:
            parents[v].append(u)
        object.__setattr__(self, "_parents", tuple(tuple(sorted(p)) for p in parents))

    def __setattr__(self, key, value):
        raise AttributeError("Dag is immutable")

    @classmethod
    def from_adjacency(cls, adj, names=None):
        adj = np.asarray(adj)
        us, vs = np.nonzero(adj)
        return cls(adj.shape[0], zip(us.tolist(), vs.tolist()), names)

    def parents(self, v):
        return self._parents[v]

    def adjacency(self):
        adj = np.zeros((self.n, self.n), dtype=np.uint8)
        for u, v in self.arcs:
            adj[u, v] = 1
        return adj

    def sorted_arcs(self):
        return sorted(self.arcs)

    def with_arcs(self, add=(), remove=()):
        return Dag(self.n, (self.arcs - set(remove)) | set(add), self.names)

    def __eq__(self, other):
        if not isinstance(other, Dag):
            return NotImplemented
        return self.n == other.n and self.arcs == other.arcs

    def __hash__(self):
        return hash((self.n, self.arcs))

    def __len__(self):
        return len(self.arcs)

    def __repr__(self):
        return f"Dag(n={self.n}, arcs={self.sorted_arcs()})"

    def to_document(self, **extra):
        doc = {
            "n": self.n,
            "names": list(self.names) if self.names else [f"X{i}" for i in range(self.n)],
            "arcs": [list(a) for a in self.sorted_arcs()],
        }
        doc.update(extra)
        return doc

    @classmethod
    def from_document(cls, doc):
        try:
            n = int(doc["n"])
            arcs = [tuple(a) for a in doc["arcs"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidGraph(f"malformed graph document: {exc}") from exc
        return cls(n, arcs, doc.get("names"))


def structural_hamming_components(truth, inferred):
    """(TP, FP, TN, FN) over all n(n-1) ordered node pairs."""
    if truth.n != inferred.n:
        raise InvalidComparison(f"node counts differ: {truth.n} vs {inferred.n}")
    tp = len(truth.arcs & inferred.arcs)
    fp = len(inferred.arcs - truth.arcs)
    fn = len(truth.arcs - inferred.arcs)
    tn = truth.n * (truth.n - 1) - tp - fp - fn
    return tp, fp, tn, fn


class ArcMask:
    """Boolean n x n table of admissible arcs."""

    def __init__(self, allowed):
        allowed = np.array(allowed, dtype=bool)
        if allowed.ndim != 2 or allowed.shape[0] != allowed.shape[1]:
            raise InvalidGraph(f"mask must be square, got shape {allowed.shape}")
        if allowed.diagonal().any():
            raise InvalidGraph("mask admits a self-loop")
        allowed.setflags(write=False)
        self.allowed = allowed

    @property
    def n(self):
        return self.allowed.shape[0]

    def __call__(self, u, v):
        return bool(self.allowed[u, v])

    def arcs(self):
        us, vs = np.nonzero(self.allowed)
        return list(zip(us.tolist(), vs.tolist()))

    def __len__(self):
        return int(self.allowed.sum())

    def is_antisymmetric(self):
        return not (self.allowed & self.allowed.T).any()

    def contains(self, dag):
        return all(self.allowed[u, v] for u, v in dag.arcs)

    def __eq__(self, other):
        if not isinstance(other, ArcMask):
            return NotImplemented
        return np.array_equal(self.allowed, other.allowed)

    def __repr__(self):
        return f"ArcMask(n={self.n}, allowed={len(self)})"

    def to_document(self, names=None, **extra):
        doc = {
            "n": self.n,
            "names": list(names) if names else [f"X{i}" for i in range(self.n)],
            "arcs": [list(a) for a in self.arcs()],
        }
        doc.update(extra)
        return doc


class ScoreCache:
    """Local scores keyed by (child, sorted parent tuple); one per search run."""

    def __init__(self):
        self._table = {}
        self.hits = 0
        self.misses = 0

    @staticmethod
    def key(child, parents):
        return (int(child), tuple(sorted(int(p) for p in parents)))

    def get(self, child, parents, compute):
        key = self.key(child, parents)
        try:
            value = self._table[key]
        except KeyError:
            self.misses += 1
            value = self._table[key] = compute(key[1])
            return value
        self.hits += 1
        return value

    def __len__(self):
        return len(self._table)

    def __contains__(self, key):
        return key in self._table


def dumps_document(doc):
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"
