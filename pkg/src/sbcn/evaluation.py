"""Recovery metrics, the experiment grid, and result aggregation."""
import csv
import io
import itertools
import json
import logging
import math
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from sbcn import __version__
from sbcn.datagen import TOPOLOGIES, generate_structure, inject_noise, sample_dataset
from sbcn.model import InvalidComparison, structural_hamming_components
from sbcn.scoring import SCORE_KINDS, ScoreSpec
from sbcn.search import STRATEGIES, SearchSpec, run_search
from sbcn.suppes import full_mask, prima_facie_mask

logger = logging.getLogger(__name__)

STREAMS = {"structure": 1, "sampling": 2, "noise": 3, "search": 4}

RESULT_COLUMNS = (
    "topology", "n", "m", "noise", "search", "score", "suppes", "replicate", "seed",
    "tp", "fp", "tn", "fn", "accuracy", "sensitivity", "specificity", "wall_time_ms",
    "truth_arcs", "inferred_arcs", "mask_size", "outside_mask", "degenerate", "error",
)
AXES = ("topology", "n", "m", "noise", "search", "score", "suppes")
METRICS = ("accuracy", "sensitivity", "specificity")


def stream_seed(seed, name):
    """Integer seed of the named substream derived from a master seed."""
    return int(np.random.SeedSequence([int(seed), STREAMS[name]]).generate_state(1, np.uint64)[0])


def substream(seed, name):
    return np.random.default_rng(stream_seed(seed, name))


@dataclass(frozen=True)
class MetricRecord:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def accuracy(self):
        total = self.tp + self.tn + self.fp + self.fn
        return (self.tp + self.tn) / total if total else 1.0

    @property
    def sensitivity(self):
        pos = self.tp + self.fn
        return self.tp / pos if pos else 1.0

    @property
    def specificity(self):
        neg = self.fp + self.tn
        return self.tn / neg if neg else 1.0

    def as_dict(self):
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn,
                "accuracy": self.accuracy, "sensitivity": self.sensitivity,
                "specificity": self.specificity}


def _skeleton(dag):
    return {frozenset(a) for a in dag.arcs}


def metrics(truth, inferred, skeleton=False):
    """Arc-recovery counts and rates.

    Directed mode compares the n(n-1) ordered pairs; skeleton mode compares
    the n(n-1)/2 unordered pairs, ignoring orientation.
    """
    if truth.n != inferred.n:
        raise InvalidComparison(f"node counts differ: {truth.n} vs {inferred.n}")
    if not skeleton:
        return MetricRecord(*structural_hamming_components(truth, inferred))
    a, b = _skeleton(truth), _skeleton(inferred)
    tp = len(a & b)
    fp = len(b - a)
    fn = len(a - b)
    return MetricRecord(tp, fp, truth.n * (truth.n - 1) // 2 - tp - fp - fn, fn)


@dataclass
class ExperimentGrid:
    topologies: list = field(default_factory=lambda: ["tree"])
    node_counts: list = field(default_factory=lambda: [15])
    sample_sizes: list = field(default_factory=lambda: [100])
    noise_levels: list = field(default_factory=lambda: [0.0])
    searches: list = field(default_factory=lambda: ["hc"])
    scores: list = field(default_factory=lambda: ["bic"])
    suppes: list = field(default_factory=lambda: [True])
    replicates: int = 10
    base_seed: int = 0
    options: dict = field(default_factory=dict)  # search/score knobs shared by all cells

    _OPTION_KEYS = ("max_parents", "tabu_tenure", "tabu_max_iterations", "ga_population",
                    "ga_generations", "ga_mutation_rate", "bde_alpha", "significance")

    def __post_init__(self):
        self.suppes = [_as_flag(s) for s in self.suppes]
        for name in ("topologies", "node_counts", "sample_sizes", "noise_levels",
                     "searches", "scores", "suppes"):
            if not getattr(self, name):
                raise ValueError(f"grid axis {name!r} is empty")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        for t in self.topologies:
            if t not in TOPOLOGIES:
                raise ValueError(f"unknown topology {t!r}")
        for s in self.searches:
            if s not in STRATEGIES:
                raise ValueError(f"unknown search {s!r}")
        for s in self.scores:
            if s not in SCORE_KINDS:
                raise ValueError(f"unknown score {s!r}")
        unknown = set(self.options) - set(self._OPTION_KEYS)
        if unknown:
            raise ValueError(f"unknown grid options {sorted(unknown)}")

    @classmethod
    def from_document(cls, doc):
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown grid keys {sorted(unknown)}")
        return cls(**doc)

    def to_document(self):
        return asdict(self)

    def cells(self):
        """Cell parameter dicts in deterministic grid order."""
        for t, n, m, nu, s, sc, sup, r in itertools.product(
                self.topologies, self.node_counts, self.sample_sizes, self.noise_levels,
                self.searches, self.scores, self.suppes, range(self.replicates)):
            yield dict(topology=t, n=int(n), m=int(m), noise=float(nu), search=s, score=sc,
                       suppes=sup, replicate=r, base_seed=self.base_seed, **self.options)

    def __len__(self):
        return (len(self.topologies) * len(self.node_counts) * len(self.sample_sizes)
                * len(self.noise_levels) * len(self.searches) * len(self.scores)
                * len(self.suppes) * self.replicates)


def _as_flag(value):
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.lower() in ("on", "true", "yes", "1"):
        return True
    if isinstance(value, str) and value.lower() in ("off", "false", "no", "0"):
        return False
    raise ValueError(f"cannot read {value!r} as on/off")


def cell_key(row):
    return (row["topology"], int(row["n"]), int(row["m"]), float(row["noise"]), row["search"],
            row["score"], bool(row["suppes"]), int(row["replicate"]))


def make_dataset(topology, n, m, noise, seed):
    """Ground-truth model and noisy dataset for one replicate seed."""
    model = generate_structure(topology, n, substream(seed, "structure"))
    clean = sample_dataset(model, m, substream(seed, "sampling"))
    return model, inject_noise(clean, noise, substream(seed, "noise"))


def run_cell(topology, n, m, noise, search, score, suppes, replicate, base_seed=0,
             max_parents=3, tabu_tenure=10, tabu_max_iterations=100, ga_population=32,
             ga_generations=100, ga_mutation_rate=0.01, bde_alpha=1.0, significance=None):
    """Generate, learn and score one grid cell; never raises."""
    seed = int(base_seed) + int(replicate)
    row = dict(topology=topology, n=n, m=m, noise=noise, search=search, score=score,
               suppes=bool(suppes), replicate=replicate, seed=seed)
    start = time.perf_counter()
    try:
        model, data = make_dataset(topology, n, m, noise, seed)
        pf_mask = prima_facie_mask(data, significance=significance)
        mask = pf_mask if suppes else full_mask(n)
        search_spec = SearchSpec(search, max_parents, tabu_tenure, tabu_max_iterations,
                                 ga_population, ga_generations, ga_mutation_rate,
                                 stream_seed(seed, "search"))
        result = run_search(data, mask, ScoreSpec(score, bde_alpha), search_spec)
        inferred = result.dag
        outside = sum(1 for a in inferred.arcs if not pf_mask(*a))
        if suppes and outside:
            raise AssertionError(f"{outside} inferred arcs outside the prima facie set")
        rec = metrics(model.dag, inferred)
        counts = data.values.sum(axis=0)
        row.update(rec.as_dict())
        row.update(truth_arcs=len(model.dag), inferred_arcs=len(inferred), mask_size=len(pf_mask),
                   outside_mask=outside,
                   degenerate=int(((counts == 0) | (counts == data.m)).sum()), error="")
    except Exception as exc:  # recorded per cell, the grid keeps going
        logger.warning("cell %s failed: %s", cell_key(row), exc)
        for col in RESULT_COLUMNS:
            row.setdefault(col, "")
        row["error"] = f"{type(exc).__name__}: {exc}"
    row["wall_time_ms"] = round((time.perf_counter() - start) * 1000.0, 3)
    return row


def _run_cell_kwargs(kwargs):
    return run_cell(**kwargs)


def default_workers():
    env = os.environ.get("SBCN_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_grid(grid, workers=None, journal=None, progress=None):
    """Run every cell of ``grid``; rows come back sorted by grid key.

    ``journal`` is a path to a JSON-lines file of finished rows; rows already
    present there are reused, new ones are appended as they complete.
    """
    done = {}
    fingerprint = {"grid": grid.to_document()}
    fresh = True
    if journal and os.path.exists(journal):
        with open(journal) as fh:
            lines = [line for line in (x.strip() for x in fh) if line]
        if lines:
            fresh = False
            if json.loads(lines[0]) != fingerprint:
                raise ValueError(f"journal {journal} was written for a different grid")
            for line in lines[1:]:
                row = json.loads(line)
                done[cell_key(row)] = row
    todo = []
    for kwargs in grid.cells():
        probe = dict(kwargs)
        if cell_key(probe) not in done:
            todo.append(kwargs)
    total = len(grid)
    finished = total - len(todo)
    jh = open(journal, "a") if journal else None
    if jh and fresh:
        jh.write(json.dumps(fingerprint) + "\n")
    try:
        def record(row):
            nonlocal finished
            done[cell_key(row)] = row
            finished += 1
            if jh:
                jh.write(json.dumps(row) + "\n")
                jh.flush()
            if progress:
                progress(finished, total, row)

        workers = workers or 1
        if workers > 1 and len(todo) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for row in pool.map(_run_cell_kwargs, todo, chunksize=1):
                    record(row)
        else:
            for kwargs in todo:
                record(run_cell(**kwargs))
    finally:
        if jh:
            jh.close()
    wanted = {cell_key(dict(k)) for k in grid.cells()}
    return [done[k] for k in sorted(wanted)]


def aggregate(rows):
    """Mean and population standard deviation of each metric per grid cell."""
    if not rows:
        raise ValueError("no records to aggregate")
    groups = {}
    for row in rows:
        if row.get("error"):
            continue
        key = tuple(row[a] for a in AXES)
        groups.setdefault(key, []).append(row)
    summary = []
    for key in sorted(groups, key=lambda k: tuple(str(x) for x in k)):
        group = groups[key]
        out = dict(zip(AXES, key))
        out["count"] = len(group)
        for metric in METRICS:
            values = sorted(float(r[metric]) for r in group)
            out[f"{metric}_mean"] = math.fsum(values) / len(values)
            out[f"{metric}_std"] = statistics.pstdev(values) if len(values) > 1 else 0.0
        summary.append(out)
    return summary


def _fmt(value):
    if isinstance(value, bool):
        return "on" if value else "off"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_rows(rows, columns, header_lines=()):
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c, "")) for c in columns])
    return buf.getvalue()


def read_rows(text):
    lines = [line for line in text.splitlines() if line and not line.startswith("#")]
    return list(csv.DictReader(lines))


def provenance_header(command, config):
    return [f"sbcn {__version__} {command}", "config " + json.dumps(config, sort_keys=True)]
