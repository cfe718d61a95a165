"""Command-line front end: ``sbcn generate | infer | eval | benchmark``."""
import argparse
import json
import logging
import sys
import time

from sbcn import __version__
from sbcn.datagen import TOPOLOGIES, generate_structure, inject_noise, sample_dataset
from sbcn.evaluation import (
    AXES, METRICS, RESULT_COLUMNS, ExperimentGrid, aggregate, default_workers, metrics,
    provenance_header, run_grid, stream_seed, substream, write_rows,
)
from sbcn.model import BinaryDataset, Dag, DatasetParseError, InvalidComparison, InvalidGraph, dumps_document
from sbcn.scoring import SCORE_KINDS, ScoreSpec
from sbcn.search import STRATEGIES, SearchSpec, run_search
from sbcn.suppes import full_mask, prima_facie_mask

logger = logging.getLogger("sbcn")


class CommandError(Exception):
    """Runtime failure reported with exit status 1."""


def _on_off(value):
    v = value.lower()
    if v in ("on", "true", "yes", "1"):
        return True
    if v in ("off", "false", "no", "0"):
        return False
    raise argparse.ArgumentTypeError(f"expected on/off, got {value!r}")


def _rate(value):
    x = float(value)
    if not 0.0 <= x <= 1.0:
        raise argparse.ArgumentTypeError(f"{value} is not in [0, 1]")
    return x


def _positive_int(value):
    x = int(value)
    if x < 1:
        raise argparse.ArgumentTypeError(f"{value} must be >= 1")
    return x


def _read_text(path):
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise CommandError(f"cannot read {path}: {exc}") from exc


def _write_text(path, text):
    if path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise CommandError(f"cannot write {path}: {exc}") from exc


def _read_graph(path):
    try:
        return Dag.from_document(json.loads(_read_text(path)))
    except (json.JSONDecodeError, InvalidGraph) as exc:
        raise CommandError(f"{path}: {exc}") from exc


def cmd_generate(args):
    config = {
        "topology": args.topology, "nodes": args.nodes, "samples": args.samples,
        "noise": args.noise, "fp_rate": args.fp_rate, "fn_rate": args.fn_rate, "seed": args.seed,
        "streams": {s: stream_seed(args.seed, s) for s in ("structure", "sampling", "noise")},
    }
    model = generate_structure(args.topology, args.nodes, substream(args.seed, "structure"))
    clean = sample_dataset(model, args.samples, substream(args.seed, "sampling"))
    data = inject_noise(clean, args.noise, substream(args.seed, "noise"),
                        fp_rate=args.fp_rate, fn_rate=args.fn_rate)
    header = provenance_header("generate", config)
    _write_text(args.out, data.to_csv(header))
    if args.truth:
        doc = model.to_document(version=__version__, config=config)
        doc["names"] = list(data.variable_names)
        _write_text(args.truth, dumps_document(doc))
    return 0


def _search_spec(args, seed):
    return SearchSpec(args.search, args.max_parents, args.tabu_tenure, args.tabu_iters,
                      args.ga_pop, args.ga_gens, args.ga_mut, seed)


def cmd_infer(args):
    try:
        data = BinaryDataset.from_csv(_read_text(args.data))
    except DatasetParseError as exc:
        raise CommandError(f"{args.data}: {exc}") from exc
    search = _search_spec(args, stream_seed(args.seed, "search"))
    spec = ScoreSpec(args.score, args.bde_alpha)
    config = {
        "data": args.data, "search": args.search, "score": args.score,
        "bde_alpha": args.bde_alpha, "suppes": "on" if args.suppes else "off",
        "significance": args.significance, "seed": args.seed,
        "max_parents": args.max_parents, "tabu_tenure": args.tabu_tenure,
        "tabu_iters": args.tabu_iters, "ga_pop": args.ga_pop, "ga_gens": args.ga_gens,
        "ga_mut": args.ga_mut, "search_seed": search.rng_seed,
    }
    start = time.perf_counter()
    pf = prima_facie_mask(data, significance=args.significance)
    mask = pf if args.suppes else full_mask(data.n)
    result = run_search(data, mask, spec, search)
    wall_ms = (time.perf_counter() - start) * 1000.0
    doc = result.dag.to_document(
        version=__version__, config=config, score=result.score, score_kind=args.score,
        mask_size=len(pf), steps=result.steps)
    if args.out:
        _write_text(args.out, dumps_document(doc))
    unit = "generations" if args.search == "ga" else "moves"
    print(f"score={result.score!r} kind={args.score} arcs={len(result.dag)} "
          f"mask_size={len(pf)} {unit}={result.steps} wall_time_ms={wall_ms:.1f}")
    return 0


def cmd_eval(args):
    truth = _read_graph(args.truth)
    inferred = _read_graph(args.inferred)
    try:
        rec = metrics(truth, inferred, skeleton=args.skeleton)
    except InvalidComparison as exc:
        raise CommandError(str(exc)) from exc
    config = {"truth": args.truth, "inferred": args.inferred,
              "mode": "skeleton" if args.skeleton else "directed"}
    columns = ("tp", "fp", "tn", "fn") + METRICS
    sys.stdout.write(write_rows([rec.as_dict()], columns, provenance_header("eval", config)))
    return 0


def cmd_benchmark(args):
    try:
        grid = ExperimentGrid.from_document(json.loads(_read_text(args.config)))
    except (json.JSONDecodeError, TypeError, ValueError) as exc:
        raise CommandError(f"{args.config}: {exc}") from exc
    workers = args.workers or default_workers()
    journal = args.journal or args.out + ".journal"

    def progress(done, total, row):
        status = "FAILED " + row["error"] if row.get("error") else "ok"
        print(f"[{done}/{total}] {row['topology']} n={row['n']} m={row['m']} "
              f"noise={row['noise']} {row['search']}/{row['score']} "
              f"suppes={'on' if row['suppes'] else 'off'} rep={row['replicate']} {status}",
              file=sys.stderr)

    rows = run_grid(grid, workers=workers, journal=journal,
                    progress=None if args.quiet else progress)
    header = provenance_header("benchmark", grid.to_document())
    _write_text(args.out, write_rows(rows, RESULT_COLUMNS, header))
    if args.summary:
        cols = AXES + ("count",) + tuple(f"{m}_{s}" for m in METRICS for s in ("mean", "std"))
        ok = [r for r in rows if not r.get("error")]
        _write_text(args.summary, write_rows(aggregate(ok) if ok else [], cols, header))
    failed = sum(1 for r in rows if r.get("error"))
    if failed:
        print(f"{failed} of {len(rows)} cells failed", file=sys.stderr)
    return 1 if failed > 0.01 * len(rows) else 0


def build_parser():
    parser = argparse.ArgumentParser(prog="sbcn", description=__doc__)
    parser.add_argument("--version", action="version", version=f"sbcn {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="sample a synthetic dataset and its ground truth")
    g.add_argument("--topology", required=True, choices=TOPOLOGIES)
    g.add_argument("--nodes", required=True, type=_positive_int)
    g.add_argument("--samples", required=True, type=_positive_int)
    g.add_argument("--noise", type=_rate, default=0.0)
    g.add_argument("--fp-rate", type=_rate, default=None, help="override 0->1 flip rate")
    g.add_argument("--fn-rate", type=_rate, default=None, help="override 1->0 flip rate")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="dataset CSV path ('-' for stdout)")
    g.add_argument("--truth", help="ground-truth graph document path")
    g.set_defaults(func=cmd_generate)

    i = sub.add_parser("infer", help="learn a network from a dataset")
    i.add_argument("--data", required=True)
    i.add_argument("--out", help="inferred graph document path")
    i.add_argument("--search", choices=STRATEGIES, default="hc")
    i.add_argument("--score", choices=SCORE_KINDS, default="bic")
    i.add_argument("--bde-alpha", type=float, default=1.0)
    i.add_argument("--suppes", type=_on_off, default=True, metavar="on|off")
    i.add_argument("--significance", type=_rate, default=None,
                   help="require one-sided tests at this level when mining the mask")
    i.add_argument("--seed", type=int, default=0)
    i.add_argument("--max-parents", type=int, default=3)
    i.add_argument("--tabu-tenure", type=int, default=10)
    i.add_argument("--tabu-iters", type=int, default=100)
    i.add_argument("--ga-pop", type=int, default=32)
    i.add_argument("--ga-gens", type=int, default=100)
    i.add_argument("--ga-mut", type=_rate, default=0.01)
    i.set_defaults(func=cmd_infer)

    e = sub.add_parser("eval", help="compare an inferred graph with the ground truth")
    e.add_argument("--truth", required=True)
    e.add_argument("--inferred", required=True)
    e.add_argument("--skeleton", action="store_true", help="ignore arc orientation")
    e.set_defaults(func=cmd_eval)

    b = sub.add_parser("benchmark", help="run an experiment grid")
    b.add_argument("--config", required=True, help="JSON grid document")
    b.add_argument("--out", required=True, help="results CSV path")
    b.add_argument("--summary", help="optional aggregated CSV path")
    b.add_argument("--workers", type=_positive_int, default=None,
                   help="worker processes (default: $SBCN_WORKERS or CPU count)")
    b.add_argument("--journal", help="completion journal (default: <out>.journal)")
    b.add_argument("-q", "--quiet", action="store_true")
    b.set_defaults(func=cmd_benchmark)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CommandError as exc:
        print(f"sbcn {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"sbcn {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
