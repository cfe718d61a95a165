"""Compare the compiled kernels with the pure-Python fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]

Micro-benchmarks call both kernel modules directly.  The end-to-end hill
climb runs in two subprocesses, one with SBCN_PURE_PYTHON=1, because the
backend is fixed at import time.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from sbcn import _pykernels

try:
    from sbcn import _kernels
except ImportError:
    _kernels = None

END_TO_END = """
import time
import numpy as np
from sbcn.evaluation import make_dataset
from sbcn.scoring import ScoreSpec
from sbcn.search import hill_climb_result
from sbcn.suppes import full_mask
_, data = make_dataset("dag_disj_multi", {n}, {m}, 0.05, 11)
t = time.perf_counter()
for _ in range({repeat}):
    hill_climb_result(data, full_mask({n}), ScoreSpec("bic"))
print((time.perf_counter() - t) / {repeat})
"""


def best_of(fn, number, repeat):
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def micro(module, repeat):
    rng = np.random.default_rng(0)
    data = np.ascontiguousarray((rng.random((1000, 20)) < 0.5).astype(np.uint8))
    counts = np.ascontiguousarray(module.contingency(data, 0, (1, 2, 3)))
    adj = np.ascontiguousarray(rng.random((30, 30)) < 0.08)
    np.fill_diagonal(adj, False)
    return {
        "contingency m=1000 k=3": best_of(lambda: module.contingency(data, 0, (1, 2, 3)), 2000, repeat),
        "local_score bde k=3": best_of(
            lambda: module.local_score(counts, module.SCORE_BDE, 1000, 1.0), 20000, repeat),
        "transitive_closure n=30": best_of(lambda: module.transitive_closure(adj), 500, repeat),
    }


def end_to_end(pure, repeat, n=15, m=200):
    env = dict(os.environ)
    env.pop("SBCN_PURE_PYTHON", None)
    if pure:
        env["SBCN_PURE_PYTHON"] = "1"
    code = END_TO_END.format(n=n, m=m, repeat=repeat)
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True)
    return float(out.stdout.strip())


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)

    rows = []
    py = micro(_pykernels, args.repeat)
    cy = micro(_kernels, args.repeat) if _kernels else {}
    for name, t_py in py.items():
        rows.append((name, cy.get(name), t_py))
    rows.append(("hill climb n=15 m=200 (bic, no mask)",
                 end_to_end(False, 3) if _kernels else None, end_to_end(True, 3)))

    print(f"{'benchmark':<40} {'cython':>12} {'python':>12} {'speedup':>8}")
    for name, t_cy, t_py in rows:
        cy_txt = f"{t_cy * 1e6:10.1f}us" if t_cy is not None else f"{'n/a':>12}"
        speed = f"{t_py / t_cy:7.1f}x" if t_cy else f"{'n/a':>8}"
        print(f"{name:<40} {cy_txt} {t_py * 1e6:10.1f}us {speed}")
    if _kernels is None:
        print("compiled extension not built; only the fallback was timed")


if __name__ == "__main__":
    main()
