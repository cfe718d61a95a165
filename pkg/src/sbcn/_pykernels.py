"""Pure-Python/numpy versions of the numerical kernels.

These mirror ``_kernels.pyx`` one for one and are used whenever the compiled
extension is unavailable (or ``SBCN_PURE_PYTHON=1`` is set).
"""
from math import lgamma, log

import numpy as np

SCORE_LOGLIK = 0
SCORE_AIC = 1
SCORE_BIC = 2
SCORE_BDE = 3
SCORE_K2 = 4


def contingency(data, child, parents):
    """Counts table of shape (2**k, 2); row index has parent j at bit j."""
    k = len(parents)
    config = np.zeros(data.shape[0], dtype=np.int64)
    for bit, p in enumerate(parents):
        config |= data[:, p].astype(np.int64) << bit
    flat = config * 2 + data[:, child]
    return np.bincount(flat, minlength=2 << k).reshape(1 << k, 2).astype(np.int64)


def local_score(counts, kind, m, alpha):
    """Local score of one family from its counts table."""
    q = counts.shape[0]
    total = 0.0
    if kind == SCORE_BDE or kind == SCORE_K2:
        if kind == SCORE_K2:
            a_cell = 1.0
        else:
            a_cell = alpha / (2.0 * q)
        a_row = 2.0 * a_cell
        lg_row = lgamma(a_row)
        lg_cell = lgamma(a_cell)
        for j in range(q):
            n0 = int(counts[j, 0])
            n1 = int(counts[j, 1])
            total += lg_row - lgamma(a_row + n0 + n1)
            total += lgamma(a_cell + n0) - lg_cell
            total += lgamma(a_cell + n1) - lg_cell
        return total
    for j in range(q):
        n0 = int(counts[j, 0])
        n1 = int(counts[j, 1])
        nj = n0 + n1
        if n0 > 0:
            total += n0 * log(n0 / nj)
        if n1 > 0:
            total += n1 * log(n1 / nj)
    if kind == SCORE_AIC:
        total -= q
    elif kind == SCORE_BIC:
        total -= 0.5 * log(m) * q
    return total


def transitive_closure(adj):
    """reach[i, j] is 1 iff a directed path of length >= 1 leads from i to j."""
    n = adj.shape[0]
    reach = (np.asarray(adj) != 0).astype(np.uint8)
    for k in range(n):
        col = reach[:, k].astype(bool)
        if col.any():
            reach[col] |= reach[k]
    return reach
