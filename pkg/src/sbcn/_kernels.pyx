# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled counting and scoring kernels (see _pykernels for the reference)."""
import numpy as np
cimport numpy as cnp
from libc.math cimport lgamma, log

cnp.import_array()

SCORE_LOGLIK = 0
SCORE_AIC = 1
SCORE_BIC = 2
SCORE_BDE = 3
SCORE_K2 = 4


def contingency(const cnp.uint8_t[:, ::1] data, Py_ssize_t child, parents):
    cdef Py_ssize_t m = data.shape[0]
    cdef Py_ssize_t k = len(parents)
    cdef Py_ssize_t i, b, cfg
    cdef cnp.int64_t[::1] pa = np.asarray(parents, dtype=np.int64)
    out = np.zeros((1 << k, 2), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] c = out
    for i in range(m):
        cfg = 0
        for b in range(k):
            if data[i, pa[b]]:
                cfg |= (<Py_ssize_t>1) << b
        c[cfg, data[i, child]] += 1
    return out


def local_score(const cnp.int64_t[:, ::1] counts, int kind, Py_ssize_t m, double alpha):
    cdef Py_ssize_t q = counts.shape[0]
    cdef Py_ssize_t j
    cdef double total = 0.0
    cdef double a_cell, a_row, lg_row, lg_cell
    cdef cnp.int64_t n0, n1, nj
    if kind == SCORE_BDE or kind == SCORE_K2:
        if kind == SCORE_K2:
            a_cell = 1.0
        else:
            a_cell = alpha / (2.0 * q)
        a_row = 2.0 * a_cell
        lg_row = lgamma(a_row)
        lg_cell = lgamma(a_cell)
        for j in range(q):
            n0 = counts[j, 0]
            n1 = counts[j, 1]
            total += lg_row - lgamma(a_row + n0 + n1)
            total += lgamma(a_cell + n0) - lg_cell
            total += lgamma(a_cell + n1) - lg_cell
        return total
    for j in range(q):
        n0 = counts[j, 0]
        n1 = counts[j, 1]
        nj = n0 + n1
        if n0 > 0:
            total += n0 * log(<double>n0 / nj)
        if n1 > 0:
            total += n1 * log(<double>n1 / nj)
    if kind == SCORE_AIC:
        total -= q
    elif kind == SCORE_BIC:
        total -= 0.5 * log(<double>m) * q
    return total


def transitive_closure(adj):
    a = np.ascontiguousarray(adj != 0, dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] r = a
    cdef Py_ssize_t n = r.shape[0]
    cdef Py_ssize_t i, j, k
    for k in range(n):
        for i in range(n):
            if r[i, k]:
                for j in range(n):
                    if r[k, j]:
                        r[i, j] = 1
    return a
