"""Prima facie arc mining: temporal priority and probability raising.

Probabilities are empirical frequencies.  Comparisons are done on integer
counts (cross-multiplied) so that ties are detected exactly.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from sbcn.model import ArcMask

logger = logging.getLogger(__name__)


class DegenerateVariable(ValueError):
    """A variable whose empirical marginal is 0 or 1."""


@dataclass(frozen=True)
class MarginalTable:
    m: int
    counts: np.ndarray  # per-variable count of ones
    joint_counts: np.ndarray  # co-occurrence counts of ones, symmetric

    @property
    def p(self):
        return self.counts / self.m

    @property
    def joint(self):
        return self.joint_counts / self.m

    @property
    def n(self):
        return len(self.counts)

    def degenerate(self, i):
        return self.counts[i] == 0 or self.counts[i] == self.m

    def _check(self, *nodes):
        for i in nodes:
            if self.degenerate(i):
                raise DegenerateVariable(
                    f"variable {i} has marginal {self.counts[i]}/{self.m}")

    def conditional(self, v, u):
        """(P(v|u), P(v|not u))."""
        self._check(u)
        c_u = int(self.counts[u])
        c_uv = int(self.joint_counts[u, v])
        return c_uv / c_u, (int(self.counts[v]) - c_uv) / (self.m - c_u)


def marginals(data):
    x = data.values.astype(np.int64)
    counts = x.sum(axis=0)
    joint = x.T @ x
    return MarginalTable(data.m, counts, joint)


def temporal_priority(table, u, v):
    table._check(u, v)
    return bool(table.counts[u] > table.counts[v])


def probability_raising(table, u, v):
    table._check(u, v)
    m = table.m
    c_u = int(table.counts[u])
    c_v = int(table.counts[v])
    c_uv = int(table.joint_counts[u, v])
    # c_uv / c_u > (c_v - c_uv) / (m - c_u), both denominators positive
    return c_uv * (m - c_u) > (c_v - c_uv) * c_u


def _one_sided_p(x1, n1, x2, n2):
    """p-value of H1: p1 > p2 for a pooled two-proportion z-test."""
    pooled = (x1 + x2) / (n1 + n2)
    var = pooled * (1 - pooled) * (1 / n1 + 1 / n2)
    if var <= 0:
        return 1.0
    z = (x1 / n1 - x2 / n2) / math.sqrt(var)
    return 0.5 * math.erfc(z / math.sqrt(2))


def prima_facie_mask(data, significance=None):
    """Arc mask admitting u->v iff P(u) > P(v) and P(v|u) > P(v|not u).

    With ``significance`` set to a level alpha, each inequality must in
    addition pass a one-sided two-proportion test at that level.
    """
    table = marginals(data)
    n = data.n
    m = data.m
    allowed = np.zeros((n, n), dtype=bool)
    degenerate = [i for i in range(n) if table.degenerate(i)]
    if degenerate:
        logger.info("degenerate variables excluded from the mask: %s",
                    [data.variable_names[i] for i in degenerate])
    ok = [i for i in range(n) if not table.degenerate(i)]
    for u in ok:
        for v in ok:
            if u == v:
                continue
            if not (temporal_priority(table, u, v) and probability_raising(table, u, v)):
                continue
            if significance is not None:
                c_u = int(table.counts[u])
                c_v = int(table.counts[v])
                c_uv = int(table.joint_counts[u, v])
                if _one_sided_p(c_u, m, c_v, m) >= significance:
                    continue
                if _one_sided_p(c_uv, c_u, c_v - c_uv, m - c_u) >= significance:
                    continue
            allowed[u, v] = True
    return ArcMask(allowed)


def full_mask(n):
    allowed = ~np.eye(n, dtype=bool)
    return ArcMask(allowed)
