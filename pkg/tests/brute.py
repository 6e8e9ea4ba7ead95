"""Exhaustive reference solvers, deliberately naive and independent of the
package's oracles.  Only for graphs of a dozen or two vertices."""
from __future__ import annotations

from itertools import combinations


def _adj(g):
    return [set(row) for row in g.nbr]


def is_vc(g, s):
    return all(u in s or v in s for u, v in g.edges())


def is_is(g, s):
    return not any(u in s and v in s for u, v in g.edges())


def is_ds(g, s):
    adj = _adj(g)
    return all(v in s or adj[v] & s for v in range(g.n))


def smallest(g, pred, limit=None):
    """Smallest k with a k-subset satisfying ``pred``, or None above ``limit``."""
    top = g.n if limit is None else min(limit, g.n)
    for k in range(top + 1):
        for c in combinations(range(g.n), k):
            if pred(g, set(c)):
                return k
    return None


def largest_is(g):
    for k in range(g.n, -1, -1):
        for c in combinations(range(g.n), k):
            if is_is(g, set(c)):
                return k
    return 0


def lex_witness(g, pred, k):
    """Lexicographically smallest sorted-ID list among k-subsets satisfying ``pred``."""
    best = None
    for c in combinations(range(g.n), k):
        if pred(g, set(c)):
            ids = sorted(g.ids[v] for v in c)
            if best is None or ids < best:
                best = ids
    return best


def max_matching(g):
    edges = list(g.edges())

    def rec(i, used):
        if i == len(edges):
            return 0
        u, v = edges[i]
        best = rec(i + 1, used)
        if u not in used and v not in used:
            best = max(best, 1 + rec(i + 1, used | {u, v}))
        return best

    return rec(0, frozenset())
