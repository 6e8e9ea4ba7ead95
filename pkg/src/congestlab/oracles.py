"""Exact centralized solvers used as ground truth.

Vertex problems run a bitmask branch-and-bound over induced subgraphs.  Once
the optimum is known, the reported witness is the lexicographically smallest
optimal set by sorted node ID, found by deciding vertices in ascending ID
order and keeping each decision only if the optimum is still reachable.
"""
from __future__ import annotations

import operator
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable

import networkx as nx

from .graph import PortGraph

PROBLEMS = ("MVC", "MDS", "MaxIS", "MaxM")
MAX_VERTICES = {"MVC": 40, "MaxIS": 40, "MDS": 30}


class OracleRefusal(RuntimeError):
    """The instance is larger than the solver's size guard."""


@dataclass(frozen=True)
class Solution:
    problem: str
    witness: frozenset            # node indices, or frozensets {u, v} of indices
    size: int

    def check(self, g: PortGraph) -> list[str]:
        """Independent validity check; returns a list of problems found."""
        errs = []
        if self.size != len(self.witness):
            errs.append(f"size {self.size} != witness size {len(self.witness)}")
        if self.problem == "MaxM":
            used: set[int] = set()
            for e in self.witness:
                u, v = tuple(e)
                if not g.has_edge(u, v):
                    errs.append(f"{u}-{v} is not an edge")
                if u in used or v in used:
                    errs.append(f"edge {u}-{v} shares an endpoint")
                used.update((u, v))
            return errs
        s = self.witness
        if any(not 0 <= v < g.n for v in s):
            errs.append("witness has a node outside the graph")
            return errs
        if self.problem == "MVC":
            errs += [f"edge {u}-{v} uncovered" for u, v in g.edges() if u not in s and v not in s]
        elif self.problem == "MaxIS":
            errs += [f"edge {u}-{v} inside the set" for u, v in g.edges() if u in s and v in s]
        elif self.problem == "MDS":
            errs += [f"node {v} undominated" for v in range(g.n)
                     if v not in s and not any(w in s for w in g.nbr[v])]
        else:
            errs.append(f"unknown problem {self.problem}")
        return errs

    def is_valid(self, g: PortGraph) -> bool:
        return not self.check(g)

    def ids(self, g: PortGraph) -> list:
        if self.problem == "MaxM":
            return sorted(sorted(g.ids[v] for v in e) for e in self.witness)
        return sorted(g.ids[v] for v in self.witness)

    def to_json(self, g: PortGraph) -> dict:
        return {"problem": self.problem, "size": self.size, "witness": self.ids(g)}


def _masks(g: PortGraph) -> list[int]:
    return [sum(1 << w for w in row) for row in g.nbr]


def _bits(mask: int) -> Iterable[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _guard(g: PortGraph, problem: str, max_vertices: int | None) -> None:
    limit = MAX_VERTICES[problem] if max_vertices is None else max_vertices
    if g.n > limit:
        raise OracleRefusal(f"{problem} oracle refuses a {g.n}-vertex graph (limit {limit})")


class _Independence:
    """Maximum independent set size of induced subgraphs, memoised by mask."""

    def __init__(self, adj: list[int]):
        self.adj = adj
        self.alpha = lru_cache(maxsize=None)(self._alpha)

    def _alpha(self, mask: int) -> int:
        adj = self.adj
        taken = 0
        # degree 0 and 1 vertices are always safe to take
        while True:
            changed = False
            for v in _bits(mask):
                d = (adj[v] & mask).bit_count()
                if d <= 1:
                    taken += 1
                    mask &= ~((1 << v) | adj[v])
                    changed = True
                    break
            if not changed:
                break
        if not mask:
            return taken
        best_v, best_d = -1, -1
        for v in _bits(mask):
            d = (adj[v] & mask).bit_count()
            if d > best_d:
                best_v, best_d = v, d
        if best_d == 2:
            # disjoint union of cycles: floor(len / 2) each
            total = 0
            rest = mask
            while rest:
                v = (rest & -rest).bit_length() - 1
                comp, frontier = 1 << v, 1 << v
                while frontier:
                    nxt = 0
                    for u in _bits(frontier):
                        nxt |= adj[u] & rest
                    frontier = nxt & ~comp
                    comp |= nxt
                total += comp.bit_count() // 2
                rest &= ~comp
            return taken + total
        b = 1 << best_v
        with_v = 1 + self.alpha(mask & ~(b | adj[best_v]))
        without_v = self.alpha(mask & ~b)
        return taken + max(with_v, without_v)


def _order(g: PortGraph) -> list[int]:
    return sorted(range(g.n), key=lambda v: g.ids[v])


def exact_maxis(g: PortGraph, max_vertices: int | None = None) -> Solution:
    _guard(g, "MaxIS", max_vertices)
    adj = _masks(g)
    ind = _Independence(adj)
    full = (1 << g.n) - 1
    target = ind.alpha(full)
    chosen, avail, need = [], full, target
    for v in _order(g):
        if not avail >> v & 1:
            continue
        rest = avail & ~((1 << v) | adj[v])
        if 1 + ind.alpha(rest) == need:
            chosen.append(v)
            need -= 1
            avail = rest
        else:
            avail &= ~(1 << v)
    return Solution("MaxIS", frozenset(chosen), target)


def exact_mvc(g: PortGraph, max_vertices: int | None = None) -> Solution:
    _guard(g, "MVC", max_vertices)
    adj = _masks(g)
    ind = _Independence(adj)
    full = (1 << g.n) - 1
    target = g.n - ind.alpha(full)
    # Decisions so far: cover holds ``forced``; ``free`` vertices are undecided.
    forced, free = 0, full
    for v in _order(g):
        if not free >> v & 1:
            continue
        b = 1 << v
        rest = free & ~b
        if forced.bit_count() + 1 + rest.bit_count() - ind.alpha(rest) == target:
            forced |= b
            free = rest
        else:
            # v stays out of the cover, so all its undecided neighbours go in
            nb = adj[v] & free
            forced |= nb
            free &= ~(b | nb)
    return Solution("MVC", frozenset(_bits(forced)), target)


class _Domination:
    """Can ``targets`` be dominated by at most ``k`` vertices from ``cands``?"""

    def __init__(self, closed: list[int]):
        self.closed = closed
        self.feasible = lru_cache(maxsize=None)(self._feasible)

    def _feasible(self, targets: int, cands: int, k: int) -> bool:
        if not targets:
            return True
        if k <= 0:
            return False
        closed = self.closed
        best_cover = max(((closed[c] & targets).bit_count() for c in _bits(cands)), default=0)
        if best_cover == 0 or best_cover * k < targets.bit_count():
            return False
        # branch on the target with the fewest dominators
        pick_opts = None
        for t in _bits(targets):
            opts = closed[t] & cands
            cnt = opts.bit_count()
            if cnt == 0:
                return False
            if pick_opts is None or cnt < pick_opts.bit_count():
                pick_opts = opts
                if cnt == 1:
                    break
        remaining = cands
        for c in _bits(pick_opts):
            if self.feasible(targets & ~closed[c], remaining & ~(1 << c), k - 1):
                return True
            remaining &= ~(1 << c)   # later branches never use c
        return False


def min_dominating(closed: list[int], targets: int, cands: int, order: list[int],
                   limit: int | None = None) -> tuple[int, list[int]] | None:
    """Smallest set from ``cands`` dominating ``targets`` (closed neighbourhoods
    given as bitmasks), lexicographically first along ``order``.  Returns
    ``None`` if more than ``limit`` vertices would be needed."""
    dom = _Domination(closed)
    k = 0
    cap = cands.bit_count() if limit is None else limit
    while not dom.feasible(targets, cands, k):
        k += 1
        if k > cap:
            return None
    chosen, need = [], k
    for v in order:
        if not cands >> v & 1 or not targets:
            continue
        nt = targets & ~closed[v]
        nc = cands & ~(1 << v)
        if dom.feasible(nt, nc, need - 1):
            chosen.append(v)
            need -= 1
            targets, cands = nt, nc
        else:
            cands = nc
    return k, chosen


def exact_mds(g: PortGraph, max_vertices: int | None = None) -> Solution:
    _guard(g, "MDS", max_vertices)
    closed = [m | (1 << v) for v, m in enumerate(_masks(g))]
    full = (1 << g.n) - 1
    size, chosen = min_dominating(closed, full, full, _order(g))
    return Solution("MDS", frozenset(chosen), size)


def exact_maxm(g: PortGraph) -> Solution:
    G = nx.Graph()
    G.add_nodes_from(range(g.n))
    G.add_edges_from(g.edges())
    mate = nx.max_weight_matching(G, maxcardinality=True)
    witness = frozenset(frozenset(e) for e in mate)
    return Solution("MaxM", witness, len(witness))


def solve(g: PortGraph, problem: str, max_vertices: int | None = None) -> Solution:
    if problem == "MaxM":
        return exact_maxm(g)
    fn = {"MVC": exact_mvc, "MDS": exact_mds, "MaxIS": exact_maxis}.get(problem)
    if fn is None:
        raise ValueError(f"unknown problem {problem!r}; choose from {', '.join(PROBLEMS)}")
    return fn(g, max_vertices)


_CMP = {"=": operator.eq, "<=": operator.le, ">=": operator.ge}


@dataclass
class VerifyReport:
    family: str
    problem: str
    comparator: str
    predicted: int
    optimum: int
    passed: bool
    tag: str = ""
    witness: list = field(default_factory=list)

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (f"{verdict} {self.family} {self.problem}: optimum {self.optimum}, "
                f"predicted {self.comparator} {self.predicted} [{self.tag}]")


def verify_instance(inst, max_vertices: int | None = None) -> VerifyReport:
    """Solve an instance exactly and compare with its predicted optimum."""
    problem, cmp, value, tag = inst.predicted
    if cmp not in _CMP:
        raise ValueError(f"unknown comparator {cmp!r}")
    sol = solve(inst.graph, problem, max_vertices)
    bad = sol.check(inst.graph)
    if bad:
        raise AssertionError(f"oracle produced an invalid witness: {bad[:3]}")
    return VerifyReport(inst.family, problem, cmp, value, sol.size,
                        _CMP[cmp](sol.size, value), tag, sol.ids(inst.graph))
