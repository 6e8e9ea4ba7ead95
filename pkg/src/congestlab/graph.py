"""Port-numbered undirected graphs.

A :class:`PortGraph` stores, for every node ``v`` (an index ``0..n-1``), the
neighbour reached through each of its ports ``1..deg(v)`` together with the
port number that the edge occupies at the far end.  Node IDs are kept
separately so that ID assignment, port assignment and the port-preserving
crossing can each be applied without touching anything else.

Graphs are immutable; every operation returns a new object.
"""
from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np


class GraphError(ValueError):
    """Raised when a graph or an operation on it violates an invariant."""


class GraphFormatError(GraphError):
    """Raised by :func:`read_graph` with the offending line number."""

    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


@dataclass(frozen=True)
class EdgeRef:
    """One edge seen from a fixed orientation: ``u --(pu) ... (pv)-- v``."""

    u: int
    v: int
    pu: int
    pv: int

    def flipped(self) -> "EdgeRef":
        return EdgeRef(self.v, self.u, self.pv, self.pu)


class PortGraph:
    """Undirected simple graph with per-node port numbering and node IDs.

    Parameters
    ----------
    ids : sequence of int
        ``ids[v]`` is the ID of node ``v``.
    nbr : sequence of sequences
        ``nbr[v][p - 1]`` is the neighbour behind port ``p`` of ``v``.
    back : sequence of sequences
        ``back[v][p - 1]`` is the port of that same edge at the neighbour.
    """

    __slots__ = ("n", "m", "ids", "nbr", "back", "_eidx", "_port_of", "_index_of")

    def __init__(self, ids: Sequence[int], nbr: Sequence[Sequence[int]],
                 back: Sequence[Sequence[int]], *, check: bool = True):
        self.n = len(ids)
        self.ids = tuple(int(i) for i in ids)
        self.nbr = tuple(tuple(int(w) for w in row) for row in nbr)
        self.back = tuple(tuple(int(q) for q in row) for row in back)
        if len(self.nbr) != self.n or len(self.back) != self.n:
            raise GraphError("ids, nbr and back must have one entry per node")
        self.m = sum(len(r) for r in self.nbr) // 2
        self._eidx = None
        self._port_of = None
        self._index_of = None
        if check:
            self.validate()

    # -- construction -----------------------------------------------------
    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]],
                   ids: Sequence[int] | None = None) -> "PortGraph":
        """Build a graph on nodes ``0..n-1``; ports follow insertion order."""
        if n < 1:
            raise GraphError("a graph needs at least one node")
        nbr: list[list[int]] = [[] for _ in range(n)]
        back: list[list[int]] = [[] for _ in range(n)]
        seen = set()
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) has an endpoint outside 0..{n - 1}")
            if u == v:
                raise GraphError(f"self-loop at node {u}")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise GraphError(f"parallel edge {key}")
            seen.add(key)
            nbr[u].append(v)
            nbr[v].append(u)
            back[u].append(len(nbr[v]))
            back[v].append(len(nbr[u]))
        if ids is None:
            ids = range(1, n + 1)
        return cls(list(ids), nbr, back)

    # -- invariants -------------------------------------------------------
    def validate(self) -> None:
        n = self.n
        if n < 1:
            raise GraphError("a graph needs at least one node")
        if len(set(self.ids)) != n:
            raise GraphError("node IDs are not distinct")
        for v in range(n):
            row, brow = self.nbr[v], self.back[v]
            if len(row) != len(brow):
                raise GraphError(f"node {v}: nbr/back length mismatch")
            if len(set(row)) != len(row):
                raise GraphError(f"node {v}: parallel edges")
            for i, (w, q) in enumerate(zip(row, brow)):
                if not 0 <= w < n:
                    raise GraphError(f"node {v} port {i + 1}: neighbour {w} out of range")
                if w == v:
                    raise GraphError(f"node {v}: self-loop")
                if not 1 <= q <= len(self.nbr[w]):
                    raise GraphError(f"node {v} port {i + 1}: far port {q} out of range")
                if self.nbr[w][q - 1] != v or self.back[w][q - 1] != i + 1:
                    raise GraphError(f"asymmetric edge between {v} and {w}")

    # -- queries ----------------------------------------------------------
    def degree(self, v: int) -> int:
        return len(self.nbr[v])

    def degrees(self) -> list[int]:
        return [len(r) for r in self.nbr]

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.nbr[v]

    def port(self, v: int, w: int) -> int:
        """Port of ``v`` leading to ``w``; raises ``KeyError`` if not adjacent."""
        if self._port_of is None:
            self._port_of = [{w: i + 1 for i, w in enumerate(r)} for r in self.nbr]
        return self._port_of[v][w]

    def has_edge(self, u: int, v: int) -> bool:
        try:
            self.port(u, v)
        except KeyError:
            return False
        return True

    def edge_ref(self, u: int, v: int) -> EdgeRef:
        pu = self.port(u, v)
        return EdgeRef(u, v, pu, self.back[u][pu - 1])

    def index_of(self, node_id: int) -> int:
        if self._index_of is None:
            self._index_of = {i: v for v, i in enumerate(self.ids)}
        return self._index_of[node_id]

    def edges(self) -> Iterator[tuple[int, int]]:
        """Each undirected edge once as ``(u, v)`` with ``u < v``, port order."""
        for u, row in enumerate(self.nbr):
            for w in row:
                if u < w:
                    yield (u, w)

    def edge_set(self) -> set[frozenset[int]]:
        return {frozenset(e) for e in self.edges()}

    def edge_index(self) -> tuple[tuple[int, ...], ...]:
        """``edge_index()[v][p - 1]`` numbers the edge behind port ``p`` of ``v``."""
        if self._eidx is None:
            rows = [[-1] * len(r) for r in self.nbr]
            k = 0
            for u, row in enumerate(self.nbr):
                for i, w in enumerate(row):
                    if u < w:
                        rows[u][i] = k
                        rows[w][self.back[u][i] - 1] = k
                        k += 1
            self._eidx = tuple(tuple(r) for r in rows)
        return self._eidx

    def edge_list(self) -> list[tuple[int, int]]:
        """Edges in :meth:`edge_index` order."""
        return list(self.edges())

    def adjacency_sets(self) -> list[set[int]]:
        return [set(r) for r in self.nbr]

    def max_degree(self) -> int:
        return max(self.degrees(), default=0)

    def min_degree(self) -> int:
        return min(self.degrees(), default=0)

    def relabeled(self, ids: Sequence[int]) -> "PortGraph":
        """Same structure and ports with a new ID map."""
        return PortGraph(ids, self.nbr, self.back)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PortGraph):
            return NotImplemented
        return self.ids == other.ids and self.nbr == other.nbr and self.back == other.back

    def __hash__(self) -> int:
        return hash((self.ids, self.nbr, self.back))

    def __repr__(self) -> str:
        return f"PortGraph(n={self.n}, m={self.m})"


# -- randomised constructions ----------------------------------------------

def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.SeedSequence):
        return np.random.default_rng(seed)
    return np.random.default_rng(np.random.SeedSequence(int(seed)))


def _sub_seeds(seed: int, k: int) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(seed).spawn(k)


def assign_ids(g: PortGraph, seed, universe: int | None = None) -> PortGraph:
    """Draw IDs uniformly: a random permutation of ``1..n``, or ``n`` distinct
    values from ``1..universe`` when a larger ID space is requested."""
    rng = _rng(seed)
    if universe is None or universe == g.n:
        ids = rng.permutation(g.n) + 1
    else:
        if universe < g.n:
            raise GraphError(f"ID universe {universe} smaller than n={g.n}")
        ids = rng.choice(universe, size=g.n, replace=False) + 1
    return g.relabeled([int(i) for i in ids])


def assign_ports(g: PortGraph, seed) -> PortGraph:
    """Independently permute the ports of every node uniformly at random."""
    rng = _rng(seed)
    # perm[v][old - 1] = new port of what used to be port ``old``
    perm = [(rng.permutation(len(row)) + 1).tolist() for row in g.nbr]
    nbr = [[0] * len(row) for row in g.nbr]
    back = [[0] * len(row) for row in g.nbr]
    for v, row in enumerate(g.nbr):
        for i, w in enumerate(row):
            new_p = perm[v][i]
            nbr[v][new_p - 1] = w
            back[v][new_p - 1] = perm[w][g.back[v][i] - 1]
    return PortGraph(g.ids, nbr, back)


def gen_gnp(n: int, p: float, seed: int) -> PortGraph:
    """Erdős–Rényi ``G(n, p)`` with uniformly random IDs (``1..n``) and ports.

    Structure, IDs and ports use independent sub-seeds of ``seed``.
    """
    if n < 1:
        raise GraphError("n must be at least 1")
    if not 0.0 < p <= 1.0:
        raise GraphError(f"p must lie in (0, 1], got {p}")
    s_struct, s_ids, s_ports = _sub_seeds(seed, 3)
    rng = np.random.default_rng(s_struct)
    edges = []
    for u in range(n - 1):
        hits = np.flatnonzero(rng.random(n - u - 1) < p) + (u + 1)
        edges.extend((u, int(w)) for w in hits)
    g = PortGraph.from_edges(n, edges)
    g = assign_ids(g, s_ids)
    return assign_ports(g, s_ports)


def cross_edges(g: PortGraph, e: EdgeRef, e2: EdgeRef) -> PortGraph:
    """Port-preserving crossing of ``e = {u, v}`` and ``e2 = {u', v'}``.

    Removes both edges and adds ``{u, u'}`` on ports ``(pu, pu')`` and
    ``{v, v'}`` on ports ``(pv, pv')``.  IDs and every other port stay put.
    """
    for ref in (e, e2):
        if not (0 <= ref.u < g.n and 0 <= ref.v < g.n):
            raise GraphError(f"{ref} refers to a node outside the graph")
        if (ref.pu > g.degree(ref.u) or ref.pu < 1
                or g.nbr[ref.u][ref.pu - 1] != ref.v
                or g.back[ref.u][ref.pu - 1] != ref.pv):
            raise GraphError(f"{ref} is not an edge of the graph with those ports")
    u, v, u2, v2 = e.u, e.v, e2.u, e2.v
    if len({u, v, u2, v2}) != 4:
        raise GraphError("crossed edges must have four distinct endpoints")
    if g.has_edge(u, u2) or g.has_edge(v, v2):
        raise GraphError("crossing would create a parallel edge")
    nbr = [list(r) for r in g.nbr]
    back = [list(r) for r in g.back]
    nbr[u][e.pu - 1], back[u][e.pu - 1] = u2, e2.pu
    nbr[u2][e2.pu - 1], back[u2][e2.pu - 1] = u, e.pu
    nbr[v][e.pv - 1], back[v][e.pv - 1] = v2, e2.pv
    nbr[v2][e2.pv - 1], back[v2][e2.pv - 1] = v, e.pv
    return PortGraph(g.ids, nbr, back)


# -- simple named graphs (tests and demos) ---------------------------------

def complete_graph(n: int) -> PortGraph:
    return PortGraph.from_edges(n, [(u, v) for u in range(n) for v in range(u + 1, n)])


def cycle_graph(n: int) -> PortGraph:
    if n < 3:
        raise GraphError("a cycle needs at least 3 nodes")
    return PortGraph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def path_graph(n: int) -> PortGraph:
    return PortGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def star_graph(leaves: int) -> PortGraph:
    """Centre is node 0."""
    return PortGraph.from_edges(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def empty_graph(n: int) -> PortGraph:
    return PortGraph.from_edges(n, [])


def random_regular(n: int, d: int, seed: int) -> PortGraph:
    """Uniform-ish random ``d``-regular graph via the configuration model with
    rejection; IDs ``1..n`` and random ports."""
    if (n * d) % 2 or d >= n:
        raise GraphError(f"no simple {d}-regular graph on {n} nodes")
    rng = _rng(seed)
    for _ in range(1000):
        stubs = rng.permutation(np.repeat(np.arange(n), d))
        pairs = stubs.reshape(-1, 2)
        if np.any(pairs[:, 0] == pairs[:, 1]):
            continue
        keys = {(min(a, b), max(a, b)) for a, b in pairs.tolist()}
        if len(keys) != len(pairs):
            continue
        g = PortGraph.from_edges(n, sorted(keys))
        return assign_ports(g, rng.integers(2**63))
    raise GraphError("configuration model kept producing multigraphs")


# -- text format ------------------------------------------------------------

def format_graph(g: PortGraph) -> str:
    out = io.StringIO()
    out.write(f"pg {g.n} {g.m}\n")
    for v in range(g.n):
        out.write(f"node {g.ids[v]} {g.degree(v)}\n")
    for u, row in enumerate(g.nbr):
        for i, w in enumerate(row):
            if u < w:
                out.write(f"edge {g.ids[u]} {i + 1} {g.ids[w]} {g.back[u][i]}\n")
    return out.getvalue()


def parse_graph(text: str) -> PortGraph:
    lines = text.splitlines()
    if not lines:
        raise GraphFormatError(1, "empty graph file")

    def ints(lineno, parts, k):
        if len(parts) != k:
            raise GraphFormatError(lineno, f"expected {k} fields, got {len(parts)}")
        try:
            return [int(x) for x in parts]
        except ValueError as exc:
            raise GraphFormatError(lineno, f"non-integer field: {exc}") from None

    head = lines[0].split()
    if not head or head[0] != "pg":
        raise GraphFormatError(1, "header must start with 'pg'")
    n, m = ints(1, head[1:], 2)
    if n < 1:
        raise GraphFormatError(1, "n must be at least 1")
    ids, degs = [], []
    lineno = 1
    body = [(i + 1, ln.split()) for i, ln in enumerate(lines) if i > 0 and ln.strip()]
    node_lines = [b for b in body if b[1][0] == "node"]
    edge_lines = [b for b in body if b[1][0] == "edge"]
    for lineno, parts in body:
        if parts[0] not in ("node", "edge"):
            raise GraphFormatError(lineno, f"unknown record '{parts[0]}'")
    if len(node_lines) != n:
        raise GraphFormatError(lineno, f"header says {n} nodes, found {len(node_lines)}")
    if len(edge_lines) != m:
        raise GraphFormatError(lineno, f"header says {m} edges, found {len(edge_lines)}")
    index = {}
    for lineno, parts in node_lines:
        node_id, deg = ints(lineno, parts[1:], 2)
        if node_id in index:
            raise GraphFormatError(lineno, f"duplicate node ID {node_id}")
        if deg < 0:
            raise GraphFormatError(lineno, "negative degree")
        index[node_id] = len(ids)
        ids.append(node_id)
        degs.append(deg)
    nbr = [[-1] * d for d in degs]
    back = [[-1] * d for d in degs]
    for lineno, parts in edge_lines:
        a, pa, b, pb = ints(lineno, parts[1:], 4)
        if a not in index or b not in index:
            raise GraphFormatError(lineno, "edge refers to an unknown node ID")
        u, v = index[a], index[b]
        if u == v:
            raise GraphFormatError(lineno, "self-loop")
        if not (1 <= pa <= degs[u] and 1 <= pb <= degs[v]):
            raise GraphFormatError(lineno, "port outside 1..deg")
        if nbr[u][pa - 1] != -1 or nbr[v][pb - 1] != -1:
            raise GraphFormatError(lineno, "port used twice")
        nbr[u][pa - 1], back[u][pa - 1] = v, pb
        nbr[v][pb - 1], back[v][pb - 1] = u, pa
    for v in range(n):
        if -1 in nbr[v]:
            raise GraphFormatError(len(lines), f"node {ids[v]} has unused ports")
    try:
        return PortGraph(ids, nbr, back)
    except GraphError as exc:
        raise GraphFormatError(len(lines), str(exc)) from None


def write_graph(g: PortGraph, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(format_graph(g))


def read_graph(path: str | os.PathLike) -> PortGraph:
    with open(path, encoding="ascii") as fh:
        return parse_graph(fh.read())


def log2_ceil(n: int) -> int:
    return max(1, math.ceil(math.log2(n))) if n > 1 else 1
