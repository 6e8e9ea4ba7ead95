"""Gather-everything baseline: every node learns the whole topology.

After a BFS spanning forest is built, each node streams the edges it owns
(those to higher-ID neighbours) over the tree and forwards every edge record
it receives to its other tree neighbours.  Each record crosses every tree
edge once, so the run costs about ``n * m`` messages.  Every node then
solves its component with the exact oracle; the oracle is deterministic, so
all nodes agree without further communication.
"""
from __future__ import annotations

from functools import lru_cache

from ..codec import pack, unpack
from ..graph import PortGraph
from ..oracles import solve
from ..sim import Message, NodeContext
from .base import QueuedProgram
from .tree import BFS, CHILD, TDONE, TreeBuilder

START, REC = 1, 2


@lru_cache(maxsize=64)
def _solve_component(problem: str, edges: frozenset, ids: tuple[int, ...]):
    index = {x: i for i, x in enumerate(ids)}
    g = PortGraph.from_edges(len(ids), sorted((index[a], index[b]) for a, b in edges), ids=ids)
    sol = solve(g, problem)
    if problem == "MaxM":
        mate = {}
        for e in sol.witness:
            a, b = (ids[v] for v in e)
            mate[a], mate[b] = b, a
        return mate
    return frozenset(ids[v] for v in sol.witness)


class GatherProgram(QueuedProgram):
    def __init__(self, problem: str | None = None):
        self.problem = problem

    def init(self, ctx: NodeContext) -> None:
        self.ctx = ctx
        self.tree = TreeBuilder(ctx)
        self.wake = self.tree.start_round()
        self.total = None
        self.known: set[tuple[int, int]] = set()
        self.reset_queues()
        self.streaming = False
        self.result = None
        self.halted = False

    def _tree_ports(self) -> list[int]:
        t = self.tree
        ports = list(t.children)
        if t.parent is not None:
            ports.append(t.parent)
        return sorted(ports)

    def _own_records(self) -> list[tuple[int, int]]:
        me = self.ctx.id
        return sorted((me, w) for w in self.tree.nbr_id.values() if w > me)

    def _begin_stream(self, m: int) -> None:
        self.total = m
        self.streaming = True
        for p in self.tree.children:
            self.send(p, pack(START, m))
        ports = self._tree_ports()
        for rec in self._own_records():
            self.known.add(rec)
            for p in ports:
                self.send(p, pack(REC, *rec))

    def step(self, rnd: int, inbox: list[Message]) -> list[tuple[int, bytes]]:
        tree = self.tree
        out: list[tuple[int, bytes]] = []   # tree messages, queued below
        was_reached = tree.reached
        for port, payload, sender in inbox:
            tag, vals = unpack(payload)
            if tag in (BFS, CHILD, TDONE):
                tree.handle(port, tag, vals, sender)
            elif tag == START:
                self._begin_stream(vals[0])
            elif tag == REC:
                rec = (vals[0], vals[1])
                if rec not in self.known:
                    self.known.add(rec)
                    for p in self._tree_ports():
                        if p != port:
                            self.send(p, payload)
        if not was_reached:
            if tree.reached:
                out += tree.after_inbox(True)
            elif rnd >= tree.start_round():
                out += tree.maybe_start(rnd)
        if tree.reached and not tree.reported and len(tree.heard) == self.ctx.degree:
            tree.count = len(self._own_records())
            if tree.ready_to_report():
                out += tree.report()
                if tree.parent is None:
                    self._begin_stream(tree.subtree_total)
        for p, payload in out:
            self.send(p, payload)
        out = self.flush()
        busy = self.busy()
        if self.total is not None and len(self.known) == self.total and not busy:
            self._finish()
            self.halted = True
        else:
            self.wake = rnd + 1 if busy else (None if tree.reached else tree.start_round())
        return out

    def _finish(self) -> None:
        me = self.ctx.id
        edges = frozenset(self.known)
        if self.problem is None:
            self.result = tuple(sorted(edges))
            return
        ids = sorted({me} | {x for e in edges for x in e})
        sol = _solve_component(self.problem, edges, tuple(ids))
        if self.problem == "MaxM":
            mate = sol.get(me)
            self.result = None
            if mate is not None:
                for port, nid in self.tree.nbr_id.items():
                    if nid == mate:
                        self.result = port
        else:
            self.result = me in sol

    def output(self):
        return self.result


def gather_program(problem: str | None = None):
    return lambda: GatherProgram(problem)
