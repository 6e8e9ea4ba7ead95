"""Ball growing with exact local solves, coordinated over a spanning tree.

Each iteration the smallest active ID becomes the initiator ``v``.  It grows
a BFS ball one layer per wave, collecting the adjacency of every joined node
over the ball tree, and stops at the first radius ``r`` whose growth ratio is
within ``1 + eps``.  It then solves the ball exactly, sends the chosen
vertices their verdicts along the ball tree and retires a region around
``v``.  The per-problem rules (``f`` is the exact local value):

========  =============================================  ===============
problem   stop at first r with                           retire
========  =============================================  ===============
MaxIS     alpha(B[r+1]) <= (1+eps) alpha(B[r])           B[r+1]
MaxM      nu(B[r+1])    <= (1+eps) nu(B[r])              B[r]
MVC       tau(E(r+1))   <= (1+eps) tau(E(r))             B[r+1]
MDS       gamma(r+2)    <= (1+eps) gamma(r)              targets in B[r+2]
========  =============================================  ===============

Balls for MaxIS, MaxM and MVC live in the remaining graph; ``E(r)`` is the
set of remaining edges with an endpoint in ``B[r]``.  For MDS the ball lives
in the whole graph, "active" means "not yet dominated", and ``gamma(r)`` is
the fewest vertices dominating the active part of ``B[r]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

from ..codec import pack, unpack
from ..graph import PortGraph
from ..oracles import OracleRefusal, exact_maxis, exact_maxm, exact_mvc, min_dominating
from ..sim import Message, NodeContext
from .base import QueuedProgram
from .tree import BFS, CHILD, TDONE, TreeBuilder

(HELLO, FIND, MINACT, START, IDONE, TERM,
 GROW, PROBE, YES, NO, NODE, EDGE, GDONE, SEL, MATE, CLOSE, CLOSED, DEAD) = range(1, 19)

BALL_PROBLEMS = ("MaxIS", "MDS", "MVC", "MaxM")


@dataclass(frozen=True)
class BallGrowConfig:
    problem: str
    eps: Fraction = Fraction(1, 2)
    radius_cap: int | None = None
    local_limit: int = 64          # largest ball the local exact solver accepts

    def __post_init__(self):
        if self.problem not in BALL_PROBLEMS:
            raise ValueError(f"unknown problem {self.problem!r}")
        eps = Fraction(self.eps)
        object.__setattr__(self, "eps", eps)
        if not 0 < eps < 1:
            raise ValueError("eps must lie in (0, 1)")
        if self.radius_cap is not None and self.radius_cap < 1:
            raise ValueError("radius cap must be at least 1")

    @property
    def offset(self) -> int:
        """Depth beyond r that must be known to test radius r."""
        return 2 if self.problem == "MDS" else 1

    def default_cap(self, n: int) -> int:
        base = max(1, math.ceil(math.log(max(n, 2)) / math.log(1 + float(self.eps))))
        return 2 * base if self.problem == "MDS" else base

    def cap(self, n: int) -> int:
        return self.radius_cap if self.radius_cap is not None else self.default_cap(n)


class BallOutput(NamedTuple):
    value: object            # membership flag, or mate port for MaxM
    radii: tuple[int, ...]   # radii chosen while this node was initiator
    failed: bool             # some ball hit the radius cap


class _Ball:
    """The initiator's picture of its ball and the exact local values."""

    def __init__(self, cfg: BallGrowConfig):
        self.cfg = cfg
        self.layer: dict[int, int] = {}
        self.nbrs: dict[int, tuple[int, ...]] = {}
        self.active: dict[int, bool] = {}
        self._cache: dict = {}

    def add(self, nid: int, active: bool, layer: int) -> None:
        self.layer[nid] = layer
        self.active[nid] = active
        self.nbrs.setdefault(nid, ())

    def add_edge(self, nid: int, w: int) -> None:
        self.nbrs[nid] = self.nbrs.get(nid, ()) + (w,)

    def within(self, r: int) -> list[int]:
        return sorted(x for x, d in self.layer.items() if d <= r)

    def _graph(self, nodes, edges) -> PortGraph:
        ids = tuple(sorted(nodes))
        if len(ids) > self.cfg.local_limit:
            raise OracleRefusal(f"ball of {len(ids)} vertices exceeds the local limit")
        at = {x: i for i, x in enumerate(ids)}
        return PortGraph.from_edges(len(ids), sorted((at[a], at[b]) for a, b in edges),
                                    ids=ids)

    def _induced(self, r: int):
        nodes = set(self.within(r))
        edges = {(min(a, b), max(a, b)) for a in nodes for b in self.nbrs[a] if b in nodes}
        return nodes, edges

    def _incident(self, r: int):
        edges = {(min(a, b), max(a, b)) for a in self.within(r) for b in self.nbrs[a]}
        return {x for e in edges for x in e}, edges

    def solve(self, r: int):
        """(value, witness IDs) of the local problem at radius ``r``."""
        key = (r, len(self.layer))
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        p = self.cfg.problem
        if p == "MaxIS":
            nodes, edges = self._induced(r)
            g = self._graph(nodes, edges)
            sol = exact_maxis(g, self.cfg.local_limit)
            res = sol.size, [g.ids[v] for v in sorted(sol.witness)]
        elif p == "MaxM":
            nodes, edges = self._induced(r)
            g = self._graph(nodes, edges)
            sol = exact_maxm(g)
            pairs = sorted(tuple(sorted(g.ids[v] for v in e)) for e in sol.witness)
            res = sol.size, pairs
        elif p == "MVC":
            nodes, edges = self._incident(r)
            if not edges:
                res = 0, []
            else:
                g = self._graph(nodes, edges)
                sol = exact_mvc(g, self.cfg.local_limit)
                res = sol.size, [g.ids[v] for v in sorted(sol.witness)]
        else:
            res = self._dominate(r)
        self._cache[key] = res
        return res

    def _dominate(self, r: int):
        targets = [x for x in self.within(r) if self.active[x]]
        if not targets:
            return 0, []
        edges = {(min(a, b), max(a, b)) for a in targets for b in self.nbrs[a]}
        ids = sorted(set(targets) | {x for e in edges for x in e})
        if len(ids) > self.cfg.local_limit:
            raise OracleRefusal(f"ball of {len(ids)} vertices exceeds the local limit")
        at = {x: i for i, x in enumerate(ids)}
        closed = [1 << i for i in range(len(ids))]
        for a, b in edges:
            closed[at[a]] |= 1 << at[b]
            closed[at[b]] |= 1 << at[a]
        tmask = sum(1 << at[t] for t in targets)
        cmask = 0
        for t in targets:
            cmask |= closed[at[t]]
        size, chosen = min_dominating(closed, tmask, cmask, list(range(len(ids))))
        return size, [ids[i] for i in chosen]

    def holds(self, r: int) -> bool:
        """Growth condition for radius ``r`` (needs depth ``r + offset``)."""
        grown = self.solve(r + self.cfg.offset)[0]
        return grown <= (1 + self.cfg.eps) * self.solve(r)[0]

    def via(self, target: int) -> int:
        """A ball node through which ``target`` can be reached."""
        if target in self.layer:
            return target
        return min(x for x in self.layer if target in self.nbrs[x])


class BallGrowProgram(QueuedProgram):
    def __init__(self, cfg: BallGrowConfig):
        self.cfg = cfg

    def init(self, ctx: NodeContext) -> None:
        self.ctx = ctx
        self.tree = TreeBuilder(ctx)
        self.reset_queues()
        self.remaining_mode = self.cfg.problem != "MDS"
        self.nbr_id: dict[int, int] = {}
        self.port_of: dict[int, int] = {}
        self.nbr_active = {p: True for p in range(1, ctx.degree + 1)}
        self.active = True
        self.member = False
        self.mate: int | None = None
        self.radii: list[int] = []
        self.failed = False
        self.terminating = False
        self.find_wait: set[int] = set()
        self.find_best = (0, None)   # (ID, child port)
        self._reset_ball()

    def _reset_ball(self) -> None:
        self.in_ball = False
        self.layer = -1
        self.bparent: int | None = None
        self.bchildren: list[int] = []
        self.route: dict[int, int] = {}
        self.wait_done: set[int] = set()
        self.wait_reply: set[int] = set()
        self.wait_closed: set[int] = set()
        self.growing = False
        self.ball: _Ball | None = None   # initiator only

    # -- helpers ---------------------------------------------------------
    def _eligible_ports(self) -> list[int]:
        ports = range(1, self.ctx.degree + 1)
        if self.remaining_mode:
            return [p for p in ports if self.nbr_active[p]]
        return list(ports)

    def _records(self) -> list[bytes]:
        me = self.ctx.id
        recs = [pack(NODE, me, int(self.active), self.layer)]
        recs += [pack(EDGE, me, self.nbr_id[p]) for p in self._eligible_ports()]
        return recs

    def _send_up(self, payload: bytes) -> None:
        self.send(self.bparent, payload)

    # -- global loop -----------------------------------------------------
    def _start_find(self) -> None:
        self.find_best = (self.ctx.id if self.active else 0, None)
        self.find_wait = set(self.tree.children)
        for p in self.tree.children:
            self.send(p, pack(FIND))
        self._find_check()

    def _find_check(self) -> None:
        if self.find_wait:
            return
        best, _ = self.find_best
        if self.tree.parent is not None:
            self.send(self.tree.parent, pack(MINACT, best))
        elif best == 0:
            self._terminate()
        else:
            self._route_start(best)

    def _route_start(self, vid: int) -> None:
        if vid == self.ctx.id:
            self._begin_iteration()
        else:
            self.send(self.find_best[1], pack(START, vid))

    def _terminate(self) -> None:
        for p in self.tree.children:
            self.send(p, pack(TERM))
        self.terminating = True

    def _iteration_done(self) -> None:
        self._reset_ball()
        if self.tree.parent is None:
            self._start_find()
        else:
            self.send(self.tree.parent, pack(IDONE))

    # -- initiator -------------------------------------------------------
    def _begin_iteration(self) -> None:
        self.in_ball = True
        self.layer = 0
        self.ball = _Ball(self.cfg)
        self.ball.add(self.ctx.id, self.active, 0)
        for p in self._eligible_ports():
            self.ball.add_edge(self.ctx.id, self.nbr_id[p])
        self.depth = 0
        self.stable = False
        self._advance()

    def _advance(self) -> None:
        """Grow or decide, after the ball is known to depth ``self.depth``."""
        cfg, ball = self.cfg, self.ball
        cap = cfg.cap(self.ctx.n)
        while True:
            r = self.depth - cfg.offset
            if r >= 0 and (ball.holds(r) or r >= cap):
                if not ball.holds(r):
                    self.failed = True
                self._decide(r)
                return
            if self.stable:
                self.depth += 1      # nothing new can join: extend locally
                continue
            self._grow_wave()
            return

    def _grow_wave(self) -> None:
        self.growing = True
        self.before = len(self.ball.layer)
        self._on_grow(self.depth)

    def _wave_finished(self) -> None:
        self.growing = False
        self.depth += 1
        if len(self.ball.layer) == self.before:
            self.stable = True
        self._advance()

    def _decide(self, r: int) -> None:
        cfg, ball = self.cfg, self.ball
        self.radii.append(r)
        p = cfg.problem
        if p == "MaxIS":
            chosen, retire = ball.solve(r)[1], r + 1
        elif p == "MaxM":
            chosen, retire = ball.solve(r)[1], r
        elif p == "MVC":
            chosen, retire = ball.solve(r + 1)[1], r + 1
        else:
            chosen, retire = ball.solve(r + 2)[1], r + 2
        if p == "MaxM":
            for a, b in chosen:
                self._on_routed(MATE, (a, b))
                self._on_routed(MATE, (b, a))
        else:
            for t in chosen:
                self._on_routed(SEL, (t, ball.via(t)))
        self._on_close(retire)

    # -- ball waves ------------------------------------------------------
    def _on_grow(self, d: int) -> None:
        if self.layer < d:
            self.wait_done = set(self.bchildren)
            for p in self.bchildren:
                self.send(p, pack(GROW, d))
        else:
            ports = [q for q in self._eligible_ports() if q != self.bparent]
            self.wait_reply = set(ports)
            for q in ports:
                self.send(q, pack(PROBE, d))
        self._grow_check()

    def _grow_check(self) -> None:
        if self.wait_done or self.wait_reply:
            return
        if self.bparent is None:
            if self.growing:
                self._wave_finished()
        else:
            self._send_up(pack(GDONE))

    def _on_routed(self, tag: int, vals) -> None:
        me = self.ctx.id
        target, other = vals
        if tag == MATE:
            if target == me:
                self.mate = self.port_of[other]
            else:
                self.send(self.route[target], pack(MATE, target, other))
            return
        if target == me:
            self.member = True
        elif other == me:
            self.send(self.port_of[target], pack(SEL, target, other))
        else:
            self.send(self.route[other], pack(SEL, target, other))

    def _on_close(self, retire: int) -> None:
        if self.layer <= retire:
            self.active = False
            if self.remaining_mode:
                for p in self._eligible_ports():
                    self.send(p, pack(DEAD))
        self.wait_closed = set(self.bchildren)
        for p in self.bchildren:
            self.send(p, pack(CLOSE, retire))
        self._close_check()

    def _close_check(self) -> None:
        if self.wait_closed:
            return
        if self.bparent is None:
            self._iteration_done()
        else:
            self._send_up(pack(CLOSED))
            self._reset_ball()

    # -- main step -------------------------------------------------------
    def step(self, rnd: int, inbox: list[Message]) -> list[tuple[int, bytes]]:
        tree = self.tree
        if rnd == 1:
            for p in range(1, self.ctx.degree + 1):
                self.send(p, pack(HELLO))
        was_reached = tree.reached
        probes: list[tuple[int, int]] = []
        tree_out: list[tuple[int, bytes]] = []
        for port, payload, sender in inbox:
            tag, vals = unpack(payload)
            if tag == HELLO:
                self.nbr_id[port] = sender
                self.port_of[sender] = port
            elif tag in (BFS, CHILD, TDONE):
                tree.handle(port, tag, vals, sender)
            elif tag == FIND:
                self._start_find()
            elif tag == MINACT:
                self.find_wait.discard(port)
                if vals[0] and (self.find_best[0] == 0 or vals[0] < self.find_best[0]):
                    self.find_best = (vals[0], port)
                self._find_check()
            elif tag == START:
                self._route_start(vals[0])
            elif tag == IDONE:
                if tree.parent is None:
                    self._start_find()
                else:
                    self.send(tree.parent, payload)
            elif tag == TERM:
                self._terminate()
            elif tag == DEAD:
                self.nbr_active[port] = False
            elif tag == GROW:
                self._on_grow(vals[0])
            elif tag == PROBE:
                probes.append((port, vals[0]))
            elif tag in (YES, NO):
                self.wait_reply.discard(port)
                if tag == YES:
                    self.bchildren.append(port)
                    self.wait_done.add(port)
                self._grow_check()
            elif tag in (NODE, EDGE):
                if tag == NODE:
                    self.route[vals[0]] = port
                if self.ball is None:
                    self._send_up(payload)
                elif tag == NODE:
                    self.ball.add(vals[0], bool(vals[1]), vals[2])
                else:
                    self.ball.add_edge(vals[0], vals[1])
            elif tag == GDONE:
                self.wait_done.discard(port)
                self._grow_check()
            elif tag in (SEL, MATE):
                self._on_routed(tag, vals)
            elif tag == CLOSE:
                self._on_close(vals[0])
            elif tag == CLOSED:
                self.wait_closed.discard(port)
                self._close_check()
        if probes:
            self._on_probes(probes)
        if not was_reached:
            if tree.reached:
                tree_out += tree.after_inbox(True)
            elif rnd >= tree.start_round():
                tree_out += tree.maybe_start(rnd)
        if tree.ready_to_report():
            tree_out += tree.report()
            if tree.parent is None:
                tree.children.sort()
                self._start_find()
        for p, payload in tree_out:
            self.send(p, payload)
        out = self.flush()
        busy = self.busy()
        if self.terminating and not busy:
            self.halted = True
        elif busy:
            self.wake = rnd + 1
        else:
            self.wake = None if tree.reached else tree.start_round()
        return out

    def _on_probes(self, probes: list[tuple[int, int]]) -> None:
        joinable = not self.in_ball and (self.active or not self.remaining_mode)
        if not joinable:
            for port, _ in probes:
                self.send(port, pack(NO))
            return
        parent, d = probes[0]
        self.in_ball = True
        self.layer = d + 1
        self.bparent = parent
        self.send(parent, pack(YES))
        for port, _ in probes[1:]:
            self.send(port, pack(NO))
        for rec in self._records():
            self.send(parent, rec)
        self.send(parent, pack(GDONE))

    def output(self) -> BallOutput:
        value = self.mate if self.cfg.problem == "MaxM" else self.member
        return BallOutput(value, tuple(self.radii), self.failed)


def ball_program(cfg: BallGrowConfig):
    return lambda: BallGrowProgram(cfg)
