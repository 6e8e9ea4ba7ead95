"""Message-frugal matching programs.

* :class:`ProposeProgram`: every node proposes one random incident edge with
  probability ``alpha``; a node accepts a proposal when it is the only
  proposed edge at that node.  Three rounds, at most ``2n`` messages (``3n``
  with the optional degree exchange).
* :class:`RotationProgram`: grows a Hamiltonian path by a random walk with
  rotations and then matches consecutive path nodes.

Both output the port of the matched edge, or ``None``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from ..codec import pack, unpack
from ..graph import PortGraph
from ..oracles import Solution
from ..sim import Message, NodeContext, NodeProgram

PROPOSE, ACCEPT, DEGREE = 1, 2, 3


@dataclass(frozen=True)
class ProposeConfig:
    alpha: float | None = None
    r: float = 1.0                 # max degree / min degree, if alpha is not given
    degree_exchange: bool = False  # estimate r locally from one random neighbour

    def resolved_alpha(self) -> float:
        a = self.alpha if self.alpha is not None else 1.0 / (2.0 * self.r)
        if not 0.0 <= a <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {a}")
        return a


class ProposeProgram(NodeProgram):
    def __init__(self, cfg: ProposeConfig):
        self.cfg = cfg

    def init(self, ctx: NodeContext) -> None:
        self.ctx = ctx
        self.mate_port = None
        self.proposed = None
        self.halted = ctx.degree == 0
        self.offset = 1 if self.cfg.degree_exchange else 0
        self.alpha = self.cfg.resolved_alpha()

    def step(self, rnd: int, inbox: list[Message]) -> list[tuple[int, bytes]]:
        ctx, rng = self.ctx, self.ctx.rng
        phase = rnd - self.offset
        if phase <= 0:
            # degree exchange: tell one random neighbour our degree
            self.wake = rnd + 1
            return [(rng.randint(1, ctx.degree), pack(DEGREE, ctx.degree))]
        if phase == 1:
            if self.offset:
                seen = [unpack(m.payload)[1][0] for m in inbox] + [ctx.degree]
                if self.cfg.alpha is None:
                    self.alpha = 1.0 / (2.0 * max(seen) / min(seen))
            self.wake = rnd + 1
            if rng.random() < self.alpha:
                self.proposed = rng.randint(1, ctx.degree)
                return [(self.proposed, pack(PROPOSE))]
            return []
        if phase == 2:
            received = {m.port for m in inbox if unpack(m.payload)[0] == PROPOSE}
            edges = set(received)
            if self.proposed is not None:
                edges.add(self.proposed)
            if len(edges) == 1 and received:
                (port,) = edges
                self.mate_port = port
                if self.proposed is None:
                    self.halted = True
                else:
                    self.wake = rnd + 1     # mutual proposal: the ACCEPT still arrives
                return [(port, pack(ACCEPT))]
            if self.proposed is None:
                self.halted = True
            else:
                self.wake = rnd + 1
            return []
        for m in inbox:
            if unpack(m.payload)[0] == ACCEPT and m.port == self.proposed:
                self.mate_port = m.port
        self.halted = True
        return []

    def output(self):
        return self.mate_port


def propose_program(cfg: ProposeConfig):
    return lambda: ProposeProgram(cfg)


def matching_from_ports(g: PortGraph, outputs) -> tuple[Solution, list[str]]:
    """Matching from per-node port outputs; also lists inconsistencies."""
    issues = []
    edges = set()
    for v, port in enumerate(outputs):
        if port is None:
            continue
        if not 1 <= port <= g.degree(v):
            issues.append(f"node {g.ids[v]} names port {port}")
            continue
        w = g.nbr[v][port - 1]
        back = outputs[w]
        if back is None or back < 1 or back > g.degree(w) or g.nbr[w][back - 1] != v:
            issues.append(f"node {g.ids[v]} claims {g.ids[w]}, which does not agree")
            continue
        edges.add(frozenset((v, w)))
    sol = Solution("MaxM", frozenset(edges), len(edges))
    issues += sol.check(g)
    return sol, issues


# -- rotation walk ------------------------------------------------------------

STEP, JOINED, ROT, REV, DONE, CLOSE = 10, 11, 12, 13, 14, 15


@dataclass(frozen=True)
class RotationConfig:
    n: int
    budget_const: float = 4.0      # walk steps allowed: budget_const * n * ln n

    @property
    def budget(self) -> int:
        return max(8, math.ceil(self.budget_const * self.n * math.log(max(self.n, 2))))

    def deadline(self) -> int:
        # each step takes at most 2 rounds plus a reversal of at most n hops
        return 4 + self.budget * (self.n + 3) + 2 * self.n

    def round_cap(self) -> int:
        return self.deadline() + 2


class RotationProgram(NodeProgram):
    """Path nodes store their position and the ports to their predecessor and
    successor; the head holds the walk token.

    Messages: ``STEP(k, steps)`` head -> random neighbour; ``JOINED(steps)``
    from a newly added node; ``ROT(j)`` from an interior node ``v_j`` back to
    the head; ``REV(j, k, steps)`` walks the reversed segment and hands the
    token to the new head; ``DONE`` travels back along the finished path.
    """

    def __init__(self, cfg: RotationConfig):
        self.cfg = cfg

    def init(self, ctx: NodeContext) -> None:
        self.ctx = ctx
        self.pos = None          # position on the path (0-based)
        self.pred = None         # port to predecessor
        self.succ = None         # port to successor
        self.head = False
        self.steps = 0
        self.k = 0
        self.waiting = None      # port of the outstanding STEP
        self.mate_port = None
        self.failed = False
        self.done = False
        self.halted = False
        self.n = ctx.n
        if ctx.n == 1:
            self.halted = True
            self.done = True
            return
        self.wake = self.cfg.deadline()
        if ctx.id == 1:
            self.pos, self.head, self.k = 0, True, 0
            self.wake = 1

    def _finish(self) -> list[tuple[int, bytes]]:
        # called at the last node of a Hamiltonian path
        self.done = True
        self.halted = True
        self.mate_port = self.pred if self.pos % 2 else None
        return [(self.pred, pack(DONE))] if self.pred is not None else []

    def _advance(self, rnd: int) -> list[tuple[int, bytes]]:
        """Head: spend walk steps until a message goes out or the budget ends."""
        ctx, rng = self.ctx, self.ctx.rng
        while self.steps < self.cfg.budget:
            self.steps += 1
            port = rng.randint(1, ctx.degree)
            if port == self.pred:
                continue          # stepping back to the predecessor changes nothing
            self.waiting = port
            self.wake = self.cfg.deadline()
            return [(port, pack(STEP, self.k, self.steps))]
        self.failed = True
        self.wake = self.cfg.deadline()
        return []

    def step(self, rnd: int, inbox: list[Message]) -> list[tuple[int, bytes]]:
        if rnd >= self.cfg.deadline() and not inbox:
            self.failed = not self.done
            self.halted = True
            return []
        out: list[tuple[int, bytes]] = []
        if rnd == 1 and self.head and not inbox:
            return self._advance(rnd)
        for port, payload, _sender in inbox:
            tag, vals = unpack(payload)
            if tag == STEP:
                k, steps = vals
                if self.pos is None:
                    # join the path as the new head
                    self.pos, self.pred, self.head = k + 1, port, True
                    self.k, self.steps = k + 1, steps
                    if self.k == self.n - 1:
                        return self._finish()
                    self.wake = rnd + 1
                    out.append((port, pack(JOINED)))
                    self.pending_advance = True
                else:
                    # rotation around this node: v_j links to v_k, v_{j+1} becomes head
                    j = self.pos
                    self.succ = port
                    out.append((port, pack(ROT, j)))
            elif tag == JOINED:
                self.succ, self.head, self.waiting = port, False, None
                self.wake = self.cfg.deadline()
            elif tag == ROT:
                (j,) = vals
                # I am v_k: new position j+1, predecessor is v_j
                k = self.k
                old_pred = self.pred
                self.pred, self.succ = port, old_pred
                self.head, self.waiting = False, None
                self.pos = j + 1
                if self.pos == k:
                    self.head = True
                    self.succ = None
                    out += self._advance(rnd)
                else:
                    out.append((old_pred, pack(REV, j, k, self.steps)))
                    self.wake = self.cfg.deadline()
            elif tag == REV:
                j, k, steps = vals
                old_pred, old_succ = self.pred, self.succ
                self.pos = j + 1 + k - self.pos
                self.pred = old_succ
                if self.pos == k:
                    # old v_{j+1}: its link to v_j was cut; it is the new head
                    self.succ = None
                    self.head, self.k, self.steps = True, k, steps
                    out += self._advance(rnd)
                else:
                    self.succ = old_pred
                    out.append((old_pred, pack(REV, j, k, steps)))
            elif tag == DONE:
                self.done = True
                self.halted = True
                if self.pos % 2 == 0:
                    self.mate_port = port      # my successor
                else:
                    self.mate_port = self.pred
                if self.pred is not None:
                    out.append((self.pred, pack(DONE)))
        if getattr(self, "pending_advance", False) and not out:
            self.pending_advance = False
            out += self._advance(rnd)
        return out

    def output(self):
        return self.mate_port
