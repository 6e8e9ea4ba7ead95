"""Phased randomized greedy MIS for dense random graphs.

Undecided nodes wake up in a sequence of short iterations.  In each
iteration a node is *active* with a probability that doubles from phase to
phase; the active nodes run a greedy MIS among themselves, ordered by fresh
random keys, and the winners then tell every neighbour that they are in.
Because only active nodes (and winners) talk, the message count stays near
linear on ``G(n, p)``.

Every node reports the key it was last active with, so that a run can be
replayed by the sequential greedy algorithm (see :func:`sequential_replay`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from ..codec import pack, unpack
from ..graph import PortGraph
from ..sim import Message, NodeContext, NodeProgram, SimResult

ANN, JOIN, OUT, FIN = 1, 2, 3, 4
UNDECIDED, ACTIVE, IN, DOMINATED = range(4)


@dataclass(frozen=True)
class MisPhaseConfig:
    n: int
    p: float
    q_const: float = 100.0
    iterations_per_phase: int = 15
    t_mis_const: int = 40

    @property
    def q(self) -> float:
        return min(1.0, self.q_const * math.log(self.n) / (self.p * self.n)) if self.n > 1 else 1.0

    @property
    def sampling_phases(self) -> int:
        """Phases before the final one; the final phase activates everyone."""
        return max(0, math.ceil(math.log2(1.0 / self.q) - 1e-12))

    @property
    def phase_count(self) -> int:
        return self.sampling_phases + 1

    @property
    def t_mis(self) -> int:
        return self.t_mis_const * max(1, math.ceil(math.log(self.n))) if self.n > 1 else 1

    @property
    def iteration_length(self) -> int:
        return self.t_mis + 2

    @property
    def iterations(self) -> int:
        return self.sampling_phases * self.iterations_per_phase + 1

    def phase_of(self, it: int) -> int:
        """1-based phase of the 0-based iteration ``it``."""
        return min(it // self.iterations_per_phase, self.sampling_phases) + 1

    def activation_prob(self, it: int) -> float:
        ph = self.phase_of(it)
        if ph > self.sampling_phases:
            return 1.0
        return min(1.0, 2 ** (ph - 1) * self.q)

    def start(self, it: int) -> int:
        return 1 + it * self.iteration_length

    def round_cap(self) -> int:
        return self.start(self.iterations) + 2


class MisOutput(NamedTuple):
    in_mis: bool
    key: tuple | None       # (phase, iteration, inner id, id) of the last activation
    failed: bool            # some activation did not converge in time


class GreedyMisProgram(NodeProgram):
    def __init__(self, cfg: MisPhaseConfig):
        self.cfg = cfg

    def init(self, ctx: NodeContext) -> None:
        self.ctx = ctx
        self.status = UNDECIDED
        self.key = None
        self.failed = False
        self.it = -1
        self.halted = False
        self._schedule(0)

    def _schedule(self, first: int) -> None:
        """Pick the next iteration (>= ``first``) in which to be active."""
        cfg, rng = self.cfg, self.ctx.rng
        it = first
        while it < cfg.iterations - 1 and rng.random() >= cfg.activation_prob(it):
            it += 1
        if it >= cfg.iterations:
            self.it = -1
            self.wake = None
            return
        self.it = it
        self.wake = cfg.start(it)

    def step(self, rnd: int, inbox: list[Message]) -> list[tuple[int, bytes]]:
        cfg, ctx = self.cfg, self.ctx
        start = cfg.start(self.it) if self.it >= 0 else -1
        fin = joined = False
        anns = []
        outs = []
        for port, payload, sender in inbox:
            tag, vals = unpack(payload)
            if tag == FIN:
                fin = True
            elif tag == ANN:
                anns.append(((vals[0], sender), port))
            elif tag == JOIN:
                joined = True
            elif tag == OUT:
                outs.append(port)

        if fin and self.status == UNDECIDED:
            self.status = DOMINATED
            self.halted = True
            return []

        if self.status == UNDECIDED:
            if rnd != start:
                # woken by announcements of active neighbours; keep sleeping
                self.wake = start if start > rnd else None
                return []
            self.status = ACTIVE
            inner = ctx.rng.randint(1, max(2, ctx.n) ** 3)
            self.my_key = (inner, ctx.id)
            self.key = (cfg.phase_of(self.it), self.it, inner, ctx.id)
            self.larger: list[int] = []
            self.pending: set[int] = set()
            self.wake = start + 1
            return [(p, pack(ANN, inner)) for p in range(1, ctx.degree + 1)]

        if self.status == ACTIVE:
            if rnd == start + 1:
                for k, port in anns:
                    if k < self.my_key:
                        self.pending.add(port)
                    else:
                        self.larger.append(port)
                self.larger.sort()
            self.pending.difference_update(outs)
            if joined or fin:
                self.status = DOMINATED
                self.halted = True
                return [(p, pack(OUT)) for p in self.larger]
            deadline = start + cfg.t_mis + 1
            if not self.pending and rnd < deadline:
                self.status = IN
                self.wake = deadline
                return [(p, pack(JOIN)) for p in self.larger]
            if rnd >= deadline:
                # did not converge in time: back to the pool
                self.failed = True
                self.status = UNDECIDED
                self._schedule(self.it + 1)
                if self.it < 0:
                    self.halted = True
                return []
            self.wake = deadline
            return []

        if self.status == IN and rnd >= start + cfg.t_mis + 1:
            self.halted = True
            return [(p, pack(FIN)) for p in range(1, ctx.degree + 1)]
        return []

    def output(self) -> MisOutput:
        return MisOutput(self.status == IN, self.key, self.failed or self.status in (UNDECIDED, ACTIVE))


def mis_program(cfg: MisPhaseConfig):
    return lambda: GreedyMisProgram(cfg)


def mis_set(res: SimResult) -> set[int]:
    return {v for v, o in enumerate(res.outputs) if o.in_mis}


def run_failed(res: SimResult) -> bool:
    return res.timed_out or res.stalled or any(o.failed for o in res.outputs)


def sequential_replay(g: PortGraph, res: SimResult) -> set[int]:
    """Sequential greedy MIS along the recorded activation keys; nodes that
    were never active come last (by ID)."""
    big = (math.inf,)
    order = sorted(range(g.n), key=lambda v: (res.outputs[v].key or big, g.ids[v]))
    chosen: set[int] = set()
    blocked = bytearray(g.n)
    for v in order:
        if not blocked[v]:
            chosen.add(v)
            for w in g.nbr[v]:
                blocked[w] = 1
    return chosen


def is_mis(g: PortGraph, s: set[int]) -> bool:
    for v in range(g.n):
        inside = v in s
        hits = sum(1 for w in g.nbr[v] if w in s)
        if inside and hits:
            return False
        if not inside and not hits:
            return False
    return True
