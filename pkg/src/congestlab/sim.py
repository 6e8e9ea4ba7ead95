"""Synchronous round executor with exact message accounting.

Every node runs its own :class:`NodeProgram`.  In each round a node reads the
messages delivered to it, computes, and may send at most one payload on each
of its ports; payloads reach the neighbour at the start of the next round.
The engine is event driven: a node is stepped only in round 1, in rounds
where it receives something, and in the round it asked to be woken at.
Silent rounds therefore cost nothing, which makes time-encoded protocols
(act at round ``f(ID)``) cheap to simulate.
"""
from __future__ import annotations

import enum
import heapq
import json
import math
import random
from dataclasses import dataclass, field
from typing import Any, Callable, NamedTuple

from .graph import EdgeRef, PortGraph, cross_edges


class Knowledge(enum.Enum):
    KT0 = "KT0"
    KT1 = "KT1"


@dataclass(frozen=True)
class Bandwidth:
    """``CONGEST`` with a per-message budget of ``c * ceil(log2 n)`` bits, or
    unbounded ``LOCAL``.  ``ceil(log2 n)`` is floored at ``min_log`` so tiny
    graphs can still carry a tag and two IDs."""

    kind: str = "CONGEST"
    c: int = 8
    min_log: int = 4

    def limit(self, n: int) -> float:
        if self.kind == "LOCAL":
            return math.inf
        return self.c * max(self.min_log, math.ceil(math.log2(max(n, 1))))

    @classmethod
    def congest(cls, c: int = 8) -> "Bandwidth":
        return cls("CONGEST", c)

    @classmethod
    def local(cls) -> "Bandwidth":
        return cls("LOCAL")

    def __str__(self) -> str:
        return "LOCAL" if self.kind == "LOCAL" else f"CONGEST(c={self.c})"


CONGEST = Bandwidth.congest()
LOCAL = Bandwidth.local()


class BandwidthViolation(RuntimeError):
    def __init__(self, node_id: int, rnd: int, port: int, bits: int, limit: float):
        super().__init__(f"node {node_id} round {rnd} port {port}: "
                         f"{bits}-bit payload exceeds the {limit}-bit limit")
        self.node_id, self.round, self.port = node_id, rnd, port


class ProtocolError(RuntimeError):
    """A node program broke the step contract (bad port, duplicate send...)."""


class Message(NamedTuple):
    port: int        # port at the receiver
    payload: bytes
    sender: int      # sender ID, stamped by the engine


@dataclass
class NodeContext:
    id: int
    degree: int
    n: int
    knowledge: Knowledge
    neighbor_ids: tuple[int, ...] | None   # KT1 only, indexed by port - 1
    rng: random.Random
    bit_limit: float
    params: dict[str, Any]


class NodeProgram:
    """Per-node state machine.

    Subclasses override :meth:`init`, :meth:`step` and :meth:`output`.
    ``halted`` ends participation.  ``wake`` is the next round at which the
    node wants to be stepped without having received anything; ``None``
    means "only when a message arrives".  Every node is stepped in round 1.
    """

    halted: bool = False
    wake: int | None = None

    def init(self, ctx: NodeContext) -> None:
        self.ctx = ctx

    def step(self, rnd: int, inbox: list[Message]) -> list[tuple[int, bytes]]:
        raise NotImplementedError

    def output(self) -> Any:
        return None


ProgramFactory = Callable[[], NodeProgram]


@dataclass
class SimResult:
    n: int
    m: int
    rounds: int
    messages: int
    bits: int
    per_round: dict[int, int]
    utilized: bytearray
    outputs: list[Any]
    ids: tuple[int, ...]
    timed_out: bool = False
    stalled: bool = False
    trace: list[dict] | None = None

    @property
    def utilized_count(self) -> int:
        return sum(self.utilized)

    def output_by_id(self) -> dict[int, Any]:
        return dict(zip(self.ids, self.outputs))

    def trace_jsonl(self) -> str:
        if self.trace is None:
            raise ValueError("run was executed without tracing")
        return "".join(json.dumps(rec, sort_keys=True) + "\n" for rec in self.trace)

    CSV_FIELDS = ("n", "m", "rounds", "messages", "bits", "utilized", "timed_out")

    def summary(self) -> dict[str, Any]:
        return {"n": self.n, "m": self.m, "rounds": self.rounds,
                "messages": self.messages, "bits": self.bits,
                "utilized": self.utilized_count,
                "timed_out": int(self.timed_out or self.stalled)}

    def csv_row(self) -> str:
        s = self.summary()
        return ",".join(str(s[k]) for k in self.CSV_FIELDS)


def node_rng(seed: int, node_id: int) -> random.Random:
    """Private generator of one node; depends only on ``(seed, node ID)``."""
    return random.Random((int(seed) << 64) | int(node_id))


def run(g: PortGraph, factory: ProgramFactory, knowledge: Knowledge = Knowledge.KT0,
        bandwidth: Bandwidth = CONGEST, seed: int = 0, round_cap: int = 10**9,
        params: dict[str, Any] | None = None, trace: bool = False) -> SimResult:
    if round_cap < 1:
        raise ValueError("round_cap must be at least 1")
    n = g.n
    limit = bandwidth.limit(n)
    params = dict(params or {})
    nbr, back, ids = g.nbr, g.back, g.ids
    eidx = g.edge_index()
    progs: list[NodeProgram] = []
    for v in range(n):
        nid = ids[v]
        ctx = NodeContext(
            id=nid, degree=len(nbr[v]), n=n, knowledge=knowledge,
            neighbor_ids=tuple(ids[w] for w in nbr[v]) if knowledge is Knowledge.KT1 else None,
            rng=node_rng(seed, nid), bit_limit=limit, params=params)
        p = factory()
        p.init(ctx)
        progs.append(p)

    utilized = bytearray(g.m)
    per_round: dict[int, int] = {}
    log: list[dict] | None = [] if trace else None
    messages = bits = 0
    last_round = 0
    scheduled = [0] * n          # round each node is due to wake at (0 = none)
    heap: list[tuple[int, int]] = []
    inboxes: dict[int, list[Message]] = {}
    timed_out = stalled = False

    rnd = 1
    active = range(n)
    while True:
        if rnd > round_cap:
            timed_out = any(not p.halted for p in progs)
            break
        cur_inbox = inboxes
        inboxes = {}
        sent_here = 0
        for v in active:
            p = progs[v]
            if p.halted:
                continue
            box = cur_inbox.get(v)
            if box is None:
                box = []
            elif len(box) > 1:
                box.sort()
            out = p.step(rnd, box)
            last_round = rnd
            if out:
                used = set()
                row, brow, erow, sid = nbr[v], back[v], eidx[v], ids[v]
                deg = len(row)
                for port, payload in out:
                    if not 1 <= port <= deg:
                        raise ProtocolError(f"node {sid} round {rnd}: no port {port}")
                    if port in used:
                        raise ProtocolError(f"node {sid} round {rnd}: two messages on port {port}")
                    used.add(port)
                    nb = len(payload) * 8
                    if nb == 0:
                        raise ProtocolError(f"node {sid} round {rnd} port {port}: empty payload")
                    if nb > limit:
                        raise BandwidthViolation(sid, rnd, port, nb, limit)
                    w = row[port - 1]
                    q = brow[port - 1]
                    bits += nb
                    utilized[erow[port - 1]] = 1
                    if log is not None:
                        log.append({"round": rnd, "src": sid, "src_port": port,
                                    "dst": ids[w], "dst_port": q, "payload": payload.hex()})
                    if not progs[w].halted:
                        lst = inboxes.get(w)
                        if lst is None:
                            inboxes[w] = [Message(q, payload, sid)]
                        else:
                            lst.append(Message(q, payload, sid))
                sent_here += len(out)
            if not p.halted:
                wk = p.wake
                if wk is not None and wk > rnd:
                    if scheduled[v] != wk:
                        scheduled[v] = wk
                        heapq.heappush(heap, (wk, v))
                else:
                    scheduled[v] = 0
        if sent_here:
            per_round[rnd] = sent_here
            messages += sent_here
        # choose the next round in which anything happens
        while heap and (progs[heap[0][1]].halted or scheduled[heap[0][1]] != heap[0][0]):
            heapq.heappop(heap)
        if inboxes:
            nxt = rnd + 1
        elif heap:
            nxt = heap[0][0]
        else:
            stalled = any(not p.halted for p in progs)
            break
        due = set(inboxes)
        while heap and heap[0][0] == nxt:
            _, v = heapq.heappop(heap)
            if scheduled[v] == nxt:
                scheduled[v] = 0
                due.add(v)
        rnd = nxt
        active = sorted(due)

    return SimResult(n=n, m=g.m, rounds=last_round, messages=messages, bits=bits,
                     per_round=per_round, utilized=utilized,
                     outputs=[p.output() for p in progs], ids=ids,
                     timed_out=timed_out, stalled=stalled, trace=log)


@dataclass
class CrossingReport:
    status: str                        # "pass", "fail" or "vacuous"
    mismatches: list[int] = field(default_factory=list)   # node IDs
    base: SimResult | None = None
    crossed: SimResult | None = None


def run_pair_crossing_check(g: PortGraph, e: EdgeRef, e2: EdgeRef, factory: ProgramFactory,
                            knowledge: Knowledge = Knowledge.KT0,
                            bandwidth: Bandwidth = CONGEST, seed: int = 0,
                            round_cap: int = 10**6,
                            params: dict[str, Any] | None = None) -> CrossingReport:
    """Run ``factory`` on ``g`` and, if neither ``e`` nor ``e2`` carried a
    message, on the crossed graph too, comparing the per-node outputs."""
    crossed_g = cross_edges(g, e, e2)
    base = run(g, factory, knowledge, bandwidth, seed, round_cap, params)
    eidx = g.edge_index()
    if base.utilized[eidx[e.u][e.pu - 1]] or base.utilized[eidx[e2.u][e2.pu - 1]]:
        return CrossingReport("vacuous", base=base)
    other = run(crossed_g, factory, knowledge, bandwidth, seed, round_cap, params)
    bad = [g.ids[v] for v in range(g.n) if base.outputs[v] != other.outputs[v]]
    return CrossingReport("fail" if bad else "pass", bad, base, other)
