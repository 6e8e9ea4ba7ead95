"""Spanning-forest construction shared by the coordinator-based programs.

The node with the smallest ID in each component starts a BFS flood; a node
with ID ``x`` waits until round ``(x - 1) * (n + 1) + 1`` and only starts a
flood of its own if nothing has reached it by then.  Every edge carries at
most two tree messages.  Once a node has heard from every port it knows its
children; subtree completion is convergecast to the root.

:class:`TreeBuilder` is a helper owned by a node program, not a program.
"""
from __future__ import annotations

from ..codec import pack

BFS, CHILD, TDONE = 100, 101, 102


class TreeBuilder:
    def __init__(self, ctx):
        self.ctx = ctx
        self.parent = None          # port, or None at the root
        self.children: list[int] = []
        self.reached = False
        self.root = False
        self.heard: set[int] = set()
        self.done_children: set[int] = set()
        self.nbr_id: dict[int, int] = {}
        self.subtree_done = False
        self.reported = False
        self.count = 0              # value convergecast with TDONE
        self.subtree_total = 0

    def start_round(self) -> int:
        return (self.ctx.id - 1) * (self.ctx.n + 1) + 1

    def maybe_start(self, rnd: int) -> list[tuple[int, bytes]]:
        if self.reached:
            return []
        self.reached = self.root = True
        return [(p, pack(BFS)) for p in range(1, self.ctx.degree + 1)]

    def handle(self, port: int, tag: int, vals, sender: int) -> list[tuple[int, bytes]]:
        """Process one tree message; returns messages to send."""
        self.nbr_id[port] = sender
        out = []
        if tag == BFS:
            self.heard.add(port)
            if not self.reached:
                self.reached = True
                self.parent = port
        elif tag == CHILD:
            self.heard.add(port)
            self.children.append(port)
        elif tag == TDONE:
            self.done_children.add(port)
            self.subtree_total += vals[0]
        return out

    def after_inbox(self, newly_reached: bool) -> list[tuple[int, bytes]]:
        out = []
        if newly_reached:
            for p in range(1, self.ctx.degree + 1):
                if p == self.parent:
                    out.append((p, pack(CHILD)))
                else:
                    out.append((p, pack(BFS)))
        return out

    def ready_to_report(self) -> bool:
        return (self.reached and not self.reported
                and len(self.heard) == self.ctx.degree
                and len(self.done_children) == len(self.children))

    def report(self) -> list[tuple[int, bytes]]:
        self.reported = True
        self.children.sort()
        total = self.subtree_total + self.count
        self.subtree_total = total
        if self.parent is None:
            return []
        return [(self.parent, pack(TDONE, total))]
