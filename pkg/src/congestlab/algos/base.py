"""Per-port outgoing FIFOs for programs that may want to send several
messages over one edge in the same round."""
from __future__ import annotations

from collections import deque

from ..sim import NodeProgram


class QueuedProgram(NodeProgram):
    def reset_queues(self) -> None:
        self.outq: dict[int, deque] = {}

    def send(self, port: int, payload: bytes) -> None:
        q = self.outq.get(port)
        if q is None:
            q = self.outq[port] = deque()
        q.append(payload)

    def busy(self) -> bool:
        return any(self.outq.values())

    def flush(self) -> list[tuple[int, bytes]]:
        out = []
        for p, q in self.outq.items():
            if q:
                out.append((p, q.popleft()))
        return out
