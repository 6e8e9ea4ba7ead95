"""A program that sends few messages cannot tell a graph from its crossed
version when the two crossed edges stay silent."""
from congestlab.codec import pack
from congestlab.lbgraphs import mvc_base_graph
from congestlab.sim import NodeProgram, run_pair_crossing_check


class LowDegreePing(NodeProgram):
    """Nodes of degree at most 2 ping port 1 once; everyone outputs what it heard."""

    def init(self, ctx):
        super().init(ctx)
        self.heard = []

    def step(self, rnd, inbox):
        self.heard += [(m.port, m.sender) for m in inbox]
        if rnd == 1:
            self.wake = 2
            return [(1, pack(1))] if 0 < self.ctx.degree <= 2 else []
        self.halted = True
        return []

    def output(self):
        return tuple(self.heard)


def main() -> None:
    inst = mvc_base_graph(8, 1, seed=1)
    g = inst.graph
    tally = {"pass": 0, "fail": 0, "vacuous": 0}
    for z in range(1, 9):
        for x2 in range(1, 9):
            e = g.edge_ref(inst.node("y1"), inst.node(f"z{z}"))
            e2 = g.edge_ref(inst.node("y'1"), inst.node(f"x'{x2}"))
            rep = run_pair_crossing_check(g, e, e2, LowDegreePing)
            tally[rep.status] += 1
    print(f"{g.n} nodes, {g.m} edges; 64 crossings of {{y1, z}} with {{y'1, x'}}")
    print("  outcomes:", tally)
    print("  'vacuous' means a ping used one of the two edges; every other pair must pass")


if __name__ == "__main__":
    main()
