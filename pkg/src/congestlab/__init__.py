"""Message-counting simulator for synchronous distributed graph algorithms."""

from .graph import (EdgeRef, GraphError, PortGraph, assign_ids, assign_ports,
                    cross_edges, gen_gnp, read_graph, write_graph)
from .sim import (CONGEST, LOCAL, Bandwidth, Knowledge, Message, NodeContext,
                  NodeProgram, SimResult, run, run_pair_crossing_check)

__all__ = [
    "EdgeRef", "GraphError", "PortGraph", "assign_ids", "assign_ports", "cross_edges",
    "gen_gnp", "read_graph", "write_graph", "CONGEST", "LOCAL", "Bandwidth", "Knowledge",
    "Message", "NodeContext", "NodeProgram", "SimResult", "run", "run_pair_crossing_check",
]
