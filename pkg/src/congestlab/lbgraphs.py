"""Generators for the lower-bound graph families.

Each generator returns an :class:`LbInstance`: the port graph, a readable
label for every node (``a1^3``, ``t_2^4``, ``y'5`` ...), a coarse part label,
and the optimum predicted for the instance.  Unless a ``seed`` is passed,
node ``v`` gets ID ``v + 1`` in construction order and ports follow edge
insertion order, so every generator is a pure function of its parameters.

Bit-vectors ``x`` and ``y`` are flattened row-major: ``x[(i-1)*k + (j-1)]``
is the bit for the pair ``(i, j)`` with ``i, j`` in ``1..k``.
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from .graph import GraphError, PortGraph, assign_ids, assign_ports, cross_edges


class LbParamError(ValueError):
    pass


class Prediction(NamedTuple):
    problem: str
    comparator: str    # "=", "<=" or ">="
    value: int
    tag: str


@dataclass
class LbInstance:
    graph: PortGraph
    family: str
    params: dict
    labels: tuple[str, ...]
    parts: tuple[str, ...]
    predicted: Prediction
    x: tuple[int, ...] | None = None
    y: tuple[int, ...] | None = None
    _by_label: dict = field(default=None, repr=False, compare=False)

    def node(self, label: str) -> int:
        if self._by_label is None:
            self._by_label = {lab: v for v, lab in enumerate(self.labels)}
        return self._by_label[label]

    def nodes_in(self, part: str) -> list[int]:
        return [v for v, p in enumerate(self.parts) if p == part]

    def label_edges(self, g: PortGraph | None = None) -> set[frozenset[str]]:
        g = self.graph if g is None else g
        return {frozenset((self.labels[u], self.labels[v])) for u, v in g.edges()}

    def with_graph(self, g: PortGraph, predicted: Prediction | None = None, **params) -> "LbInstance":
        return replace(self, graph=g, predicted=predicted or self.predicted,
                       params={**self.params, **params}, _by_label=None)


class _Builder:
    def __init__(self):
        self.labels: list[str] = []
        self.parts: list[str] = []
        self.index: dict[str, int] = {}
        self.edges: list[tuple[int, int]] = []

    def add(self, label: str, part: str) -> None:
        self.index[label] = len(self.labels)
        self.labels.append(label)
        self.parts.append(part)

    def edge(self, a: str, b: str) -> None:
        self.edges.append((self.index[a], self.index[b]))

    def clique(self, labels: Sequence[str]) -> None:
        for i, a in enumerate(labels):
            for b in labels[i + 1:]:
                self.edge(a, b)

    def cycle(self, labels: Sequence[str]) -> None:
        for i, a in enumerate(labels):
            self.edge(a, labels[(i + 1) % len(labels)])

    def finish(self, family, params, predicted, x=None, y=None, seed=None) -> LbInstance:
        g = PortGraph.from_edges(len(self.labels), self.edges)
        if seed is not None:
            s_ids, s_ports = np.random.SeedSequence(seed).spawn(2)
            g = assign_ports(assign_ids(g, s_ids), s_ports)
        return LbInstance(g, family, dict(params), tuple(self.labels), tuple(self.parts),
                          predicted, None if x is None else tuple(x), None if y is None else tuple(y))


# -- helpers ----------------------------------------------------------------

def _bitvec(bits, length: int, name: str) -> tuple[int, ...]:
    if isinstance(bits, str):
        bits = hex_to_bits(bits, length)
    out = tuple(int(b) for b in bits)
    if len(out) != length:
        raise LbParamError(f"{name} must have {length} bits, got {len(out)}")
    if any(b not in (0, 1) for b in out):
        raise LbParamError(f"{name} must contain only 0/1")
    return out


def bits_to_hex(bits: Sequence[int]) -> str:
    """MSB-first hex, zero-padded at the end to a multiple of four bits."""
    s = "".join(str(b) for b in bits)
    s += "0" * (-len(s) % 4)
    return "".join(f"{int(s[i:i + 4], 2):x}" for i in range(0, len(s), 4))


def hex_to_bits(text: str, length: int) -> tuple[int, ...]:
    """First ``length`` bits of an MSB-first hex string."""
    text = text.lower().removeprefix("0x")
    try:
        bits = "".join(f"{int(ch, 16):04b}" for ch in text)
    except ValueError:
        raise LbParamError(f"not a hex string: {text!r}") from None
    if len(bits) < length:
        raise LbParamError(f"hex string {text!r} holds {len(bits)} bits, need {length}")
    return tuple(int(b) for b in bits[:length])


def intersects(x: Sequence[int], y: Sequence[int]) -> bool:
    return any(a and b for a, b in zip(x, y))


def _log2_pow2(k: int) -> int:
    if k < 2 or k & (k - 1):
        raise LbParamError("k must be a power of 2 (at least 2)")
    return k.bit_length() - 1


def _check_ell(ell: int) -> None:
    if ell < 2 or ell % 2:
        raise LbParamError("l must be an even integer >= 2")


def index_bit(i: int, h: int) -> int:
    """Bit ``h`` (1 = least significant) of the zero-based form of index ``i``."""
    return ((i - 1) >> (h - 1)) & 1


def _gadget(ch: str, g: int, layer: int) -> str:
    return f"{ch}_{g}^{layer}"


# -- exact-problem families with l layers -------------------------------------

def _layered_family(k: int, ell: int, x, y, *, with_u: bool, seed=None):
    lk = _log2_pow2(k)
    _check_ell(ell)
    x = _bitvec(x, k * k, "x")
    y = _bitvec(y, k * k, "y")
    b = _Builder()
    rows = {s: [f"{s}^{i}" for i in range(1, k + 1)] for s in ("a1", "a2", "b1", "b2")}
    for s in ("a1", "a2"):
        for lab in rows[s]:
            b.add(lab, "V1")
    for s in ("b1", "b2"):
        for lab in rows[s]:
            b.add(lab, f"V{ell}")
    kinds = ("f", "u", "t") if with_u else ("f", "t")
    for gi in range(1, 2 * lk + 1):
        for j in range(1, ell + 1):
            for ch in kinds:
                b.add(_gadget(ch, gi, j), f"V{j}")
    for gi in range(1, 2 * lk + 1):
        seq = []
        for j in range(1, ell + 1):          # outbound half
            if j % 2:
                seq.append(_gadget("f", gi, j))
            else:
                seq += [_gadget("u", gi, j)] if with_u else []
                seq.append(_gadget("t", gi, j))
        for j in range(ell, 0, -1):          # return half
            if j % 2 == 0:
                seq.append(_gadget("f", gi, j))
            else:
                seq += [_gadget("u", gi, j)] if with_u else []
                seq.append(_gadget("t", gi, j))
        b.cycle(seq)
    for side, offset in (("1", 0), ("2", lk)):
        for i in range(1, k + 1):
            for h in range(1, lk + 1):
                ch = "t" if index_bit(i, h) else "f"
                b.edge(f"a{side}^{i}", _gadget(ch, h + offset, 1))
                b.edge(f"b{side}^{i}", _gadget(ch, h + offset, ell))
    if not with_u:
        for s in rows.values():
            b.clique(s)
    want = 1 if with_u else 0
    for i in range(1, k + 1):
        for j in range(1, k + 1):
            if x[(i - 1) * k + j - 1] == want:
                b.edge(f"a1^{i}", f"a2^{j}")
            if y[(i - 1) * k + j - 1] == want:
                b.edge(f"b1^{i}", f"b2^{j}")
    return b, x, y, lk


def mvc_exact_family(k: int, ell: int, x, y, seed: int | None = None) -> LbInstance:
    """Layered family whose minimum vertex cover encodes set disjointness.

    Row cliques on ``A1, A2, B1, B2``, ``2 log k`` bit-gadget cycles of length
    ``2l``, and ``{a1^i, a2^j}`` present iff ``x_ij = 0`` (likewise for ``y``).
    """
    b, x, y, lk = _layered_family(k, ell, x, y, with_u=False, seed=seed)
    base = 4 * k + 2 * ell * lk - 4
    pred = (Prediction("MVC", "=", base, "mvc-exact:intersecting") if intersects(x, y)
            else Prediction("MVC", ">=", base + 1, "mvc-exact:disjoint"))
    return b.finish("mvc-exact", {"k": k, "l": ell}, pred, x, y, seed)


def mds_exact_family(k: int, ell: int, x, y, seed: int | None = None) -> LbInstance:
    """Layered family whose minimum dominating set encodes set disjointness.

    No row cliques, bit-gadget cycles of length ``3l`` with degree-2 ``u``
    vertices, and ``{a1^i, a2^j}`` present iff ``x_ij = 1``.
    """
    b, x, y, lk = _layered_family(k, ell, x, y, with_u=True, seed=seed)
    base = 2 * ell * lk
    pred = (Prediction("MDS", "<=", base + 2, "mds-exact:intersecting") if intersects(x, y)
            else Prediction("MDS", ">=", base + 3, "mds-exact:disjoint"))
    return b.finish("mds-exact", {"k": k, "l": ell}, pred, x, y, seed)


# -- constant-gap dominating set family ----------------------------------------

def mds_crossing_graph(n: int, x, y, seed: int | None = None) -> LbInstance:
    if n < 2:
        raise LbParamError("n must be at least 2")
    x = _bitvec(x, n * n, "x")
    y = _bitvec(y, n * n, "y")
    b = _Builder()
    for s, part in (("a1", "A1"), ("a2", "A2"), ("b1", "B1"), ("b2", "B2"),
                    ("c1", "C1"), ("c2", "C2")):
        for i in range(1, n + 1):
            b.add(f"{s}^{i}", part)
    b.add("a*", "a*")
    b.add("b*", "b*")
    for c in ("c1", "c2"):
        b.clique([f"{c}^{i}" for i in range(1, n + 1)])
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if j != i:
                b.edge(f"c1^{i}", f"a1^{j}")
                b.edge(f"c1^{i}", f"b1^{j}")
                b.edge(f"c2^{i}", f"a2^{j}")
                b.edge(f"c2^{i}", f"b2^{j}")
    for i in range(1, n + 1):
        b.edge("a*", f"a1^{i}")
        b.edge("b*", f"b1^{i}")
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if x[(i - 1) * n + j - 1]:
                b.edge(f"a1^{i}", f"a2^{j}")
            if y[(i - 1) * n + j - 1]:
                b.edge(f"b1^{i}", f"b2^{j}")
    pred = (Prediction("MDS", "<=", 4, "mds-crossing:intersecting") if intersects(x, y)
            else Prediction("MDS", ">=", 5, "mds-crossing:disjoint"))
    return b.finish("mds-crossing", {"n": n}, pred, x, y, seed)


def fixed_member_bits(n: int) -> tuple[int, ...]:
    """``x`` of the fixed member: ``a1^i ~ a2^j`` for ``j = i .. i+n/2-1`` (mod n)."""
    x = [0] * (n * n)
    for i in range(1, n + 1):
        for s in range(n // 2):
            j = (i - 1 + s) % n + 1
            x[(i - 1) * n + j - 1] = 1
    return tuple(x)


def mds_fixed_member(n: int, seed: int | None = None) -> LbInstance:
    if n < 4 or n % 2:
        raise LbParamError("n must be even and at least 4")
    x = fixed_member_bits(n)
    inst = mds_crossing_graph(n, x, tuple(1 - b for b in x), seed)
    inst.family = "mds-fixed"
    return inst


def eligible_crossings(inst: LbInstance, i: int, j: int) -> list[tuple[int, int]]:
    """Pairs ``(p, q)`` such that ``{a1^p, a2^q}`` is an edge, ``a1^p`` is not
    adjacent to ``a2^j`` and ``a2^q`` is not adjacent to ``a1^i``; requires
    ``{a1^i, a2^j}`` to be an edge."""
    g = inst.graph
    n = inst.params["n"]
    a1 = lambda t: inst.node(f"a1^{t}")
    a2 = lambda t: inst.node(f"a2^{t}")
    if not g.has_edge(a1(i), a2(j)):
        raise GraphError(f"a1^{i} and a2^{j} are not adjacent")
    out = []
    for p in range(1, n + 1):
        if g.has_edge(a1(p), a2(j)):
            continue
        for q in range(1, n + 1):
            if g.has_edge(a1(p), a2(q)) and not g.has_edge(a1(i), a2(q)):
                out.append((p, q))
    return out


def cross_by_label(inst: LbInstance, e: tuple[str, str], e2: tuple[str, str]) -> PortGraph:
    """Port-preserving crossing of ``e = (u, v)`` and ``e2 = (u', v')``, giving
    ``{u, u'}`` and ``{v, v'}``."""
    g = inst.graph
    r1 = g.edge_ref(inst.node(e[0]), inst.node(e[1]))
    r2 = g.edge_ref(inst.node(e2[0]), inst.node(e2[1]))
    return cross_edges(g, r1, r2)


def crossed_member(inst: LbInstance, i: int, j: int, p: int, q: int) -> LbInstance:
    """Fixed member with ``{a1^i, a2^j}`` and ``{a1^p, a2^q}`` crossed into
    ``{a1^i, a2^q}`` and ``{a1^p, a2^j}``."""
    g = cross_by_label(inst, (f"a1^{i}", f"a2^{j}"), (f"a2^{q}", f"a1^{p}"))
    n = inst.params["n"]
    x = list(inst.x)
    for (r, c), val in (((i, j), 0), ((p, q), 0), ((i, q), 1), ((p, j), 1)):
        x[(r - 1) * n + c - 1] = val
    out = inst.with_graph(g, Prediction("MDS", "<=", 4, "mds-crossing:crossed"),
                          crossed=[i, j, p, q])
    out.x = tuple(x)
    return out


def bits_from_graph(inst: LbInstance, g: PortGraph | None = None) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Recover ``(x, y)`` of a dominating-set crossing instance from its edges."""
    g = inst.graph if g is None else g
    n = inst.params["n"]
    x, y = [0] * (n * n), [0] * (n * n)
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            x[(i - 1) * n + j - 1] = int(g.has_edge(inst.node(f"a1^{i}"), inst.node(f"a2^{j}")))
            y[(i - 1) * n + j - 1] = int(g.has_edge(inst.node(f"b1^{i}"), inst.node(f"b2^{j}")))
    return tuple(x), tuple(y)


# -- two-copy tripartite base graphs -------------------------------------------

def _tripartite_two_copies(t: int, ysize: int) -> _Builder:
    b = _Builder()
    for tick in ("", "'"):
        for part, size in (("X", t), ("Y", ysize), ("Z", t)):
            for i in range(1, size + 1):
                b.add(f"{part.lower()}{tick}{i}", part + tick)
        for yi in range(1, ysize + 1):
            for i in range(1, t + 1):
                b.edge(f"x{tick}{i}", f"y{tick}{yi}")
            for i in range(1, t + 1):
                b.edge(f"y{tick}{yi}", f"z{tick}{i}")
    return b


def mvc_base_graph(t: int, c: int = 1, seed: int | None = None) -> LbInstance:
    """Two copies of ``X - Y - Z`` with ``|X| = |Z| = t``, ``|Y| = t/(4c)``."""
    if c < 1 or t < 1 or t % (4 * c):
        raise LbParamError("t must be a positive multiple of 4c (c >= 1)")
    ysize = t // (4 * c)
    b = _tripartite_two_copies(t, ysize)
    pred = Prediction("MVC", "=", 2 * ysize, "mvc-base:Y-union")
    return b.finish("mvc-base", {"t": t, "c": c}, pred, seed=seed)


def maxis_base_graph(t: int, eps, seed: int | None = None) -> LbInstance:
    """Same shape as :func:`mvc_base_graph` with ``|Y| = eps * t``."""
    eps = Fraction(eps).limit_denominator(10**6) if isinstance(eps, float) else Fraction(eps)
    if not 0 < eps < 1:
        raise LbParamError("eps must lie in (0, 1)")
    ysize = eps * t
    if ysize.denominator != 1 or ysize < 1:
        raise LbParamError("eps * t must be a positive integer")
    b = _tripartite_two_copies(t, int(ysize))
    pred = Prediction("MaxIS", "=", 4 * t, "maxis-base:XZ-union")
    return b.finish("maxis-base", {"t": t, "eps": str(eps)}, pred, seed=seed)


def base_crossing(inst: LbInstance, y: int, z: int, x2: int, y2: int) -> PortGraph:
    """Cross ``{y, z}`` with ``{x', y'}`` into ``{y, y'}`` and ``{z, x'}``."""
    return cross_by_label(inst, (f"y{y}", f"z{z}"), (f"y'{y2}", f"x'{x2}"))


# -- maximum matching family ----------------------------------------------------

def maxm_lb_graph(n: int, eps, seed: int = 0) -> LbInstance:
    """``2n`` nodes: halves ``A`` and ``B`` joined by a perfect matching of
    valuable edges ``u_i - v_i``; in each half the last ``floor(eps n / 7)``
    nodes form a clique joined to every other node of that half.  IDs are a
    random permutation of ``1..2n`` and ports are random."""
    eps = Fraction(eps).limit_denominator(10**6) if isinstance(eps, float) else Fraction(eps)
    core = math.floor(eps / 7 * n)
    if core < 1:
        raise LbParamError("floor(eps * n / 7) must be at least 1")
    if core > n:
        raise LbParamError("eps too large for n")
    b = _Builder()
    for s, side in (("u", "A"), ("v", "B")):
        for i in range(1, n + 1):
            b.add(f"{s}{i}", f"N_{side}" if i <= n - core else f"C_{side}")
    for s in ("u", "v"):
        cl = [f"{s}{i}" for i in range(n - core + 1, n + 1)]
        b.clique(cl)
        for i in range(1, n - core + 1):
            for c in cl:
                b.edge(f"{s}{i}", c)
    for i in range(1, n + 1):
        b.edge(f"u{i}", f"v{i}")
    pred = Prediction("MaxM", "=", n, "maxm:valuable-edges")
    return b.finish("maxm", {"n": n, "eps": str(eps)}, pred, seed=seed)


# -- separation checks ------------------------------------------------------------

@dataclass
class SeparationReport:
    prop1: bool
    prop2: bool
    prop3: bool
    prop4: bool | None
    cuts_disjoint: bool
    details: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (self.prop1 and self.prop2 and self.prop3 and self.cuts_disjoint
                and self.prop4 is not False)


_LAYERED = {"mvc-exact": mvc_exact_family, "mds-exact": mds_exact_family}


def _layer(part: str) -> int:
    return int(part[1:])


def check_separation(inst: LbInstance, oracle: bool = True,
                     max_vertices: int | None = None) -> SeparationReport:
    """Check the four layering properties of a layered family member.

    Properties 1 and 2 flip each bit of ``x`` (resp. ``y``) in turn and require
    the edge-set difference to stay inside ``V1 x V1`` (resp. ``Vl x Vl``).
    """
    if inst.family not in _LAYERED:
        raise LbParamError(f"separation applies to layered families, not {inst.family!r}")
    gen = _LAYERED[inst.family]
    k, ell = inst.params["k"], inst.params["l"]
    part_of = dict(zip(inst.labels, inst.parts))
    base_edges = inst.label_edges()
    details = []

    def flips_local(which: str, layer: str) -> bool:
        ok = True
        for pos in range(k * k):
            x, y = list(inst.x), list(inst.y)
            vec = x if which == "x" else y
            vec[pos] ^= 1
            other = gen(k, ell, x, y)
            diff = base_edges ^ other.label_edges()
            if not diff:
                ok = False
                details.append(f"flipping {which}[{pos}] changed nothing")
            for e in diff:
                if any(part_of[v] != layer for v in e):
                    ok = False
                    details.append(f"flipping {which}[{pos}] changed {sorted(e)}")
        return ok

    p1 = flips_local("x", "V1")
    p2 = flips_local("y", f"V{ell}")
    p3 = True
    cuts: dict[int, set] = {i: set() for i in range(1, ell)}
    for e in base_edges:
        a, b = (_layer(part_of[v]) for v in e)
        if abs(a - b) > 1:
            p3 = False
            details.append(f"edge {sorted(e)} spans layers {a} and {b}")
        for cut in range(1, ell):
            if min(a, b) <= cut < max(a, b):
                cuts[cut].add(e)
    seen: set = set()
    disjoint = True
    for cut in range(1, ell):
        if seen & cuts[cut]:
            disjoint = False
            details.append(f"cut {cut} shares edges with an earlier cut")
        seen |= cuts[cut]
    p4 = None
    if oracle:
        from .oracles import verify_instance
        rep = verify_instance(inst, max_vertices=max_vertices)
        p4 = rep.passed
        if not p4:
            details.append(rep.line())
    return SeparationReport(p1, p2, p3, p4, disjoint, details)


# -- instance files ------------------------------------------------------------------

SIDECAR_VERSION = 1


def sidecar(inst: LbInstance) -> dict:
    g = inst.graph
    return {
        "version": SIDECAR_VERSION,
        "family": inst.family,
        "params": inst.params,
        "x": None if inst.x is None else bits_to_hex(inst.x),
        "y": None if inst.y is None else bits_to_hex(inst.y),
        "bits": None if inst.x is None else len(inst.x),
        "labels": {str(g.ids[v]): [inst.labels[v], inst.parts[v]] for v in range(g.n)},
        "predicted": dict(inst.predicted._asdict()),
    }


def write_instance(inst: LbInstance, graph_path: str | os.PathLike) -> str:
    """Write ``<graph_path>`` and ``<graph_path>.json``; returns the sidecar path."""
    from .graph import write_graph
    write_graph(inst.graph, graph_path)
    side = str(graph_path) + ".json"
    with open(side, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(sidecar(inst), fh, indent=1, sort_keys=True)
        fh.write("\n")
    return side


def read_instance(graph_path: str | os.PathLike, sidecar_path: str | None = None) -> LbInstance:
    from .graph import read_graph
    g = read_graph(graph_path)
    with open(sidecar_path or str(graph_path) + ".json", encoding="utf-8") as fh:
        meta = json.load(fh)
    labels, parts = [], []
    for v in range(g.n):
        lab, part = meta["labels"][str(g.ids[v])]
        labels.append(lab)
        parts.append(part)
    bits = meta.get("bits")
    x = None if meta.get("x") is None else hex_to_bits(meta["x"], bits)
    y = None if meta.get("y") is None else hex_to_bits(meta["y"], bits)
    p = meta["predicted"]
    pred = Prediction(p["problem"], p["comparator"], int(p["value"]), p["tag"])
    return LbInstance(g, meta["family"], meta["params"], tuple(labels), tuple(parts), pred, x, y)
