"""Batch driver behind the command line: instance generation, oracle
verification, seed sweeps and scaling fits."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator

import numpy as np

from . import algos, lbgraphs
from .graph import PortGraph, gen_gnp, random_regular, read_graph, write_graph
from .lbgraphs import LbInstance
from .oracles import OracleRefusal, solve, verify_instance
from .sim import Bandwidth, BandwidthViolation, Knowledge

SCHEMA_VERSION = 1
CSV_COLUMNS = ("name", "seed", "n", "m", "params", "messages", "bits", "rounds",
               "size", "opt", "ratio", "valid", "failed")
WORKERS_ENV = "CONGESTLAB_WORKERS"


class ExperimentError(ValueError):
    pass


# -- instance families ------------------------------------------------------------

def _random_bits(length: int, rng: random.Random) -> tuple[int, ...]:
    return tuple(rng.randint(0, 1) for _ in range(length))


def _bits_arg(p: dict, key: str, length: int, rng: random.Random):
    v = p.get(key)
    if v is None:
        return _random_bits(length, rng)
    return lbgraphs.hex_to_bits(v, length) if isinstance(v, str) else tuple(v)


def _need(p: dict, *keys: str) -> None:
    missing = [k for k in keys if p.get(k) is None]
    if missing:
        raise ExperimentError("missing parameter(s): " + ", ".join("--" + k for k in missing))


def _layered(builder, p, rng):
    _need(p, "k", "l")
    k = int(p["k"])
    if k < 2 or k & (k - 1):
        raise ExperimentError("k must be a power of 2")
    return builder(k, int(p["l"]), _bits_arg(p, "x", k * k, rng), _bits_arg(p, "y", k * k, rng),
                   seed=p.get("seed"))


def _crossing(p, rng):
    _need(p, "n")
    n = int(p["n"])
    return lbgraphs.mds_crossing_graph(n, _bits_arg(p, "x", n * n, rng),
                                       _bits_arg(p, "y", n * n, rng), seed=p.get("seed"))


def _crossed(p, rng):
    _need(p, "n", "i", "j", "p", "q")
    base = lbgraphs.mds_fixed_member(int(p["n"]), seed=p.get("seed"))
    return lbgraphs.crossed_member(base, *(int(p[k]) for k in ("i", "j", "p", "q")))


def _fixed(p, rng):
    _need(p, "n")
    return lbgraphs.mds_fixed_member(int(p["n"]), seed=p.get("seed"))


def _mvc_base(p, rng):
    _need(p, "t")
    return lbgraphs.mvc_base_graph(int(p["t"]), int(p.get("c") or 1), seed=p.get("seed"))


def _maxis_base(p, rng):
    _need(p, "t", "eps")
    return lbgraphs.maxis_base_graph(int(p["t"]), p["eps"], seed=p.get("seed"))


def _maxm(p, rng):
    _need(p, "n", "eps")
    return lbgraphs.maxm_lb_graph(int(p["n"]), p["eps"], seed=p.get("seed") or 0)


FAMILIES = {
    "mvc-exact": lambda p, rng: _layered(lbgraphs.mvc_exact_family, p, rng),
    "mds-exact": lambda p, rng: _layered(lbgraphs.mds_exact_family, p, rng),
    "mds-crossing": _crossing,
    "mds-fixed": _fixed,
    "mds-crossed": _crossed,
    "mvc-base": _mvc_base,
    "maxis-base": _maxis_base,
    "maxm": _maxm,
}
RANDOM_GRAPHS = ("gnp", "regular")


def build_instance(family: str, params: dict[str, Any]) -> LbInstance:
    fn = FAMILIES.get(family)
    if fn is None:
        raise ExperimentError(f"unknown family {family!r}; choose from {', '.join(sorted(FAMILIES))}")
    rng = random.Random(params.get("seed") or 0)
    try:
        return fn(params, rng)
    except lbgraphs.LbParamError as exc:
        raise ExperimentError(str(exc)) from None


def random_graph(kind: str, params: dict[str, Any], seed: int) -> PortGraph:
    if kind == "gnp":
        _need(params, "n")
        n = int(params["n"])
        return gen_gnp(n, edge_probability(n, params), seed)
    if kind == "regular":
        _need(params, "n", "d")
        return random_regular(int(params["n"]), int(params["d"]), seed)
    raise ExperimentError(f"unknown random graph {kind!r}")


def edge_probability(n: int, params: dict[str, Any]) -> float:
    """``p`` directly, or ``c * ln(n) / n`` from ``c``; clipped to 1."""
    if params.get("p") is not None:
        p = float(params["p"])
    elif params.get("c") is not None:
        p = float(params["c"]) * math.log(n) / n
    else:
        raise ExperimentError("gnp needs --p or --c")
    return min(1.0, p)


def cmd_generate(family: str, params: dict[str, Any], out: str | os.PathLike,
                 count: int = 1) -> list[str]:
    """Write instance file(s) plus sidecars; returns the graph paths."""
    if count < 1:
        raise ExperimentError("count must be at least 1")
    out = Path(out)
    paths = []
    for idx in range(count):
        p = dict(params)
        if count > 1:
            p["seed"] = (p.get("seed") or 0) + idx
            target = out.with_name(f"{out.stem}-{idx:03d}{out.suffix}")
        else:
            target = out
        target.parent.mkdir(parents=True, exist_ok=True)
        if family in RANDOM_GRAPHS:
            g = random_graph(family, p, int(p.get("seed") or 0))
            write_graph(g, target)
            meta = {"version": lbgraphs.SIDECAR_VERSION, "family": family,
                    "params": {k: v for k, v in p.items() if v is not None}}
            with open(str(target) + ".json", "w", encoding="utf-8", newline="\n") as fh:
                json.dump(meta, fh, indent=1, sort_keys=True)
                fh.write("\n")
        else:
            inst = build_instance(family, p)
            if p.get("seed") is not None:
                inst.params["seed"] = p["seed"]
            lbgraphs.write_instance(inst, target)
        paths.append(str(target))
    return paths


# -- verification ----------------------------------------------------------------

@dataclass
class VerifyRow:
    path: str
    status: str        # PASS, FAIL, REFUSED or SKIP
    detail: str

    def line(self) -> str:
        return f"{self.status} {self.path}: {self.detail}"


def _regenerate(inst: LbInstance) -> LbInstance | None:
    p = dict(inst.params)
    if inst.family == "mds-fixed" and "crossed" in p:
        i, j, pp, q = p.pop("crossed")
        p.update(i=i, j=j, p=pp, q=q)
        family = "mds-crossed"
    else:
        family = inst.family
    if family not in FAMILIES:
        return None
    p["seed"] = None
    if inst.x is not None:
        p["x"], p["y"] = inst.x, inst.y
    return build_instance(family, p)


def consistency_diff(inst: LbInstance) -> list[str]:
    """Differences between an instance and a fresh build from its sidecar."""
    ref = _regenerate(inst)
    if ref is None:
        return []
    diff = []
    if tuple(ref.predicted) != tuple(inst.predicted):
        diff.append(f"predicted: sidecar {inst.predicted.comparator} {inst.predicted.value} "
                    f"({inst.predicted.tag}), rebuilt {ref.predicted.comparator} "
                    f"{ref.predicted.value} ({ref.predicted.tag})")
    have, want = inst.label_edges(), ref.label_edges()
    extra = sorted("-".join(sorted(e)) for e in have - want)
    lost = sorted("-".join(sorted(e)) for e in want - have)
    if extra:
        diff.append("edges not implied by the sidecar: " + ", ".join(extra[:8])
                    + (" ..." if len(extra) > 8 else ""))
    if lost:
        diff.append("edges implied by the sidecar but missing: " + ", ".join(lost[:8])
                    + (" ..." if len(lost) > 8 else ""))
    return diff


def verify_path(path: str, max_vertices: int | None = None) -> VerifyRow:
    try:
        with open(str(path) + ".json", encoding="utf-8") as fh:
            meta = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        return VerifyRow(str(path), "FAIL", f"unreadable sidecar: {exc}")
    if "predicted" not in meta:
        return VerifyRow(str(path), "SKIP", f"{meta.get('family')} carries no prediction")
    try:
        inst = lbgraphs.read_instance(path)
    except (KeyError, ValueError, OSError) as exc:
        return VerifyRow(str(path), "FAIL", f"sidecar does not match the graph: {exc!r}")
    diff = consistency_diff(inst)
    if diff:
        return VerifyRow(str(path), "FAIL", "; ".join(diff))
    try:
        rep = verify_instance(inst, max_vertices)
    except OracleRefusal as exc:
        return VerifyRow(str(path), "REFUSED", str(exc))
    return VerifyRow(str(path), "PASS" if rep.passed else "FAIL",
                     f"{rep.problem} optimum {rep.optimum}, predicted {rep.comparator} "
                     f"{rep.predicted} [{rep.tag}]")


def cmd_verify(paths: Iterable[str], max_vertices: int | None = None,
               strict: bool = False) -> tuple[list[VerifyRow], int]:
    rows = [verify_path(p, max_vertices) for p in paths]
    bad = any(r.status == "FAIL" or (strict and r.status == "REFUSED") for r in rows)
    return rows, 1 if bad else 0


# -- seed sweeps -------------------------------------------------------------------

@dataclass
class ExperimentSpec:
    name: str
    algorithm: str
    generator: str                          # gnp, regular, file, or a family name
    seeds: list[int]
    sizes: list[int] = field(default_factory=list)
    gen_params: dict[str, Any] = field(default_factory=dict)
    algo_params: dict[str, Any] = field(default_factory=dict)
    knowledge: str | None = None
    bandwidth: str | None = None            # "LOCAL" or "CONGEST" / "CONGEST:c"
    round_cap: int | None = None
    oracle: bool = False
    max_vertices: int | None = None
    out: str | None = None

    def validate(self) -> None:
        entry = algos.get(self.algorithm)
        entry.check_params(self.algo_params)
        if not self.seeds:
            raise ExperimentError("the seed list is empty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ExperimentError("seeds must be distinct")
        if self.generator not in RANDOM_GRAPHS + ("file",) and self.generator not in FAMILIES:
            raise ExperimentError(f"unknown generator {self.generator!r}")
        if self.generator == "file" and not self.gen_params.get("path"):
            raise ExperimentError("generator 'file' needs a path")
        if self.generator in RANDOM_GRAPHS and not (self.sizes or self.gen_params.get("n")):
            raise ExperimentError(f"generator {self.generator!r} needs sizes")
        self._models()

    def _models(self) -> tuple[Knowledge, Bandwidth]:
        entry = algos.get(self.algorithm)
        kn = Knowledge(self.knowledge) if self.knowledge else entry.knowledge
        bw = entry.bandwidth
        if self.bandwidth:
            kind, _, c = self.bandwidth.partition(":")
            if kind == "LOCAL":
                bw = Bandwidth.local()
            elif kind == "CONGEST":
                bw = Bandwidth.congest(int(c) if c else 8)
            else:
                raise ExperimentError(f"unknown bandwidth model {self.bandwidth!r}")
        return kn, bw

    def scale_points(self) -> list[int | None]:
        if self.generator in RANDOM_GRAPHS:
            return list(self.sizes) or [int(self.gen_params["n"])]
        return [None]

    def config_hash(self) -> str:
        body = {k: v for k, v in asdict(self).items() if k not in ("out", "seeds")}
        text = json.dumps(body, sort_keys=True, default=str)
        return hashlib.sha256(text.encode()).hexdigest()[:12]

    @classmethod
    def from_mapping(cls, data: dict[str, Any]) -> "ExperimentSpec":
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(data) - known)
        if unknown:
            raise ExperimentError("unknown experiment key(s): " + ", ".join(unknown))
        try:
            spec = cls(**data)
        except TypeError as exc:
            raise ExperimentError(str(exc)) from None
        spec.seeds = [int(s) for s in spec.seeds]
        spec.sizes = [int(s) for s in spec.sizes]
        return spec


@dataclass
class ResultRow:
    name: str
    seed: int
    n: int
    m: int
    params: str
    messages: int | str
    bits: int | str
    rounds: int | str
    size: int | str
    opt: int | str = ""
    ratio: str = ""
    valid: int = 0
    failed: int = 0

    def as_list(self) -> list:
        return [getattr(self, c) for c in CSV_COLUMNS]


def _graph_for(spec: ExperimentSpec, n: int | None, seed: int) -> PortGraph:
    if spec.generator == "file":
        return read_graph(spec.gen_params["path"])
    if spec.generator in RANDOM_GRAPHS:
        return random_graph(spec.generator, {**spec.gen_params, "n": n}, seed)
    return build_instance(spec.generator, {**spec.gen_params, "seed": seed}).graph


def run_one(spec: ExperimentSpec, n: int | None, seed: int) -> ResultRow:
    entry = algos.get(spec.algorithm)
    kn, bw = spec._models()
    g = _graph_for(spec, n, seed)
    params = dict(spec.algo_params)
    if spec.algorithm == "greedy-mis" and "p" not in params and spec.generator == "gnp":
        params["p"] = edge_probability(g.n, spec.gen_params)
    problem = algos.problem_of(entry, params)
    meta = {"schema": SCHEMA_VERSION, "config": spec.config_hash(),
            "algorithm": spec.algorithm, "generator": spec.generator,
            "gen": {k: v for k, v in spec.gen_params.items() if v is not None},
            "algo": params, "problem": problem, "knowledge": kn.value, "bandwidth": str(bw)}
    row = ResultRow(spec.name, seed, g.n, g.m, json.dumps(meta, sort_keys=True, default=str),
                    "", "", "", "")
    try:
        res, out = algos.run_algorithm(spec.algorithm, g, params, seed, kn, bw, spec.round_cap)
    except BandwidthViolation as exc:
        row.failed = 1
        row.params = json.dumps({**meta, "error": str(exc)}, sort_keys=True, default=str)
        return row
    row.messages, row.bits, row.rounds = res.messages, res.bits, res.rounds
    row.size = out.solution.size
    row.valid = int(not out.issues)
    row.failed = int(out.failed)
    if spec.oracle:
        try:
            opt = solve(g, problem, spec.max_vertices).size
        except OracleRefusal:
            opt = None
        if opt is not None:
            row.opt = opt
            row.ratio = f"{row.size / opt:.6f}" if opt else ("1.000000" if row.size == 0 else "inf")
    return row


def _run_task(task):
    spec, n, seed = task
    return run_one(spec, n, seed)


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ExperimentError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from None


def iter_rows(spec: ExperimentSpec, workers: int | None = None) -> Iterator[ResultRow]:
    """Rows in (scale point, seed) order regardless of the worker count."""
    spec.validate()
    tasks = [(spec, n, s) for n in spec.scale_points() for s in spec.seeds]
    workers = worker_count() if workers is None else workers
    if workers <= 1 or len(tasks) == 1:
        for t in tasks:
            yield _run_task(t)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(_run_task, tasks)


def format_row(row: ResultRow) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerow(row.as_list())
    return buf.getvalue()


def cmd_run(spec: ExperimentSpec, out: str | os.PathLike | None = None,
            workers: int | None = None) -> list[ResultRow]:
    """Run the sweep, appending one CSV line per finished run to ``out``."""
    out = out or spec.out
    rows = []
    fh = None
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        fresh = not Path(out).exists() or Path(out).stat().st_size == 0
        fh = open(out, "a", encoding="utf-8", newline="")
        if fresh:
            fh.write(",".join(CSV_COLUMNS) + "\n")
            fh.flush()
    try:
        for row in iter_rows(spec, workers):
            rows.append(row)
            if fh:
                fh.write(format_row(row))    # one write per row
                fh.flush()
    finally:
        if fh:
            fh.close()
    return rows


def read_rows(path: str | os.PathLike) -> list[dict[str, str]]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


# -- scaling fits ------------------------------------------------------------------

MODELS = {
    "n": lambda n: n,
    "n*log^2": lambda n: n * math.log(n) ** 2,
    "n^2": lambda n: n ** 2,
    "n^3": lambda n: n ** 3,
}


@dataclass
class ScalingFit:
    model: str
    exponent: float            # slope of log(messages) against log(n)
    intercept: float
    model_constant: float      # c in messages ~ c * model(n)
    points: list[tuple[int, float, float]]   # (n, mean messages, fitted by the model)

    def to_json(self) -> dict:
        return asdict(self)


def fit_scaling(points: Iterable[tuple[int, float]], model: str = "n") -> ScalingFit:
    if model not in MODELS:
        raise ExperimentError(f"unknown model {model!r}; choose from {', '.join(MODELS)}")
    by_n: dict[int, list[float]] = {}
    for n, msgs in points:
        by_n.setdefault(int(n), []).append(float(msgs))
    ns = sorted(by_n)
    if len(ns) < 3:
        raise ExperimentError(f"a scaling fit needs at least 3 distinct sizes, got {len(ns)}")
    means = np.array([np.mean(by_n[n]) for n in ns])
    if np.any(means <= 0):
        raise ExperimentError("message counts must be positive for a log-log fit")
    x = np.log(np.array(ns, dtype=float))
    y = np.log(means)
    slope, icpt = np.polyfit(x, y, 1)
    f = np.array([MODELS[model](n) for n in ns], dtype=float)
    const = float(np.exp(np.mean(y - np.log(f))))
    pts = [(n, float(m), float(const * fv)) for n, m, fv in zip(ns, means, f)]
    return ScalingFit(model, float(slope), float(icpt), const, pts)


def cmd_scaling_report(csv_path: str | os.PathLike, model: str = "n",
                       name: str | None = None) -> ScalingFit:
    rows = read_rows(csv_path)
    pts = [(int(r["n"]), float(r["messages"])) for r in rows
           if r["messages"] not in ("", None) and (name is None or r["name"] == name)]
    return fit_scaling(pts, model)
