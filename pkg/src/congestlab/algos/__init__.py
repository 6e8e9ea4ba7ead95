"""Distributed algorithms and the name-keyed registry used by the CLI."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable

from ..graph import PortGraph
from ..oracles import Solution
from ..sim import CONGEST, Bandwidth, Knowledge, SimResult, run
from .ballgrow import BallGrowConfig, ball_program
from .gather import gather_program
from .greedy_mis import MisPhaseConfig, is_mis, mis_program, mis_set, run_failed
from .matching import (ProposeConfig, RotationConfig, matching_from_ports,
                       propose_program, RotationProgram)


class RegistryError(KeyError):
    pass


@dataclass
class Outcome:
    problem: str
    solution: Solution
    issues: list[str]
    failed: bool


def mis_derived_solutions(g: PortGraph, mis: set[int]) -> dict[str, Solution]:
    """An MIS is an independent set, a dominating set, and its complement is
    a vertex cover."""
    if not is_mis(g, set(mis)):
        raise ValueError("input is not a maximal independent set")
    s = frozenset(mis)
    rest = frozenset(range(g.n)) - s
    return {"MaxIS": Solution("MaxIS", s, len(s)),
            "MDS": Solution("MDS", s, len(s)),
            "MVC": Solution("MVC", rest, len(rest))}


def _members(problem: str, flags) -> Solution:
    s = frozenset(v for v, f in enumerate(flags) if f)
    return Solution(problem, s, len(s))


def _finish(problem: str, g: PortGraph, sol: Solution, failed: bool,
            extra: list[str] | None = None) -> Outcome:
    return Outcome(problem, sol, list(extra or []) + sol.check(g), failed)


# -- builders: (graph, params) -> (factory, round cap) --------------------------

def _ball_build(g, params):
    cfg = BallGrowConfig(params["problem"], Fraction(str(params.get("eps", "1/2"))),
                         params.get("radius_cap"))
    return ball_program(cfg), 10**9


def _ball_extract(g, res, params):
    problem = params["problem"]
    failed = res.timed_out or res.stalled or any(o.failed for o in res.outputs)
    vals = [o.value for o in res.outputs]
    if problem == "MaxM":
        sol, issues = matching_from_ports(g, vals)
        return Outcome(problem, sol, issues, failed)
    return _finish(problem, g, _members(problem, vals), failed)


def _mis_config(g, params) -> MisPhaseConfig:
    p = params.get("p")
    if p is None:
        p = 2 * g.m / (g.n * (g.n - 1)) if g.n > 1 else 1.0
    kw = {k: params[k] for k in ("q_const", "iterations_per_phase", "t_mis_const") if k in params}
    return MisPhaseConfig(g.n, min(1.0, float(p)), **kw)


def _mis_build(g, params):
    cfg = _mis_config(g, params)
    return mis_program(cfg), cfg.round_cap()


def _mis_extract(g, res, params):
    problem = params.get("problem", "MaxIS")
    mis = mis_set(res)
    failed = run_failed(res)
    if not is_mis(g, mis):
        return Outcome(problem, Solution(problem, frozenset(mis), len(mis)),
                       ["output is not a maximal independent set"], failed)
    return _finish(problem, g, mis_derived_solutions(g, mis)[problem], failed)


def _propose_build(g, params):
    cfg = ProposeConfig(alpha=params.get("alpha"), r=float(params.get("r", 1.0)),
                        degree_exchange=bool(params.get("degree_exchange", False)))
    cfg.resolved_alpha()
    return propose_program(cfg), 4


def _propose_extract(g, res, params):
    sol, issues = matching_from_ports(g, res.outputs)
    return Outcome("MaxM", sol, issues, res.timed_out or res.stalled)


def _rotation_build(g, params):
    cfg = RotationConfig(g.n, float(params.get("budget_const", 4.0)))
    return (lambda: RotationProgram(cfg)), cfg.round_cap()


def _rotation_extract(g, res, params):
    sol, issues = matching_from_ports(g, res.outputs)
    failed = res.timed_out or res.stalled or sol.size < g.n // 2
    return Outcome("MaxM", sol, issues, failed)


def _gather_build(g, params):
    return gather_program(params["problem"]), 10**9


def _gather_extract(g, res, params):
    problem = params["problem"]
    failed = res.timed_out or res.stalled
    if problem == "MaxM":
        sol, issues = matching_from_ports(g, res.outputs)
        return Outcome(problem, sol, issues, failed)
    return _finish(problem, g, _members(problem, res.outputs), failed)


@dataclass(frozen=True)
class AlgorithmEntry:
    name: str
    knowledge: Knowledge
    bandwidth: Bandwidth
    required: tuple[str, ...]
    optional: tuple[str, ...]
    build: Callable[[PortGraph, dict], tuple[Callable, int]]
    extract: Callable[[PortGraph, SimResult, dict], Outcome]
    problems: tuple[str, ...]

    def check_params(self, params: dict[str, Any]) -> None:
        missing = [k for k in self.required if k not in params]
        if missing:
            raise RegistryError(f"{self.name} needs parameter(s): {', '.join(missing)}")
        unknown = sorted(set(params) - set(self.required) - set(self.optional))
        if unknown:
            raise RegistryError(f"{self.name} does not accept: {', '.join(unknown)}")
        prob = params.get("problem")
        if prob is not None and prob not in self.problems:
            raise RegistryError(f"{self.name} solves {', '.join(self.problems)}, not {prob}")


REGISTRY: dict[str, AlgorithmEntry] = {e.name: e for e in (
    AlgorithmEntry("ball-growing", Knowledge.KT0, CONGEST, ("problem",),
                   ("eps", "radius_cap"), _ball_build, _ball_extract,
                   ("MaxIS", "MDS", "MVC", "MaxM")),
    AlgorithmEntry("greedy-mis", Knowledge.KT0, CONGEST, (),
                   ("p", "problem", "q_const", "iterations_per_phase", "t_mis_const"),
                   _mis_build, _mis_extract, ("MaxIS", "MDS", "MVC")),
    AlgorithmEntry("propose-matching", Knowledge.KT0, CONGEST, (),
                   ("alpha", "r", "degree_exchange", "problem"),
                   _propose_build, _propose_extract, ("MaxM",)),
    AlgorithmEntry("rotation-matching", Knowledge.KT0, CONGEST, (),
                   ("budget_const", "problem"), _rotation_build, _rotation_extract, ("MaxM",)),
    AlgorithmEntry("gather-all", Knowledge.KT0, CONGEST, ("problem",), (),
                   _gather_build, _gather_extract, ("MaxIS", "MDS", "MVC", "MaxM")),
)}


def get(name: str) -> AlgorithmEntry:
    try:
        return REGISTRY[name]
    except KeyError:
        raise RegistryError(f"unknown algorithm {name!r}; choose from "
                            f"{', '.join(sorted(REGISTRY))}") from None


def problem_of(entry: AlgorithmEntry, params: dict) -> str:
    return params.get("problem", entry.problems[0])


def run_algorithm(name: str, g: PortGraph, params: dict | None = None, seed: int = 0,
                  knowledge: Knowledge | None = None, bandwidth: Bandwidth | None = None,
                  round_cap: int | None = None) -> tuple[SimResult, Outcome]:
    """Build, simulate and extract one registered algorithm on ``g``."""
    entry = get(name)
    params = dict(params or {})
    entry.check_params(params)
    factory, cap = entry.build(g, params)
    res = run(g, factory, knowledge or entry.knowledge, bandwidth or entry.bandwidth,
              seed=seed, round_cap=round_cap or cap, params=params)
    return res, entry.extract(g, res, params)
