import math
from fractions import Fraction

import pytest

import brute
from congestlab.algos import (REGISTRY, RegistryError, get, mis_derived_solutions,
                              run_algorithm)
from congestlab.algos.ballgrow import BallGrowConfig, ball_program
from congestlab.algos.greedy_mis import (MisPhaseConfig, is_mis, mis_program, mis_set,
                                         run_failed, sequential_replay)
from congestlab.algos.matching import (ProposeConfig, RotationConfig, RotationProgram,
                                       matching_from_ports, propose_program)
from congestlab.graph import (PortGraph, assign_ids, assign_ports, complete_graph, cycle_graph,
                              empty_graph, gen_gnp, path_graph, random_regular, star_graph)
from congestlab.lbgraphs import mvc_base_graph
from congestlab.oracles import solve
from congestlab.sim import LOCAL, run

PROBLEMS = ("MaxIS", "MDS", "MVC", "MaxM")
PACKING = ("MaxIS", "MaxM")


def shuffled(g, seed):
    return assign_ports(assign_ids(g, seed), seed + 1)


def within(problem, size, opt, eps):
    if problem in PACKING:
        return size * (1 + eps) >= opt
    return size <= (1 + eps) * opt


# -- ball growing ----------------------------------------------------------------

def test_ball_star_maxis_takes_the_leaves():
    g = shuffled(star_graph(8), 1)
    res, out = run_algorithm("ball-growing", g, {"problem": "MaxIS", "eps": "1/2"})
    assert not out.issues and not out.failed
    assert out.solution.witness == frozenset(range(1, 9))


def test_ball_c6_mds():
    g = shuffled(cycle_graph(6), 2)
    _, out = run_algorithm("ball-growing", g, {"problem": "MDS", "eps": "1/2"})
    assert not out.issues and out.solution.size <= 3


@pytest.mark.parametrize("seed", range(4))
def test_ball_gnp30_maxis(seed):
    g = shuffled(gen_gnp(30, 0.2, seed), seed)
    res, out = run_algorithm("ball-growing", g, {"problem": "MaxIS", "eps": "1/2"}, seed=seed)
    alpha = solve(g, "MaxIS").size
    assert not out.issues and not out.failed
    assert out.solution.size >= math.ceil(alpha / 1.5)
    assert res.messages <= 64 * g.n ** 2 * math.log2(g.n) / 0.5


@pytest.mark.parametrize("problem", PROBLEMS)
@pytest.mark.parametrize("seed", range(3))
def test_ball_ratio_all_problems(problem, seed):
    g = shuffled(gen_gnp(24, 0.15, 50 + seed), seed)
    eps = Fraction(1, 2)
    res, out = run_algorithm("ball-growing", g, {"problem": problem, "eps": eps}, seed=seed)
    assert not out.issues and not out.failed and not res.stalled
    assert within(problem, out.solution.size, solve(g, problem).size, eps)


@pytest.mark.parametrize("problem", PROBLEMS)
def test_ball_small_eps_and_lb_members(problem):
    eps = Fraction(1, 4)
    for g in (shuffled(mvc_base_graph(8, 1).graph, 3), shuffled(path_graph(9), 4),
              shuffled(empty_graph(5), 5), complete_graph(1)):
        _, out = run_algorithm("ball-growing", g, {"problem": problem, "eps": eps})
        assert not out.issues
        assert within(problem, out.solution.size, solve(g, problem, 40).size, eps)


def test_ball_radii_bounded_by_cap():
    g = shuffled(gen_gnp(30, 0.1, 9), 9)
    for problem in PROBLEMS:
        cfg = BallGrowConfig(problem, Fraction(1, 2))
        res = run(g, ball_program(cfg))
        radii = [r for o in res.outputs for r in o.radii]
        assert radii and max(radii) <= cfg.cap(g.n)
        assert not any(o.failed for o in res.outputs)


def test_ball_cap_overrun_flags_failure_but_stays_valid():
    g = shuffled(path_graph(12), 1)
    _, out = run_algorithm("ball-growing", g, {"problem": "MaxIS", "radius_cap": 1,
                                               "eps": "1/10"})
    assert not out.issues
    assert out.failed


def test_ball_config_validation():
    with pytest.raises(ValueError):
        BallGrowConfig("TSP")
    with pytest.raises(ValueError):
        BallGrowConfig("MaxIS", Fraction(1))
    with pytest.raises(ValueError):
        BallGrowConfig("MaxIS", radius_cap=0)
    c = BallGrowConfig("MaxIS", Fraction(1, 2))
    assert c.cap(100) == math.ceil(math.log(100) / math.log(1.5))


# -- greedy MIS ----------------------------------------------------------------

def run_mis(g, p, seed=0, **kw):
    cfg = MisPhaseConfig(g.n, p, **kw)
    return run(g, mis_program(cfg), seed=seed, round_cap=cfg.round_cap())


def test_mis_empty_graph():
    g = empty_graph(10)
    res = run_mis(g, 0.5)
    assert mis_set(res) == set(range(10)) and not run_failed(res)


@pytest.mark.parametrize("n", [2, 5, 12])
def test_mis_complete_graph(n):
    res = run_mis(complete_graph(n), 1.0, seed=n)
    assert len(mis_set(res)) == 1 and not run_failed(res)


@pytest.mark.parametrize("seed", range(6))
def test_mis_valid_and_replays_sequential_greedy(seed):
    # sparse enough that several sampling phases run
    n = 300
    p = 0.3
    g = gen_gnp(n, p, seed)
    cfg = MisPhaseConfig(n, p, q_const=2.0)
    assert cfg.sampling_phases >= 2
    res = run(g, mis_program(cfg), seed=seed, round_cap=cfg.round_cap())
    s = mis_set(res)
    assert is_mis(g, s) and not run_failed(res)
    assert sequential_replay(g, res) == s


def test_mis_phase_schedule():
    cfg = MisPhaseConfig(1024, 0.02, q_const=1.0)
    assert cfg.q == pytest.approx(math.log(1024) / (0.02 * 1024))
    assert cfg.phase_count == math.ceil(math.log2(1 / cfg.q)) + 1
    assert cfg.activation_prob(0) == cfg.q
    assert cfg.activation_prob(cfg.iterations_per_phase) == pytest.approx(2 * cfg.q)
    assert cfg.activation_prob(cfg.iterations - 1) == 1.0
    assert cfg.t_mis == 40 * math.ceil(math.log(1024))
    assert MisPhaseConfig(1024, 40 * math.log(1024) / 1024).phase_count == 1


def test_mis_derived_solutions():
    g = cycle_graph(4)
    sols = mis_derived_solutions(g, {0, 2})
    assert sols["MVC"].witness == frozenset({1, 3})
    for sol in sols.values():
        assert sol.is_valid(g)
    with pytest.raises(ValueError):
        mis_derived_solutions(g, {0})
    with pytest.raises(ValueError):
        mis_derived_solutions(g, {0, 1})


@pytest.mark.parametrize("problem", ["MaxIS", "MDS", "MVC"])
def test_mis_registry_outputs_are_valid(problem):
    g = shuffled(gen_gnp(80, 0.1, 3), 3)
    _, out = run_algorithm("greedy-mis", g, {"p": 0.1, "problem": problem}, seed=3)
    assert not out.issues and not out.failed


@pytest.mark.slow
def test_mis_gnp1024_twenty_seeds():
    n = 1024
    p = 40 * math.log(n) / n
    target = math.log(n * p) / math.log(1 / (1 - p))
    msgs = []
    for seed in range(20):
        g = gen_gnp(n, p, 1000 + seed)
        res = run_mis(g, p, seed=seed)
        s = mis_set(res)
        assert is_mis(g, s) and not run_failed(res)
        for sol in mis_derived_solutions(g, s).values():
            assert sol.is_valid(g)
        assert 0.8 * target <= len(s) <= 1.25 * target
        msgs.append(res.messages)
    assert sum(msgs) / len(msgs) <= 50 * n * math.log(n) ** 2


# -- propose matching ---------------------------------------------------------

def test_propose_k2_probability():
    g = complete_graph(2)
    trials = 4000
    hits = 0
    for seed in range(trials):
        res = run(g, propose_program(ProposeConfig(alpha=0.5)), seed=seed)
        sol, issues = matching_from_ports(g, res.outputs)
        assert not issues and sol.size in (0, 1)
        hits += sol.size
    sigma = math.sqrt(trials * 0.75 * 0.25)
    assert abs(hits - 0.75 * trials) <= 3 * sigma


def test_propose_three_regular_mean():
    g = random_regular(16, 3, 4)
    trials = 2000
    sizes = []
    for seed in range(trials):
        res = run(g, propose_program(ProposeConfig(alpha=0.5)), seed=seed)
        sol, issues = matching_from_ports(g, res.outputs)
        assert not issues
        assert res.messages <= 3 * g.n and res.rounds <= 3
        sizes.append(sol.size)
    mean = sum(sizes) / trials
    sd = math.sqrt(sum((s - mean) ** 2 for s in sizes) / (trials - 1))
    assert mean >= 16 / 8 - 3 * sd / math.sqrt(trials)


def test_propose_silence_gives_empty_matching():
    g = gen_gnp(30, 0.3, 1)
    res = run(g, propose_program(ProposeConfig(alpha=0.0)))
    assert matching_from_ports(g, res.outputs)[0].size == 0 and res.messages == 0


def test_propose_degree_exchange_accounting():
    g = shuffled(gen_gnp(40, 0.2, 2), 2)
    for seed in range(20):
        res, out = run_algorithm("propose-matching", g, {"degree_exchange": True}, seed=seed)
        assert not out.issues
        assert res.messages <= 3 * g.n and res.rounds <= 4
        proposals = res.per_round.get(2, 0)
        accepts = res.per_round.get(3, 0)
        assert res.messages == res.per_round.get(1, 0) + proposals + accepts
        assert res.per_round[1] == g.n


def test_propose_default_alpha():
    assert ProposeConfig(r=2.0).resolved_alpha() == 0.25
    with pytest.raises(ValueError):
        ProposeConfig(alpha=1.5).resolved_alpha()


# -- rotation ------------------------------------------------------------------

def run_rotation(g, seed=0, budget_const=4.0):
    cfg = RotationConfig(g.n, budget_const)
    res = run(g, lambda: RotationProgram(cfg), seed=seed, round_cap=cfg.round_cap())
    sol, issues = matching_from_ports(g, res.outputs)
    return res, sol, issues


@pytest.mark.parametrize("seed", range(5))
def test_rotation_k4(seed):
    res, sol, issues = run_rotation(shuffled(complete_graph(4), seed), seed)
    assert not issues and sol.size == 2 and not res.timed_out


def test_rotation_odd_n():
    n = 257
    g = gen_gnp(n, min(1.0, 40 * math.log(n) / n), 3)
    res, sol, issues = run_rotation(g, 3)
    assert not issues and sol.size == (n - 1) // 2


def test_rotation_small_dense_graphs():
    for seed in range(5):
        g = shuffled(gen_gnp(40, 0.5, seed), seed)
        res, sol, issues = run_rotation(g, seed)
        assert not issues and sol.size == 20


def test_rotation_gnp256_success_rate():
    n = 256
    p = min(1.0, 40 * math.log(n) / n)
    wins = 0
    for seed in range(10):
        g = gen_gnp(n, p, 200 + seed)
        _, sol, issues = run_rotation(g, seed)
        assert not issues
        wins += sol.size == n // 2
    assert wins >= 9


def test_rotation_gnp256_message_budget():
    n = 256
    p = min(1.0, 40 * math.log(n) / n)
    worst = 0
    for seed in range(10):
        g = gen_gnp(n, p, 200 + seed)
        res, _, _ = run_rotation(g, seed)
        worst = max(worst, res.messages)
    assert worst <= 50 * n * math.log(n)


def test_rotation_budget_exhaustion_is_flagged():
    # a star has no Hamiltonian path beyond 3 nodes
    g = shuffled(star_graph(5), 1)
    res, out = run_algorithm("rotation-matching", g, {"budget_const": 0.5})
    assert not out.issues and out.failed and not res.timed_out


# -- gather-all ----------------------------------------------------------------

@pytest.mark.parametrize("seed", range(4))
def test_gather_matches_oracle(seed):
    g = shuffled(gen_gnp(12, 0.3, seed), seed)
    for problem in PROBLEMS:
        res, out = run_algorithm("gather-all", g, {"problem": problem}, seed=seed)
        assert not out.issues and not out.failed
        assert out.solution.size == solve(g, problem).size
        assert res.messages <= g.n * g.m + 2 * g.n ** 2


def test_gather_disconnected_and_single():
    res, out = run_algorithm("gather-all", complete_graph(1), {"problem": "MaxIS"})
    assert res.messages == 0 and out.solution.size == 1
    g = PortGraph.from_edges(7, [(0, 1), (1, 2), (3, 4), (5, 6)])
    for problem in PROBLEMS:
        _, out = run_algorithm("gather-all", g, {"problem": problem})
        assert not out.issues and out.solution.size == solve(g, problem).size


# -- registry -----------------------------------------------------------------

def test_registry_entries():
    assert set(REGISTRY) == {"ball-growing", "greedy-mis", "propose-matching",
                             "rotation-matching", "gather-all"}
    for e in REGISTRY.values():
        assert e.knowledge.value == "KT0" and e.bandwidth.kind == "CONGEST"
    with pytest.raises(RegistryError):
        get("nope")
    with pytest.raises(RegistryError):
        get("ball-growing").check_params({})
    with pytest.raises(RegistryError):
        get("ball-growing").check_params({"problem": "MaxIS", "bogus": 1})
    with pytest.raises(RegistryError):
        get("propose-matching").check_params({"problem": "MVC"})


@pytest.mark.parametrize("name,params", [
    ("ball-growing", {"problem": "MVC"}), ("greedy-mis", {}), ("propose-matching", {}),
    ("rotation-matching", {}), ("gather-all", {"problem": "MDS"})])
def test_registry_runs_deterministic(name, params):
    g = shuffled(gen_gnp(20, 0.4, 7), 7)
    a, oa = run_algorithm(name, g, params, seed=5)
    b, ob = run_algorithm(name, g, params, seed=5)
    assert (a.messages, a.rounds, a.outputs) == (b.messages, b.rounds, b.outputs)
    assert oa.solution == ob.solution and not oa.issues


def test_local_bandwidth_override():
    g = shuffled(gen_gnp(15, 0.3, 1), 1)
    res, out = run_algorithm("gather-all", g, {"problem": "MaxIS"}, bandwidth=LOCAL)
    assert not out.issues


def test_ball_mvc_on_base_graph_against_brute_force():
    inst = mvc_base_graph(4, 1, seed=2)
    _, out = run_algorithm("ball-growing", inst.graph, {"problem": "MVC"})
    opt = brute.smallest(inst.graph, brute.is_vc)
    assert not out.issues and out.solution.size <= 1.5 * opt
