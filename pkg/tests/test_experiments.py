import csv
import json
import math
import statistics

import pytest

from congestlab.experiments import (CSV_COLUMNS, FAMILIES, ExperimentError, ExperimentSpec,
                                    build_instance, cmd_generate, cmd_run, cmd_scaling_report,
                                    cmd_verify, edge_probability, fit_scaling, read_rows,
                                    run_one, worker_count)
from congestlab.lbgraphs import eligible_crossings, mds_fixed_member


def test_generate_mvc_exact_and_idempotent(tmp_path):
    out = tmp_path / "a.pg"
    (path,) = cmd_generate("mvc-exact", {"k": 2, "l": 2, "x": "ffff", "y": "ffff"}, out)
    side = json.loads(open(path + ".json").read())
    assert side["predicted"]["value"] == 8 and side["predicted"]["comparator"] == "="
    assert open(path).readline().split()[1] == "16"
    first = (open(path, "rb").read(), open(path + ".json", "rb").read())
    cmd_generate("mvc-exact", {"k": 2, "l": 2, "x": "ffff", "y": "ffff"}, out)
    assert (open(path, "rb").read(), open(path + ".json", "rb").read()) == first


def test_generate_errors(tmp_path):
    with pytest.raises(ExperimentError, match="k must be a power of 2"):
        cmd_generate("mvc-exact", {"k": 3, "l": 2}, tmp_path / "x.pg")
    with pytest.raises(ExperimentError):
        cmd_generate("nope", {}, tmp_path / "x.pg")
    with pytest.raises(ExperimentError):
        cmd_generate("gnp", {"n": 10}, tmp_path / "x.pg")


def test_every_family_builds():
    params = {"mvc-exact": {"k": 2, "l": 2}, "mds-exact": {"k": 2, "l": 2},
              "mds-crossing": {"n": 3}, "mds-fixed": {"n": 4},
              "mds-crossed": {"n": 4, "i": 1, "j": 1, "p": 3, "q": 4},
              "mvc-base": {"t": 4, "c": 1}, "maxis-base": {"t": 3, "eps": "1/3"},
              "maxm": {"n": 14, "eps": "1/2"}}
    assert set(params) == set(FAMILIES)
    for fam, p in params.items():
        assert build_instance(fam, p).graph.n > 0


def test_verify_mds_batch(tmp_path):
    paths = cmd_generate("mds-exact", {"k": 2, "l": 2, "seed": 100}, tmp_path / "mds.pg", count=32)
    assert len(paths) == 32 and paths[0].endswith("mds-000.pg")
    rows, code = cmd_verify(paths)
    assert code == 0 and all(r.status == "PASS" for r in rows)


def test_verify_fixed_member_and_crossings(tmp_path):
    base = cmd_generate("mds-fixed", {"n": 4}, tmp_path / "fixed.pg")
    inst = mds_fixed_member(4)
    pairs = [(i, j, p, q) for i in range(1, 5) for j in (i, i % 4 + 1)
             for p, q in eligible_crossings(inst, i, j)][:10]
    assert len(pairs) == 10
    crossed = []
    for idx, (i, j, p, q) in enumerate(pairs):
        crossed += cmd_generate("mds-crossed", {"n": 4, "i": i, "j": j, "p": p, "q": q},
                                tmp_path / f"c{idx}.pg")
    rows, code = cmd_verify(base + crossed, max_vertices=40)
    assert code == 0
    assert "optimum 5" in rows[0].detail or "optimum 6" in rows[0].detail
    assert all(r.status == "PASS" and "<= 4" in r.detail for r in rows[1:])


def test_verify_corrupted_sidecar(tmp_path):
    (path,) = cmd_generate("mvc-exact", {"k": 2, "l": 2, "x": "ffff", "y": "ffff"},
                           tmp_path / "c.pg")
    side = json.loads(open(path + ".json").read())
    side["predicted"]["value"] = 7
    side["y"] = "0"
    with open(path + ".json", "w") as fh:
        json.dump(side, fh)
    (row,), code = cmd_verify([path])
    assert code == 1 and row.status == "FAIL"
    assert "predicted" in row.detail and "missing" in row.detail


def test_verify_refusal_and_strict(tmp_path):
    paths = cmd_generate("mds-fixed", {"n": 4}, tmp_path / "f.pg")
    rows, code = cmd_verify(paths)              # 26 vertices, fine
    assert code == 0
    big = cmd_generate("mds-fixed", {"n": 6}, tmp_path / "g.pg")   # 38 > 30
    rows, code = cmd_verify(big)
    assert rows[0].status == "REFUSED" and code == 0
    assert cmd_verify(big, strict=True)[1] == 1


def test_verify_skips_random_graphs(tmp_path):
    paths = cmd_generate("gnp", {"n": 10, "p": 0.3}, tmp_path / "r.pg")
    rows, code = cmd_verify(paths)
    assert rows[0].status == "SKIP" and code == 0


def spec(**kw):
    base = dict(name="t", algorithm="propose-matching", generator="regular",
                seeds=[0, 1, 2], sizes=[20], gen_params={"d": 3})
    base.update(kw)
    return ExperimentSpec(**base)


def test_spec_validation():
    with pytest.raises(ExperimentError, match="empty"):
        spec(seeds=[]).validate()
    with pytest.raises(ExperimentError):
        spec(seeds=[1, 1]).validate()
    with pytest.raises(ExperimentError):
        spec(generator="nope").validate()
    with pytest.raises(KeyError):
        spec(algorithm="nope").validate()
    with pytest.raises(ExperimentError):
        spec(bandwidth="FAST").validate()
    with pytest.raises(ExperimentError):
        ExperimentSpec.from_mapping({"name": "x", "bogus": 1})


def test_run_rows_schema_and_determinism(tmp_path):
    out = tmp_path / "r.csv"
    s = spec(oracle=True)
    rows = cmd_run(s, out)
    cmd_run(s, out)
    text = out.read_text().splitlines()
    assert text[0] == ",".join(CSV_COLUMNS)
    assert len(text) == 7 and text[1:4] == text[4:7]
    got = read_rows(out)
    assert all(r["valid"] == "1" and r["ratio"] != "" for r in got)
    meta = json.loads(got[0]["params"])
    assert meta["schema"] == 1 and meta["config"] == s.config_hash()
    assert len(rows) == 3


def test_ratio_only_with_oracle():
    row = run_one(spec(), 20, 0)
    assert row.opt == "" and row.ratio == "" and row.valid == 1


def test_parallel_equals_serial(monkeypatch):
    s = spec(seeds=list(range(6)), sizes=[16, 24])
    serial = [r.as_list() for r in cmd_run(s, workers=1)]
    parallel = [r.as_list() for r in cmd_run(s, workers=3)]
    assert serial == parallel
    monkeypatch.setenv("CONGESTLAB_WORKERS", "2")
    assert worker_count() == 2
    assert [r.as_list() for r in cmd_run(s)] == serial
    monkeypatch.setenv("CONGESTLAB_WORKERS", "x")
    with pytest.raises(ExperimentError):
        worker_count()


def test_bandwidth_violation_becomes_flagged_row():
    s = spec(algorithm="gather-all", generator="gnp", gen_params={"p": 0.5},
             algo_params={"problem": "MaxIS"}, bandwidth="CONGEST:1", seeds=[0])
    (row,) = cmd_run(s)
    assert row.failed == 1 and row.valid == 0 and "error" in json.loads(row.params)


def test_timeout_becomes_flagged_row():
    s = spec(algorithm="gather-all", generator="gnp", gen_params={"p": 0.5},
             algo_params={"problem": "MaxIS"}, round_cap=3, seeds=[0])
    (row,) = cmd_run(s)
    assert row.failed == 1


def test_file_and_family_generators(tmp_path):
    (path,) = cmd_generate("gnp", {"n": 12, "p": 0.4, "seed": 3}, tmp_path / "g.pg")
    rows = cmd_run(ExperimentSpec("f", "gather-all", "file", [0], gen_params={"path": path},
                                  algo_params={"problem": "MDS"}, oracle=True))
    assert rows[0].ratio == "1.000000"
    rows = cmd_run(ExperimentSpec("b", "ball-growing", "mvc-base", [0, 1],
                                  gen_params={"t": 4, "c": 1}, algo_params={"problem": "MVC"},
                                  oracle=True))
    assert all(float(r.ratio) <= 1.5 for r in rows)


def test_propose_matching_ratio_on_cubic_graph():
    s = ExperimentSpec("pm", "propose-matching", "regular", list(range(500)), sizes=[60],
                       gen_params={"d": 3}, algo_params={"alpha": 0.5}, oracle=True)
    rows = cmd_run(s, workers=4)
    assert all(r.valid == 1 for r in rows)
    ratios = [float(r.ratio) for r in rows]
    mean = statistics.fmean(ratios)
    sd = statistics.stdev(ratios)
    assert mean >= 1 / 8 - 3 * sd / math.sqrt(len(ratios))


def test_edge_probability():
    assert edge_probability(100, {"p": 0.2}) == 0.2
    assert edge_probability(100, {"c": 2}) == pytest.approx(2 * math.log(100) / 100)
    assert edge_probability(128, {"c": 40}) == 1.0


def test_scaling_fit_exact_power_law():
    pts = [(n, 3.0 * n ** 2) for n in (10, 20, 40, 80) for _ in range(3)]
    fit = fit_scaling(pts, "n^2")
    assert fit.exponent == pytest.approx(2.0)
    assert fit.model_constant == pytest.approx(3.0)
    assert [p[0] for p in fit.points] == [10, 20, 40, 80]
    assert all(p[1] == pytest.approx(p[2]) for p in fit.points)


def test_scaling_fit_errors(tmp_path):
    with pytest.raises(ExperimentError):
        fit_scaling([(10, 5.0)])
    with pytest.raises(ExperimentError):
        fit_scaling([(10, 5.0), (20, 9.0)])
    with pytest.raises(ExperimentError):
        fit_scaling([(10, 5.0), (20, 9.0), (30, 12.0)], "n^4")


def test_scaling_report_from_csv(tmp_path):
    out = tmp_path / "s.csv"
    s = spec(algorithm="gather-all", generator="gnp", gen_params={"p": 0.5}, seeds=[0, 1],
             sizes=[8, 12, 16, 20], algo_params={"problem": "MaxIS"})
    cmd_run(s, out)
    fit = cmd_scaling_report(out, "n^3", name="t")
    assert 2.0 < fit.exponent < 3.6
    with pytest.raises(ExperimentError):
        cmd_scaling_report(out, "n", name="other")
    with open(out, newline="") as fh:
        assert len(list(csv.reader(fh))) == 9
