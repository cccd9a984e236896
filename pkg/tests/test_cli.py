import json
import os

import numpy as np
import pytest

from assouadlab import pointset
from assouadlab.cli import main
from assouadlab.cmaps import apply_map, parse_map
from assouadlab.dimension import EstimatorParams, estimate_spectrum
from assouadlab.pointset import load, normalize


def run(*argv):
    return main(list(argv))


def test_gen_writes_point_file(tmp_path):
    out = tmp_path / "f1.csv"
    assert run("gen", "--set", "seq:1", "--count", "500", "-o", str(out)) == 0
    E = load(out)
    assert len(E) == 501
    assert E.points[0] == 1.0 + 0.0j


def test_gen_natural_size_for_grid(tmp_path):
    out = tmp_path / "g.csv"
    assert run("gen", "--set", "grid:9", "-o", str(out)) == 0
    assert len(load(out)) == 81


def test_gen_requires_count_for_sequences(tmp_path, capsys):
    assert run("gen", "--set", "seq:1", "-o", str(tmp_path / "x.csv")) == 2
    assert "count" in capsys.readouterr().err


def test_map_squares_points(tmp_path):
    f1 = tmp_path / "f1.csv"
    f2 = tmp_path / "f2.csv"
    run("gen", "--set", "seq:1", "--count", "100", "-o", str(f1))
    assert run("map", "--map", "pow(2)", "-i", str(f1), "-o", str(f2)) == 0
    src = load(f1)
    img = load(f2)
    assert np.array_equal(np.sort(img.points.real), np.sort(src.points.real**2))


def test_map_bad_expression_exits_two(tmp_path, capsys):
    f1 = tmp_path / "f1.csv"
    run("gen", "--set", "seq:1", "--count", "10", "-o", str(f1))
    assert run("map", "--map", "warp(3)", "-i", str(f1), "-o", str(tmp_path / "o.csv")) == 2
    assert "error" in capsys.readouterr().err


def test_missing_input_exits_two(capsys):
    assert run("dim", "-i", "/nonexistent/path.csv") == 2


def test_dim_json_output(tmp_path, capsys):
    f1 = tmp_path / "f1.csv"
    run("gen", "--set", "seq:1", "--count", "2000", "-o", str(f1))
    assert run("dim", "-i", str(f1), "--json", "--no-timestamp",
               "--centers", "256", "--m-max", "18") == 0
    d = json.loads(capsys.readouterr().out)
    assert 0.85 <= d["value"] <= 1.0
    assert d["params"]["n_centers"] == 256
    assert "timestamp" not in d


def test_spectrum_single_theta_pipeline_matches_library(tmp_path, capsys):
    f1 = tmp_path / "f1.csv"
    f2 = tmp_path / "f2.csv"
    run("gen", "--set", "seq:1", "--count", "2000", "-o", str(f1))
    run("map", "--map", "pow(2)", "-i", str(f1), "-o", str(f2))
    assert run("spectrum", "-i", str(f2), "--theta", "0.5:0.5:0.5",
               "--centers", "256", "--m-max", "18", "--no-timestamp") == 0
    rows = [l for l in capsys.readouterr().out.splitlines() if not l.startswith("#")]
    got = float(rows[1].split(",")[1])

    params = EstimatorParams(n_centers=256, m_max=18)
    img = apply_map(parse_map("pow(2)"), pointset.load(f1))
    imgn, _ = normalize(img)
    want = estimate_spectrum(imgn, [0.5], params).samples[0].alpha
    assert got == want


def test_cli_byte_determinism(tmp_path, capsys):
    f1 = tmp_path / "f1.csv"
    run("gen", "--set", "geom:0.5", "--count", "64", "-o", str(f1))
    outs = []
    for _ in range(2):
        assert run("spectrum", "-i", str(f1), "--theta", "0.25:0.75:0.25",
                   "--centers", "128", "--no-timestamp") == 0
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1]


def test_theta_grammar_errors(tmp_path, capsys):
    f1 = tmp_path / "f1.csv"
    run("gen", "--set", "seq:1", "--count", "50", "-o", str(f1))
    assert run("spectrum", "-i", str(f1), "--theta", "0.5") == 2
    assert run("spectrum", "-i", str(f1), "--theta", "0.9:0.1:0.1") == 2


def test_config_file_merging_flag_precedence(tmp_path, capsys):
    f1 = tmp_path / "f1.csv"
    cfg = tmp_path / "cfg.json"
    run("gen", "--set", "seq:1", "--count", "300", "-o", str(f1))
    cfg.write_text(json.dumps({"n_centers": 64, "m_max": 12}))
    assert run("dim", "-i", str(f1), "--json", "--no-timestamp",
               "--config", str(cfg), "--m-max", "14") == 0
    d = json.loads(capsys.readouterr().out)
    assert d["params"]["n_centers"] == 64  # from config
    assert d["params"]["m_max"] == 14  # flag overrides config


def test_threads_env_fallback(tmp_path, capsys, monkeypatch):
    f1 = tmp_path / "f1.csv"
    run("gen", "--set", "seq:1", "--count", "100", "-o", str(f1))
    monkeypatch.setenv("ASSOUADLAB_THREADS", "1")
    assert run("dim", "-i", str(f1), "--json", "--no-timestamp",
               "--centers", "64", "--m-max", "10") == 0
    d = json.loads(capsys.readouterr().out)
    assert d["params"]["threads"] == 1


def test_refine_command_schedule(tmp_path, capsys):
    assert run("refine", "--map", "pow(2)", "--alpha", "1", "--p", "10",
               "--Rprime", "0.125", "--jmax", "3", "--no-timestamp") == 0
    d = json.loads(capsys.readouterr().out)
    assert d["schedule"]["d"] == 2
    assert d["schedule"]["j0"] == 1
    assert [r["j"] for r in d["runs"]] == [1, 2, 3]
    assert all(r["total_minors"] >= 1 for r in d["runs"])


def test_porosity_command(tmp_path, capsys):
    f1 = tmp_path / "c.csv"
    run("gen", "--set", "cantor:0.33:6", "-o", str(f1))
    assert run("porosity", "-i", str(f1), "--no-timestamp") == 0
    d = json.loads(capsys.readouterr().out)
    assert d["verdict"] == "porous"
    assert "witnesses" not in d
    assert run("porosity", "-i", str(f1), "--witnesses", "--no-timestamp") == 0
    d = json.loads(capsys.readouterr().out)
    assert len(d["witnesses"]) > 0


def test_verify_counterexamples_exit_zero(tmp_path, capsys):
    out = tmp_path / "rep.json"
    csv = tmp_path / "rep.csv"
    assert run("verify", "--suite", "counterexamples", "-o", str(out),
               "--csv", str(csv), "--no-timestamp") == 0
    d = json.loads(out.read_text())
    verdicts = {r["row"]: r["verdict"] for r in d["reports"]}
    assert verdicts["neglog:geom_e"] == "EXPECTED-VIOLATION"
    assert csv.read_text().splitlines()[0] == (
        "suite,row,alpha_src,bound,alpha_img,slack,verdict"
    )


def test_usage_error_exit_two():
    with pytest.raises(SystemExit) as exc:
        run("verify", "--suite", "bogus")
    assert exc.value.code == 2
