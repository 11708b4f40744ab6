import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from psdcone.cli import RunConfig, main, run
from psdcone.configurations import GramMatrix, VectorConfig, gram, hexagon, pentagon
from psdcone.orthant import NonnegFactorization
from psdcone.realization import Realization


def read(path):
    with open(path) as fh:
        return json.load(fh)


@pytest.fixture
def hexagon_file(tmp_path):
    path = tmp_path / "hexagon.json"
    assert main(["demo", "hexagon", "--output", str(path)]) == 0
    return path


def test_demo_pentagon(tmp_path, capsys):
    out = tmp_path / "p.json"
    assert main(["demo", "pentagon", "--output", str(out)]) == 0
    obj = read(out)
    cfg = VectorConfig.from_json(obj)
    assert np.array_equal(cfg.vectors, pentagon().vectors)
    assert np.array_equal(GramMatrix.from_json(obj["gram"]).entries, gram(pentagon()).entries)
    assert "demo pentagon" in capsys.readouterr().out


def test_embed_then_verify(tmp_path, hexagon_file):
    emb = tmp_path / "emb.json"
    assert main(["embed", "--input", str(hexagon_file), "--output", str(emb),
                 "--dump-operators"]) == 0
    obj = read(emb)
    assert obj["d"] == 2 and obj["cone_guaranteed"]
    assert obj["operators"]["k"] == 1
    assert obj["operators"]["creation"][0]["entries"][1][0] == [1.0, 0.0]
    Realization.from_json(obj)
    rep = tmp_path / "verify.json"
    assert main(["verify", "--gram", str(hexagon_file), "--realization", str(emb),
                 "--tol-psd", "1e-9", "--tol-gram", "1e-6", "--output", str(rep)]) == 0
    assert read(rep)["passed"]


def test_realize_pentagon_ladder_exits_2(tmp_path, capsys):
    src = tmp_path / "p.json"
    main(["demo", "pentagon", "--output", str(src)])
    out = tmp_path / "r.json"
    code = main(["realize", "--gram", str(src), "--ladder", "16", "--restarts", "2",
                 "--max-iters", "200", "--output", str(out)])
    assert code == 2
    line = capsys.readouterr().out.strip().splitlines()[-1]
    assert "no realization found; best residual =" in line
    obj = read(out)
    assert obj["report"]["attempts"][-1]["d"] == 16
    assert obj["d"] == 16


def test_realize_and_factorize_outputs_deterministic(tmp_path, hexagon_file):
    outs = []
    for i in range(2):
        p = tmp_path / f"r{i}.json"
        main(["realize", "--gram", str(hexagon_file), "--dim", "2", "--restarts", "3",
              "--seed", "9", "--output", str(p)])
        outs.append(p.read_bytes())
        q = tmp_path / f"f{i}.json"
        main(["factorize", "--gram", str(hexagon_file), "--inner-dim", "6", "--restarts", "3",
              "--seed", "9", "--max-iters", "300", "--output", str(q)])
        outs.append(q.read_bytes())
    assert outs[0] == outs[2] and outs[1] == outs[3]


def test_factorize_trace_and_exit_codes(tmp_path, hexagon_file):
    out, trace = tmp_path / "b.json", tmp_path / "t.csv"
    code = main(["factorize", "--gram", str(hexagon_file), "--inner-dim", "6",
                 "--restarts", "2", "--max-iters", "100", "--output", str(out),
                 "--trace", str(trace)])
    assert code == 2
    f = NonnegFactorization.from_json(read(out))
    assert f.m == 6 and f.n == 6
    with open(trace) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["restart", "iteration", "residual"]
    assert {r[0] for r in rows[1:]} == {"0", "1"}

    g = tmp_path / "eye.json"
    g.write_text(json.dumps({"n": 2, "entries": [[1.0, 0.0], [0.0, 1.0]]}))
    assert main(["factorize", "--gram", str(g), "--inner-dim", "2",
                 "--output", str(tmp_path / "e.json")]) == 0

    diag = tmp_path / "diag.json"
    assert main(["diagnose", "hexagon", "--factorization", str(out), "--output", str(diag)]) == 0
    assert read(diag)["max_defect"] > 0


def test_diagnose_pentagon(tmp_path):
    src, real = tmp_path / "p.json", tmp_path / "r.json"
    main(["demo", "pentagon", "--output", str(src)])
    main(["realize", "--gram", str(src), "--dim", "2", "--restarts", "3", "--output", str(real)])
    out = tmp_path / "d.json"
    assert main(["diagnose", "pentagon", "--realization", str(real), "--output", str(out)]) == 0
    obj = read(out)
    assert obj["max_defect"] > 0.05
    assert obj["violated_link"] in obj["links"]


def test_raw_trace_convention(tmp_path, hexagon_file):
    raw = tmp_path / "raw.json"
    assert main(["embed", "--input", str(hexagon_file), "--output", str(raw),
                 "--trace-convention", "raw"]) == 0
    real = Realization.from_json(read(raw))
    target = gram(hexagon()).entries
    unnormalized = real.gram() * real.d
    assert np.allclose(unnormalized, target, atol=1e-14)
    assert main(["verify", "--gram", str(hexagon_file), "--realization", str(raw),
                 "--trace-convention", "raw"]) == 0
    assert main(["verify", "--gram", str(hexagon_file), "--realization", str(raw)]) == 2


def test_errors_exit_1_and_name_field(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"n": 2, "rows": []}))
    assert main(["realize", "--gram", str(bad)]) == 1
    assert "entries" in capsys.readouterr().err

    neg = tmp_path / "neg.json"
    neg.write_text(json.dumps({"n": 2, "entries": [[1.0, -0.5], [-0.5, 1.0]]}))
    assert main(["factorize", "--gram", str(neg)]) == 1
    assert "negative" in capsys.readouterr().err

    assert main(["verify", "--gram", str(neg), "--realization", str(tmp_path / "missing.json")]) == 1
    assert main(["diagnose", "pentagon"]) == 1


def test_bad_tolerance_rejected():
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--gram", "g", "--realization", "r", "--tol-psd", "0"])
    assert exc.value.code == 2  # argparse usage error
    with pytest.raises(ValueError):
        RunConfig("verify", tol_gram=-1.0)


def test_run_config_defaults():
    cfg = RunConfig("demo", which="hexagon")
    assert cfg.seed == 0 and cfg.trace_convention == "normalized"
    assert run(cfg) == 0


def test_help_lists_subcommands():
    proc = subprocess.run([sys.executable, "-m", "psdcone", "--help"],
                          capture_output=True, text=True, check=True)
    for cmd in ("embed", "factorize", "realize", "verify", "diagnose", "demo"):
        assert cmd in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "psdcone", "realize", "--help"],
                          capture_output=True, text=True, check=True)
    for flag in ("--gram", "--dim", "--ladder", "--rank", "--restarts", "--seed", "--trace",
                 "--trace-convention"):
        assert flag in proc.stdout


def test_round_trip_of_own_formats(tmp_path, hexagon_file):
    out = tmp_path / "r.json"
    main(["realize", "--gram", str(hexagon_file), "--dim", "2", "--restarts", "2",
          "--output", str(out)])
    first = Realization.from_json(read(out))
    again = tmp_path / "again.json"
    again.write_text(json.dumps(first.to_json()))
    second = Realization.from_json(read(again))
    for a, b in zip(first.matrices, second.matrices):
        assert np.array_equal(a.entries, b.entries)
    assert not list(tmp_path.glob(".*.tmp"))
