import csv
import json
import os
import subprocess
import sys

import pytest

from coarsemedian.cli import main, parse_angle

SQUARE = {"algebra": {"kind": "majority", "dim": 2}}
CUBE = {"kind": "majority", "dim": 3}
HEX = {"vertices": list(range(6)), "edges": [[i, (i + 1) % 6] for i in range(6)]}
BROKEN = {
    "kind": "table",
    "elements": [0, 1, 2],
    "table": [[[0, 0, 0], [0, 0, 0], [0, 0, 0]], [[0, 0, 0], [0, 1, 1], [0, 1, 1]], [[0, 0, 0], [0, 1, 2], [0, 2, 2]]],
}


def write(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_validate_cube(tmp_path, capsys):
    code, out, _ = run(capsys, "validate", "--input", write(tmp_path, "c.json", CUBE))
    assert code == 0 and json.loads(out)["axioms"]["ok"] is True


def test_validate_failure_prints_witness(tmp_path, capsys):
    code, out, err = run(capsys, "validate", "--input", write(tmp_path, "b.json", BROKEN))
    assert code == 1
    assert "symmetry" in err and "(" in err
    assert json.loads(out)["axioms"]["counts"]["symmetry"] > 0


def test_validate_metric_document(tmp_path, capsys):
    code, out, _ = run(capsys, "validate", "--input", write(tmp_path, "s.json", SQUARE))
    assert code == 0 and json.loads(out)["median_metric"]["ok"]
    bad = {"algebra": {"kind": "majority", "dim": 2}, "matrix": [[0, 1, 1, 1], [1, 0, 1, 1], [1, 1, 0, 1], [1, 1, 1, 0]]}
    code, _, err = run(capsys, "validate", "--input", write(tmp_path, "t.json", bad))
    assert code == 1 and "median metric check failed" in err


def test_gap_prints_root_two(capsys):
    code, out, _ = run(capsys, "gap", "--angle", "pi/4", "--k", "2")
    assert code == 0 and "1.414213562" in out
    code, out, _ = run(capsys, "gap", "--angle", "pi/4", "--k", "2", "--format", "csv")
    assert out.splitlines()[1] == "2.000000000,1.414213562"
    code, out, _ = run(capsys, "gap", "--k", "1:100", "--format", "csv")
    assert len(out.splitlines()) == 101


def test_parse_angle():
    import math

    assert parse_angle("pi/4") == pytest.approx(math.pi / 4)
    assert parse_angle("3*pi/4") == pytest.approx(3 * math.pi / 4)
    assert parse_angle("-pi") == pytest.approx(-math.pi)
    assert parse_angle("0.5") == 0.5


def test_cat0_square_diagonal(tmp_path, capsys):
    code, out, _ = run(capsys, "cat0", "--input", write(tmp_path, "s.json", SQUARE), "--format", "csv")
    assert code == 0
    rows = list(csv.reader(out.splitlines()))[1:]
    diag = [r for r in rows if r[2] == "2.000000000"]
    assert diag and all(r[3] == "1.414213562" for r in diag)


@pytest.mark.parametrize(
    "command, doc",
    [
        ("closure", {"algebra": CUBE, "subset": [[0, 0, 0], [1, 1, 0], [0, 1, 1]]}),
        ("walls", CUBE),
        ("cubify", CUBE),
        ("metric", {"algebra": CUBE, "lengths": {"0": 1, "1": 2, "2": 3}}),
        ("rectify", SQUARE),
        ("hypmedian", HEX),
        ("approx", {"model": {"kind": "l1_lattice", "dim": 2, "box": 8}, "A": [[0, 0], [3, 0], [3, 2]]}),
        ("approx", {"model": dict(HEX, kind="graph"), "A": [0, 2, 4], "resolver": "tree", "exactify": True}),
    ],
)
@pytest.mark.parametrize("fmt", ["json", "csv"])
def test_subcommands_succeed(tmp_path, capsys, command, doc, fmt):
    code, out, err = run(capsys, command, "--input", write(tmp_path, "d.json", doc), "--format", fmt)
    assert code == 0, err
    assert out.strip()


def test_specific_outputs(tmp_path, capsys):
    _, out, _ = run(capsys, "closure", "--input", write(tmp_path, "c.json", {"algebra": CUBE, "subset": [[0, 0, 0], [1, 1, 0], [0, 1, 1]]}))
    assert sorted(map(tuple, json.loads(out)["closure"])) == [(0, 0, 0), (0, 1, 0), (0, 1, 1), (1, 1, 0)]
    _, out, _ = run(capsys, "walls", "--input", write(tmp_path, "w.json", CUBE))
    doc = json.loads(out)
    assert doc["rank"] == 3 and len(doc["walls"]) == 3 and len(doc["crossing"]) == 3
    _, out, _ = run(capsys, "metric", "--input", write(tmp_path, "m.json", {"algebra": CUBE, "lengths": [1, 2, 3]}))
    assert json.loads(out)["matrix"][0][7] == 6.0
    _, out, _ = run(capsys, "approx", "--input", write(tmp_path, "a.json", {"model": {"kind": "l1_lattice", "dim": 2, "box": 8}, "A": [[0, 0], [3, 0], [3, 2]]}))
    doc = json.loads(out)
    assert (doc["alpha"], doc["epsilon"], doc["covered"]) == (1.0, 0.0, True)
    assert sorted(doc["lengths"].values()) == [2.0, 3.0]


def test_push_and_pull(tmp_path, capsys):
    sq = {"kind": "graph", "vertices": [0, 1, 2, 3], "edges": [[0, 1], [1, 2], [2, 3], [3, 0]]}
    anti = [[v, (v + 2) % 4] for v in range(4)]
    doc = {"X": sq, "Y": sq, "forward": anti, "backward": anti}
    for cmd in ("push", "pull"):
        code, out, _ = run(capsys, cmd, "--input", write(tmp_path, "q.json", doc))
        rep = json.loads(out)
        assert code == 0 and rep["closeness"] == 0.0 and rep["exhaustive"]
    doc["forward"] = anti[:3]
    code, _, err = run(capsys, "push", "--input", write(tmp_path, "q2.json", doc))
    assert code == 2 and "not total" in err


def test_input_errors(tmp_path, capsys):
    assert run(capsys, "walls", "--input", write(tmp_path, "x.json", "{not json"))[0] == 2
    assert run(capsys, "walls", "--input", str(tmp_path / "missing.json"))[0] == 2
    assert run(capsys, "walls", "--input", write(tmp_path, "k.json", {"kind": "moebius"}))[0] == 2
    assert run(capsys, "walls")[0] == 2
    code, _, err = run(capsys, "validate", "--input", write(tmp_path, "c.json", CUBE), "--mode", "sampled")
    assert code == 2 and "seed" in err
    big = {"kind": "majority", "dim": 7}
    code, _, err = run(capsys, "validate", "--input", write(tmp_path, "big.json", big), "--mode", "exhaustive")
    assert code == 2 and "cap" in err
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_output_file_and_sampled_mode(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, stdout, _ = run(
        capsys, "validate", "--input", write(tmp_path, "c.json", {"kind": "majority", "dim": 7}),
        "--mode", "sampled", "--seed", "5", "--samples", "2000", "--output", str(out),
    )
    assert code == 0 and stdout == ""
    rep = json.loads(out.read_text())
    assert rep["axioms"]["exhaustive"] is False and rep["axioms"]["checked"] == 6000


def test_console_script_entry_point(tmp_path):
    exe = [sys.executable, "-m", "coarsemedian.cli"]
    res = subprocess.run(exe + ["gap", "--k", "2"], capture_output=True, text=True, env=dict(os.environ))
    assert res.returncode == 0 and "1.414213562" in res.stdout
