import csv
import os

import pytest

from app import EXIT_INVALID, EXIT_OK, EXIT_RUNTIME, main


def read_csv(path):
    with open(path, newline="") as fp:
        return list(csv.reader(fp))


def test_validate(programs_dir, capsys):
    assert main([ "validate", os.path.join(programs_dir, "geometric.json") ]) == EXIT_OK
    out = capsys.readouterr().out
    assert "Nodes: 3" in out
    assert out.strip().endswith("OK")

@pytest.mark.parametrize("name", [ "invalid_prefix.json", "unknown_node.json" ])
def test_validate_rejects(programs_dir, capsys, name):
    assert main([ "validate", os.path.join(programs_dir, name) ]) == EXIT_INVALID
    assert "Error" in capsys.readouterr().err

def test_run_writes_trajectory(programs_dir, tmp_path):
    out = str(tmp_path / "geometric.csv")
    assert main([ "run", os.path.join(programs_dir, "geometric.json"), "--steps", "60", "--out", out ]) == EXIT_OK
    rows = read_csv(out)
    assert rows[0] == [ "t", "node", "value" ]
    assert rows[4] == [ "3", "arg1 id s", "1.75" ]
    assert len(rows) == 62
    assert abs(float(rows[-1][2]) - 2.0) <= 1e-9

def test_run_is_byte_identical(programs_dir, tmp_path):
    path = os.path.join(programs_dir, "dormant.json")
    outputs = [ str(tmp_path / "a.csv"), str(tmp_path / "b.csv") ]
    for out in outputs:
        assert main([ "run", path, "--steps", "100", "--watch", "arg1 id s", "--watch", "prop e", "--out", out ]) == EXIT_OK
    with open(outputs[0], "rb") as a, open(outputs[1], "rb") as b:
        assert a.read() == b.read()

def test_run_to_stdout_with_stats(programs_dir, capsys):
    assert main([ "run", os.path.join(programs_dir, "dormant.json"), "--steps", "5", "--stats" ]) == EXIT_OK
    captured = capsys.readouterr()
    assert captured.out.splitlines()[0] == "t,node,value"
    assert "id: 1 node(s), 5 evaluation(s)" in captured.err

def test_ca_writes_frames(tmp_path, capsys):
    frames = tmp_path / "frames"
    saved = tmp_path / "ca.json"
    status = main([
        "ca", "--width", "4", "--height", "3", "--steps", "6", "--frame-every", "2",
        "--frames-dir", str(frames), "--save-program", str(saved), "--seed", "5"
    ])
    assert status == EXIT_OK
    assert sorted(os.listdir(frames)) == [ "frame_0.pgm", "frame_2.pgm", "frame_4.pgm", "frame_6.pgm", "stats.csv" ]
    assert (frames / "frame_6.pgm").read_bytes().startswith(b"P5\n4 3\n255\n")
    stats = read_csv(frames / "stats.csv")
    assert stats[0] == [ "t", "mean_abs", "max_abs", "rms" ]
    assert [ row[0] for row in stats[1:] ] == [ "0", "2", "4", "6" ]
    assert main([ "validate", str(saved) ]) == EXIT_OK

@pytest.mark.parametrize("arguments", [
    [ "ca", "--pattern", "hex" ],
    [ "ca", "--width", "0" ],
    [ "ca", "--stabilize", "rms=-1" ],
    [ "ca", "--switch-at", "5", "--morph-to", "vn-avg", "--morph-start", "2" ],
])
def test_ca_rejects_bad_arguments(arguments, capsys):
    assert main(arguments + [ "--steps", "1" ]) == EXIT_INVALID

def test_run_rejects_bad_arguments(programs_dir, tmp_path):
    path = os.path.join(programs_dir, "geometric.json")
    assert main([ "run", path, "--steps", "-1" ]) == EXIT_INVALID
    assert main([ "run", str(tmp_path / "missing.json") ]) == EXIT_RUNTIME

def test_morph_endpoints_match_runs(programs_dir, tmp_path):
    a = os.path.join(programs_dir, "morph_a.json")
    b = os.path.join(programs_dir, "morph_b.json")
    out_dir = tmp_path / "morph"
    assert main([ "morph", a, b, "--lambda-steps", "2", "--steps", "5", "--out-dir", str(out_dir) ]) == EXIT_OK
    assert sorted(os.listdir(out_dir)) == [ "lambda_000.csv", "lambda_001.csv", "lambda_002.csv" ]
    for name, path in (("lambda_000.csv", a), ("lambda_002.csv", b)):
        run_out = str(tmp_path / ("run_" + name))
        assert main([ "run", path, "--steps", "5", "--out", run_out ]) == EXIT_OK
        assert (out_dir / name).read_bytes() == open(run_out, "rb").read()
    assert read_csv(out_dir / "lambda_001.csv")[-1] == [ "5", "id b", "0.75" ]

def test_morph_combined_csv(programs_dir, tmp_path):
    out = str(tmp_path / "morph.csv")
    a = os.path.join(programs_dir, "morph_a.json")
    b = os.path.join(programs_dir, "morph_b.json")
    assert main([ "morph", a, b, "--lambda-steps", "4", "--steps", "3", "--out", out ]) == EXIT_OK
    rows = read_csv(out)
    assert rows[0] == [ "lambda", "t", "node", "value" ]
    assert sorted(set(row[0] for row in rows[1:])) == [ "0", "0.25", "0.5", "0.75", "1" ]
    assert main([ "morph", a, b, "--lambda-steps", "0" ]) == EXIT_INVALID
