import json
import subprocess
import sys

import pytest

from ngonlift.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_certify_powers_of_two(capsys):
    code, out, err = run(capsys, "certify", "--n", "4", "--scheme", "powers-of-two")
    assert code == 0
    data = json.loads(out)
    assert data["n"] == 16 and len(data["squares"]) == 3
    assert "support [0, 1, 2, 4]" in err and "PASS" in err


def test_certify_hierarchy_and_hexagon(capsys):
    code, out, _ = run(capsys, "certify", "--N", "6", "--scheme", "hierarchy")
    assert code == 0 and json.loads(out)["scheme"] == "hierarchy"
    code, out, _ = run(capsys, "certify", "--N", "6", "--scheme", "hexagon")
    assert code == 0 and len(json.loads(out)["squares"]) == 2


def test_certify_range(capsys, tmp_path):
    path = tmp_path / "all.json"
    code, _, _ = run(capsys, "certify", "--n", "2..6", "--out", str(path))
    assert code == 0
    assert [c["n"] for c in json.loads(path.read_text())] == [4, 8, 16, 32, 64]


def test_certify_tolerance_env(capsys, monkeypatch):
    monkeypatch.setenv("NGONLIFT_TOL", "1e-30")
    code, _, _ = run(capsys, "certify", "--n", "5")
    assert code == 1
    monkeypatch.setenv("NGONLIFT_TOL", "-1")
    code, _, _ = run(capsys, "certify", "--n", "5")
    assert code == 2


@pytest.mark.parametrize("argv", [
    ["certify", "--scheme", "hierarchy"],
    ["certify", "--n", "1"],
    ["certify", "--N", "8", "--scheme", "hexagon"],
    ["lift", "--scheme", "hierarchy"],
    ["cluster", "--N", "12", "--freqs", "0,20"],
    ["cluster", "--N", "12"],
    ["figures", "--which", "arithmetic", "--k", "1"],
])
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and "error" in err


@pytest.mark.parametrize("argv", [["certify", "--scheme", "bogus"], ["nope"], ["certify", "--n", "x"],
                                  ["cert", "--n", "2"], ["certify", "--sch", "hexagon"]])
def test_argparse_errors_exit_two(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_lift_chained_sdpa(capsys, tmp_path):
    path = tmp_path / "c.dat-s"
    code, out, _ = run(capsys, "lift", "--n", "4", "--scheme", "chained", "--format", "sdpa", "--out", str(path))
    assert code == 0 and "block sizes [3, 3, 3]" in out
    code, out, _ = run(capsys, "verify", str(path))
    assert code == 0 and "PASS" in out


def test_lift_single_json(capsys):
    code, out, _ = run(capsys, "lift", "--n", "4", "--scheme", "single", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert len(data["blocks"]) == 1 and len(data["blocks"][0]["matrix"]["basis"]) == 7


def test_lift_hierarchy(capsys):
    code, _, err = run(capsys, "lift", "--N", "6", "--scheme", "hierarchy")
    assert code == 0 and "block sizes [5]" in err


def test_cluster_examples(capsys):
    code, out, _ = run(capsys, "cluster", "--N", "20", "--freqs", "0,1,3,7")
    assert code == 0 and json.loads(out)["gamma"] == 1
    code, out, err = run(capsys, "cluster", "--N", "16", "--freqs", "0,1,2,4")
    assert code == 0 and "no valid clustering found" in err
    code, out, _ = run(capsys, "cluster", "--N", "12", "--freqs", "0,2,4,6")
    data = json.loads(out)
    assert code == 0 and data["clusters"] == [[0], [2], [4], [6]]


def test_theta_rank(capsys):
    code, out, _ = run(capsys, "theta-rank", "--N", "7")
    data = json.loads(out)
    assert code == 0 and data["degree"] == 4 and data["nonnegative"]


@pytest.mark.parametrize("which,extra,u", [("arithmetic", ["--k", "6"], 0.0),
                                           ("chebyshev", ["--N", "8"], 0.9238795325112867),
                                           ("tangent-lemma", ["--N", "4"], 0.7071067811865476)])
def test_figures(capsys, which, extra, u):
    code, out, err = run(capsys, "figures", "--which", which, *extra)
    lines = out.splitlines()
    assert code == 0 and lines[0] == "x,q,tangent" and len(lines) == 202
    reported = float(err.split("u=")[1])
    assert reported == pytest.approx(u, abs=1e-15)


def test_verify_certificate_file(capsys, tmp_path):
    path = tmp_path / "hex.json"
    run(capsys, "certify", "--N", "6", "--scheme", "hexagon", "--out", str(path))
    code, out, _ = run(capsys, "verify", str(path))
    assert code == 0 and "PASS" in out
    data = json.loads(path.read_text())
    data["squares"][0]["coeffs"][0]["re"] += 1e-3
    path.write_text(json.dumps(data))
    code, out, _ = run(capsys, "verify", str(path))
    assert code == 1 and "FAIL" in out


def test_verify_bad_file(capsys, tmp_path):
    path = tmp_path / "x.json"
    path.write_text("not json")
    assert run(capsys, "verify", str(path))[0] == 2
    assert run(capsys, "verify", str(tmp_path / "missing"))[0] == 2


@pytest.mark.parametrize("argv", [["certify", "--n", "3..5"], ["lift", "--n", "3", "--format", "sdpa"],
                                  ["cluster", "--N", "20", "--freqs", "0,1,3,7", "--seed", "4"],
                                  ["figures", "--which", "chebyshev", "--N", "9"]])
def test_deterministic_output(capsys, argv):
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ngonlift.cli", "certify", "--n", "3"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["n"] == 8
