import json
import subprocess
import sys

import pytest

from apnverify.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--json")
    return code, json.loads(out)


def test_check_stability_exit_codes(capsys, model_path):
    code, report = run_json(capsys, "--model", model_path, "check-stability", "--equation", "E1")
    assert code == 1
    assert report["result"]["stable"] is False
    (v,) = report["result"]["transitions"]
    assert v["verdict"] == "unstable"
    assert v["witness"]["firing_mode"] == {"W": "c", "Y": "c", "Z": "g(c)"}
    assert report["schema"] == 1


def test_globals_before_or_after_subcommand(capsys, model_path):
    a = run(capsys, "--model", model_path, "--json", "zeros", "--equation", "E2")
    b = run(capsys, "zeros", "--equation", "E2", "--model", model_path, "--json")
    assert a == b and a[0] == 0


def test_json_is_deterministic(capsys, model_path):
    first = run(capsys, "--model", model_path, "check-stability", "--equation", "E2", "--json")
    second = run(capsys, "--model", model_path, "check-stability", "--equation", "E2", "--json")
    assert first == second
    assert "wall_time_s" not in first[1]


def test_timing_is_opt_in(capsys, model_path):
    code, report = run_json(capsys, "--model", model_path, "--timing", "satisfies", "--equation", "E1", "--marking", "m1")
    assert code == 0
    assert report["stats"]["wall_time_s"] >= 0


def test_satisfies(capsys, model_path):
    assert run(capsys, "--model", model_path, "satisfies", "--equation", "E1", "--marking", "m5")[0] == 0
    assert run(capsys, "--model", model_path, "satisfies", "--equation", "E1", "--marking", "m4")[0] == 1
    assert run(capsys, "--model", model_path, "satisfies", "--equation", "E2", "--marking", "m4")[0] == 0


def test_check_invariant(capsys, model_path):
    code, report = run_json(capsys, "--model", model_path, "check-invariant", "--equation", "E2")
    assert code == 1
    assert report["result"]["transitions"][0]["invariant"] is False


def test_zeros_contains_known_members(capsys, model_path):
    code, report = run_json(capsys, "--model", model_path, "zeros", "--equation", "E2")
    assert code == 0
    nus = [tuple(z["nu"][p] for p in "ABCDE") for z in report["result"]["zeros"]]
    assert (1, 0, 0, 2, 0) in nus and (2, 0, 0, 4, 0) in nus
    code, small = run_json(capsys, "--model", model_path, "zeros", "--equation", "E1", "--minimize")
    assert len(small["result"]["zeros"]) < 1868


def test_derive(capsys, model_path):
    code, report = run_json(capsys, "--model", model_path, "derive", "--equation", "E1", "--transition", "t")
    assert code == 0
    assert sorted(d["key"]["Z"] for d in report["result"]["derived"]) == ["f(_2)", "f(g(_2))", "g(_2)"]


def test_simulate_m5(capsys, model_path):
    code, report = run_json(capsys, "--model", model_path, "simulate", "--marking", "m5", "--step", "t:W=c,Y=c,Z=g(c)")
    assert code == 0
    traj = report["result"]["trajectory"]
    assert len(traj) == 2
    assert traj[1]["E"] == [[1, "f(c)"]]


def test_simulate_disabled_step(capsys, model_path):
    code, report = run_json(capsys, "--model", model_path, "simulate", "--marking", "m1", "--step", "t:W=c,Y=c,Z=g(c)")
    assert code == 1
    assert report["result"]["error"]
    assert len(report["result"]["trajectory"]) == 1


def test_validity(capsys, model_path, minsky_path):
    code, report = run_json(capsys, "--model", model_path, "validity", "--equation", "E2")
    assert code == 3 and report["result"]["outcome"] == "unknown"
    code, report = run_json(capsys, "--model", minsky_path, "validity", "--machine", "halting")
    assert code == 1 and report["result"]["outcome"] == "violated"
    code, report = run_json(capsys, "--model", minsky_path, "validity", "--machine", "diverging")
    assert code == 3
    code, report = run_json(capsys, "--model", minsky_path, "validity", "--machine", "transfer", "--search-depth", "12")
    assert code == 1 and len(report["result"]["run"]) == 7


def test_validity_cap_gives_unknown(capsys, minsky_path):
    code, report = run_json(capsys, "--model", minsky_path, "validity", "--machine", "diverging", "--cap", "3")
    assert code == 3
    assert "cap" in report["result"]["reason"]


def test_encode_minsky_round_trips(capsys, caplog, minsky_path, tmp_path):
    code, out, _ = run(capsys, "--model", minsky_path, "encode-minsky", "transfer")
    assert code == 0
    assert "jumps directly to the halt instruction" in caplog.text
    path = tmp_path / "net.apn"
    path.write_text(out)
    code, _, _ = run(capsys, "--model", str(path), "check-stability", "--equation", "halt")
    assert code == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["check-stability", "--equation", "NOPE"],
        ["check-stability", "--equation", "E1", "--transition", "nope"],
        ["satisfies", "--equation", "E1", "--marking", "nope"],
        ["simulate", "--step", "t:W=zz"],
        ["frobnicate"],
    ],
)
def test_usage_errors(capsys, model_path, argv):
    assert run(capsys, "--model", model_path, *argv)[0] == 2


def test_missing_model_and_parse_error(capsys, tmp_path):
    assert run(capsys, "zeros", "--equation", "E1")[0] == 2
    bad = tmp_path / "bad.apn"
    bad.write_text("signature: c/0;\nequation E group Z { A: 1 * c } = 0\n")
    code, _, err = run(capsys, "--model", str(bad), "zeros", "--equation", "E")
    assert code == 2
    assert "2:" in err and "homogeneous" in err


def test_console_script(model_path):
    proc = subprocess.run(
        [sys.executable, "-m", "apnverify.cli", "--model", model_path, "satisfies", "--equation", "E1", "--marking", "m1"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
