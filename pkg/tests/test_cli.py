import csv
import io
import json
import subprocess
import sys

import pytest

from qshannon.cli import fmt, main
from qshannon.entropy import binary_entropy


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_entropy_command(capsys):
    code, out, _ = run(capsys, "entropy", "--source", "cloned_wheel", "--channel", "pure_pair")
    assert code == 0
    table = {r["quantity"]: float(r["value"]) for r in rows(out)}
    assert table["H(average)"] == pytest.approx(1.5)
    assert table["H(A1)"] == pytest.approx(1.0)
    assert "I(P;W)" in table


def test_compress_command(capsys):
    code, out, _ = run(capsys, "compress", "--source", "source09", "--n", "64,256", "--alpha", "4")
    assert code == 0
    table = rows(out)
    assert list(table[0]) == ["n", "alpha", "rate", "F_bar", "D_bar", "F_e", "bound_Fe", "bound_rate"]
    assert [int(r["n"]) for r in table] == [64, 256]
    for r in table:
        assert float(r["F_e"]) >= float(r["bound_Fe"])


def test_channel_code_command(capsys, tmp_path):
    codes = tmp_path / "codes.json"
    code, out, _ = run(capsys, "channel-code", "--channel", "pure_pair", "--n", "6",
                       "--lambda", "0.3", "--code-out", str(codes))
    assert code == 0
    r = rows(out)[0]
    assert float(r["max_error"]) <= 0.3
    assert float(r["log2_size"]) <= float(r["converse_log2_bound"])
    assert len(json.loads(codes.read_text())) == 1


def test_constant_composition_command(capsys):
    code, out, _ = run(capsys, "channel-code", "--channel", "bsc01", "--n", "8",
                       "--mode", "cc", "--type", "1:1", "--lambda", "0.2")
    assert code == 0
    assert rows(out)[0]["mode"] == "cc"
    code, _, err = run(capsys, "channel-code", "--channel", "bsc01", "--n", "8", "--mode", "cc")
    assert code == 2 and "--type" in err


def test_capacity_command(capsys):
    code, out, _ = run(capsys, "capacity", "--channel", "bsc01")
    assert code == 0
    r = rows(out)[0]
    assert float(r["capacity"]) == pytest.approx(1 - binary_entropy(0.1), abs=1e-6)
    assert float(r["capacity"]) == pytest.approx(0.531004, abs=1e-6)
    assert r["converged"] == "true"


def test_mac_region_command(capsys):
    code, out, _ = run(capsys, "mac-region", "--mac", "adder_mac")
    assert code == 0
    corners = {(float(r["R1"]), float(r["R2"])) for r in rows(out)}
    assert corners == {(1.0, 0.5), (0.5, 1.0)}
    code, out, _ = run(capsys, "mac-region", "--mac", "adder_mac", "--format", "json")
    data = json.loads(out)
    values = {tuple(c["subset"]): c["value"] for c in data["constraints"]}
    assert values[(0, 1)] == pytest.approx(1.5)


def test_reliability_command(capsys):
    code, out, _ = run(capsys, "reliability", "--channel", "bsc01", "--rates", "0.1,0.3,0.6")
    assert code == 0
    table = rows(out)
    for r in table:
        assert float(r["E_g"]) <= float(r["E_sp"]) + 1e-6
    assert float(table[-1]["E_sp"]) == 0.0


def test_verify_command(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "entropy", "--trials", "20", "--seed", "7")
    assert code == 0
    for r in rows(out):
        assert float(r["max_violation"]) <= 1e-8


def test_verify_with_no_trials_gives_empty_table(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "holevo", "--trials", "0", "--seed", "1")
    assert code == 0
    assert out == "suite,inequality,trials,min_slack,max_violation\n"


def test_verify_reports_violations(capsys):
    # a negative tolerance turns every exact equality into a violation
    code, _, _ = run(capsys, "verify", "--suite", "holevo", "--trials", "3", "--seed", "1", "--tol", "-1")
    assert code == 1


def test_bad_input_exits_with_two(capsys):
    assert run(capsys, "verify", "--suite", "nope", "--trials", "1", "--seed", "1")[0] == 2
    assert run(capsys, "capacity", "--channel", "no/such/file.json")[0] == 2
    assert run(capsys, "compress", "--source", "source09", "--n", "x")[0] == 2
    with pytest.raises(SystemExit):
        main(["verify", "--suite", "entropy"])


def test_output_file(capsys, tmp_path):
    target = tmp_path / "cap.csv"
    assert main(["capacity", "--channel", "bsc01", "--out", str(target)]) == 0
    assert capsys.readouterr().out == ""
    assert target.read_text().startswith("capacity,gap")


def test_explicit_model_path(capsys):
    from qshannon.fixtures import bundled_model
    code, out, _ = run(capsys, "capacity", "--channel", str(bundled_model("bsc01.json")))
    assert code == 0


@pytest.mark.parametrize("argv", [
    ["verify", "--suite", "fidelity", "--trials", "10", "--seed", "3"],
    ["reliability", "--channel", "pure_pair", "--rates", "0.2,0.4"],
    ["compress", "--source", "source09", "--n", "64"],
])
def test_repeated_runs_are_byte_identical(capsys, argv):
    first = run(capsys, *argv)[1]
    second = run(capsys, *argv)[1]
    assert first == second and first


def test_module_entry_point_is_deterministic():
    argv = [sys.executable, "-m", "qshannon", "verify", "--suite", "tender", "--trials", "5", "--seed", "2"]
    a = subprocess.run(argv, capture_output=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, check=True).stdout
    assert a == b and a.startswith(b"suite,")


def test_number_formatting():
    assert fmt(True) == "true"
    assert fmt(3) == "3"
    assert fmt(float("inf")) == "inf"
    assert fmt(1 / 3) == "0.333333333333"
