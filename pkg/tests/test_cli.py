import csv
import io
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from qgtop import cli, gates
from qgtop.report import emit_sweep

CIRCUITS = Path(__file__).resolve().parent.parent / "circuits"


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_sumrule_swap1_consistent(capsys):
    code, out, _ = run(capsys, "sumrule", "--circuit", CIRCUITS / "swap1.qc")
    assert code == 0
    rec = json.loads(out)
    assert rec["consistent"] is True
    assert abs(rec["gamma_sum_over_2pi"] - rec["nu_u"]) < 1e-5
    assert rec["conventions"]["global_phase_included"] is True
    assert rec["conventions"]["cycles"] == "1"
    assert len(rec["gammas"]) == 4
    assert set(rec["gammas"][0]) >= {"state", "connection_integral", "closing_arg", "gauge_correction", "gamma"}
    # triplet at +1, singlet at -3
    assert rec["nu_h_per_segment"] == ["1", "1"]


def test_sumrule_local_field_has_zero_winding(capsys):
    code, out, _ = run(capsys, "sumrule", "--circuit", CIRCUITS / "local_field.qc")
    assert code == 0
    assert json.loads(out)["nu_u"] == 0


def test_nu_u_bare_and_branch(capsys):
    code, out, _ = run(capsys, "nu-u", "--circuit", CIRCUITS / "swap1.qc", "--bare", "--branch", "det")
    assert code == 0
    rec = json.loads(out)
    assert rec["conventions"]["global_phase_included"] is False
    assert rec["nu_u"] == rec["nu_u_det"]


def test_nu_h(capsys):
    code, out, _ = run(capsys, "nu-h", "--circuit", CIRCUITS / "cnot1.qc")
    assert code == 0
    rows = json.loads(out)["nu_h_per_segment"]
    # the identity gauge is stripped, leaving the cross-resonance spectrum (-3, 1, 1, 1) / 2
    assert rows[0]["nu_h"] == "1"
    assert rows[0]["stripped_identity"] != 0.0


def test_phase_normalises_with_warning(capsys):
    code, out, err = run(capsys, "phase", "--circuit", CIRCUITS / "swap1.qc", "--state", "2,0,0,0")
    assert code == 0
    assert "normalised" in err
    rec = json.loads(out)
    assert rec["cyclic"] is True
    assert rec["final_state"][0] == pytest.approx([1.0, 0.0], abs=1e-9)


def test_phase_complex_literals(capsys):
    code, out, _ = run(capsys, "phase", "--circuit", CIRCUITS / "swap1.qc", "--state", "0.6, 0, 0, 0.8j")
    assert code == 0
    rec = json.loads(out)
    assert rec["concurrence"] == pytest.approx(0.96)


@pytest.mark.parametrize(
    "argv",
    [
        ["sumrule", "--circuit", "/nonexistent/file.qc"],
        ["phase", "--circuit", str(CIRCUITS / "swap1.qc"), "--state", "1,0"],
        ["phase", "--circuit", str(CIRCUITS / "swap1.qc"), "--state", "a,b,c,d"],
        ["phase", "--circuit", str(CIRCUITS / "swap1.qc"), "--state", "0,0,0,0"],
        ["sweep", "--gate", "swap1sq", "--family", "sym", "--alpha0", "1:0:0.1"],
        ["sweep", "--gate", "cnot1sq", "--family", "sym"],
        ["noise", "--b-over-lambda", "0.5", "--alpha0", "0"],
        ["frobnicate"],
        [],
    ],
)
def test_input_errors_exit_1(argv, capsys):
    try:
        code = cli.main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == 1
    assert capsys.readouterr().err


def test_parse_error_reports_position(tmp_path, capsys):
    bad = tmp_path / "bad.qc"
    bad.write_text("qubits 2\nsegment duration=1\nterm 1.0 XYZ\n")
    code, _, err = run(capsys, "nu-u", "--circuit", bad)
    assert code == 1
    assert f"{bad}:3:10:" in err


def test_step_cap_is_consistency_failure(tmp_path, capsys):
    big = tmp_path / "big.qc"
    big.write_text("qubits 1\nsegment duration=1\nterm 1e7 Z\n")
    code, _, err = run(capsys, "nu-u", "--circuit", big)
    assert code == 2
    assert "segment 0" in err


def test_sweep_csv(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    code, _, _ = run(capsys, "sweep", "--gate", "swap2sq", "--family", "sym", "--alpha0", "0:0.4:0.2", "--out", out)
    assert code == 0
    text = out.read_text()
    rows = list(csv.DictReader(io.StringIO(text)))
    assert text.splitlines()[0] == ",".join(gates.SWEEP_COLUMNS)
    assert [float(r["alpha0"]) for r in rows] == pytest.approx([0.0, 0.2, 0.4])
    for r in rows:
        assert float(r["gamma_numeric"]) == pytest.approx(math.pi * (1 + math.cos(float(r["alpha0"]))), abs=2e-4)


def test_noise_json(capsys):
    code, out, _ = run(capsys, "noise", "--b-over-lambda", "0.05", "--alpha0", "0")
    assert code == 0
    rec = json.loads(out)
    assert rec["columns"] == list(gates.NOISE_COLUMNS)
    assert rec["rows"][0]["shift"] == pytest.approx(0.05 * math.pi, rel=0.05)


def test_empty_sweep_is_header_only():
    assert emit_sweep([], gates.SWEEP_COLUMNS) == ",".join(gates.SWEEP_COLUMNS) + "\n"


def test_parse_range():
    assert cli.parse_range("0:1:0.25") == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert cli.parse_range("0.3") == [0.3]
    with pytest.raises(cli.InputError):
        cli.parse_range("0:1:0")


def test_table1_json(tmp_path, capsys):
    out = tmp_path / "t1.json"
    code, _, _ = run(capsys, "table1", "--out", out)
    # every convention obeys the sum rule, so the command succeeds
    assert code == 0
    rec = json.loads(out.read_text())
    assert len(rec["rows"]) == 16
    assert rec["anchor_conventions"]["SWAP2"]


def test_cli_is_deterministic(tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"r{k}.json"
        subprocess.run(
            [sys.executable, "-m", "qgtop", "sumrule", "--circuit", str(CIRCUITS / "cnot2.qc"), "--out", str(path)],
            check=True,
        )
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
