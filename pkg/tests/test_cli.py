import json
import subprocess
import sys

import numpy as np
import pytest

from telechan.cli import main, render_table, run_verify, to_json
from telechan.states import DensityMatrix, random_state, save_state


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_spectrum_werner(capsys):
    code, out, _ = run(capsys, "spectrum", "--resource", "werner:0.6")
    report = json.loads(out)
    assert code == 0
    assert np.allclose(report["probs"], [0.7, 0.1, 0.1, 0.1])
    assert report["singlet_fraction"] == pytest.approx(0.7)


def test_spectrum_canonical_relabeling(capsys):
    code, out, _ = run(capsys, "spectrum", "--resource", "bell_diag:0.1,0.1,0.7,0.1")
    report = json.loads(out)
    assert report["canonical"]["relabeling"] == 2
    assert report["canonical"]["probs"][0] == pytest.approx(0.7)


def test_spectrum_qutrit(capsys):
    code, out, _ = run(capsys, "spectrum", "--resource", "isotropic:3:0.5", "--dim", "3")
    report = json.loads(out)
    assert code == 0 and len(report["probs"]) == 9
    assert report["probs"][0] == pytest.approx(0.5)
    assert report["labels"][1] == [0, 1]


def test_teleport_and_swap(capsys):
    code, out, _ = run(capsys, "teleport", "--resource", "werner:0.5", "--input", "ket:1")
    report = json.loads(out)
    assert code == 0 and report["passed"]
    assert [b["probability"] for b in report["branches"]] == pytest.approx([0.25] * 4)
    code, out, _ = run(capsys, "swap", "--resource", "werner:0.5")
    report = json.loads(out)
    assert code == 0 and report["max_deviation"] < 1e-12


def test_single_system_resource_rejected(capsys):
    code, _, err = run(capsys, "teleport", "--resource", "ket:0", "--input", "ket:0")
    assert code == 2 and "d x d pair" in err


def test_teleport_through_product_resource(tmp_path, capsys):
    prod = np.zeros((4, 4))
    prod[0, 0] = 1
    path = tmp_path / "prod.json"
    path.write_text(save_state(DensityMatrix(prod, (2, 2))))
    code, out, _ = run(capsys, "teleport", "--resource", str(path), "--input", "ket:0")
    report = json.loads(out)
    assert code == 0
    assert [b["flagged"] for b in report["branches"]] == [False, True, True, False]


def test_verify_pass_and_fault(capsys):
    code, out, _ = run(capsys, "verify", "--samples", "30", "--seed", "3")
    assert code == 0 and json.loads(out)["max_deviation"] < 1e-10
    code, out, _ = run(capsys, "verify", "--samples", "30", "--seed", "3", "--inject-fault")
    assert code == 1 and json.loads(out)["max_deviation"] > 1e-3


def test_verify_qutrit():
    report = run_verify(3, 6, 1)
    assert report["passed"]


def test_metrics(capsys):
    code, out, _ = run(capsys, "metrics", "--resource", "werner:0", "--samples", "500")
    report = json.loads(out)
    assert code == 0
    values = {m["name"]: m["value"] for m in report["metrics"]}
    assert values["teleport_success"] == pytest.approx(1.0, abs=1e-9)
    assert values["entswap_success"] == pytest.approx(2.0, abs=1e-9)
    assert values["mean_capacity"] == pytest.approx(1.0, abs=1e-9)


def test_metrics_infinite_value_serializes(capsys):
    code, out, _ = run(capsys, "metrics", "--resource", "bell_diag:0,1,0,0", "--samples", "100")
    report = json.loads(out)
    fplus = [m for m in report["metrics"] if m["name"] == "entswap_success"][0]
    assert fplus["value"] == "inf"
    assert fplus["details"]["canonical_value"] == pytest.approx(0.0, abs=1e-12)


def test_bound(capsys):
    code, out, _ = run(capsys, "bound", "--resource", "bell_diag:0.5,0.5,0,0", "--samples", "50")
    report = json.loads(out)
    assert code == 0 and report["separable_channel"] and report["ppt_failures"] == 0
    code, out, _ = run(capsys, "bound", "--resource", "werner:0.9", "--samples", "50")
    report = json.loads(out)
    assert code == 0 and not report["separable_channel"] and report["violations"] == 0


def test_table_format(capsys):
    code, out, _ = run(capsys, "spectrum", "--resource", "werner:0.2", "--format", "table")
    assert code == 0
    assert "singlet_fraction" in out and "{" not in out


def test_render_table_skips_matrices():
    text = render_table(to_json({"a": 1.5, "s": {"matrix": [[1]], "dims": [1]}}))
    assert "matrix" not in text and "s.dims" in text


def test_output_file(tmp_path, capsys):
    path = tmp_path / "r.json"
    code, out, _ = run(capsys, "spectrum", "--output", str(path))
    assert code == 0 and out == ""
    assert json.loads(path.read_text())["probs"][0] == pytest.approx(1.0)


def test_seed_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("TELECHAN_SEED", "17")
    _, out, _ = run(capsys, "verify", "--samples", "2")
    assert json.loads(out)["seed"] == 17
    monkeypatch.setenv("TELECHAN_SEED", "x")
    code, _, err = run(capsys, "verify", "--samples", "2")
    assert code == 2 and "TELECHAN_SEED" in err


def test_determinism(capsys):
    _, a, _ = run(capsys, "verify", "--samples", "20", "--seed", "5")
    _, b, _ = run(capsys, "verify", "--samples", "20", "--seed", "5")
    assert a == b


@pytest.mark.parametrize(
    "argv",
    [
        ["spectrum", "--resource", "werner:1.5"],
        ["spectrum", "--resource", "bell_diag:0.5,0.6,0,0"],
        ["spectrum", "--resource", "/nonexistent/state.json"],
        ["verify", "--samples", "0"],
        ["verify", "--dim", "1"],
        ["teleport", "--input", "bell"],
        ["swap", "--input", "ket:0"],
        ["bound", "--resource", "isotropic:3:0.5", "--dim", "3"],
        ["spectrum", "--resource", "maxmixed", "--dim", "3", "--tolerance", "-1"],
    ],
)
def test_input_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err.startswith("telechan: error:")


def test_invalid_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"dims": [2], "matrix": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]}')
    code, _, err = run(capsys, "spectrum", "--resource", str(bad))
    assert code == 2
    garbage = tmp_path / "garbage.json"
    garbage.write_text("not json")
    assert run(capsys, "spectrum", "--resource", str(garbage))[0] == 2


def test_saved_state_roundtrip(tmp_path, capsys, rng):
    chi = random_state((2, 2), rng)
    path = tmp_path / "chi.json"
    path.write_text(save_state(chi))
    code, out, _ = run(capsys, "teleport", "--resource", str(path), "--input", "maxmixed")
    assert code == 0 and json.loads(out)["passed"]


def test_module_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "telechan", "spectrum", "--resource", "werner:0.6"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert res.returncode == 0
    assert json.loads(res.stdout)["dim"] == 2
