import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

import algprob
from algprob import matcore as M
from algprob.cli import dispatch

DATA = Path(algprob.__file__).parent / "data"


def run(capsys, *argv):
    code = dispatch([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_grover_json(capsys):
    code, out, _ = run(capsys, "grover", "--n", 3, "--marked", 5, "--iters", 2, "--format", "json")
    assert code == 0
    obj = json.loads(out)
    assert obj["p_trace"][-1] == pytest.approx(0.9453125, abs=1e-10)
    assert obj["growth_claim"] == [True, False]


def test_grover_text_marked_bar_dominates(capsys):
    code, out, _ = run(capsys, "grover", "--n", 3, "--marked", 5)
    assert code == 0
    bars = [line for line in out.splitlines() if "|" in line]
    widths = {line.split("|")[0].strip(): line.count("#") for line in bars}
    assert max(widths, key=widths.get) == "5"


def test_grover_shots_need_seed(capsys):
    code, _, err = run(capsys, "grover", "--n", 3, "--marked", 1, "--shots", 10)
    assert code == 64 and "--seed" in err


def test_channel_check_transpose(capsys):
    code, out, _ = run(capsys, "channel", "check", "--in", DATA / "transpose_choi.json", "--format", "json")
    assert code == 0
    obj = json.loads(out)
    assert obj["cp"] is False and obj["tp"] is True
    assert obj["min_choi_eigenvalue"] == pytest.approx(-1)


def test_channel_check_text_table(capsys):
    code, out, _ = run(capsys, "channel", "check", "--in", DATA / "amplitude_damping.json")
    assert code == 0
    assert "trace preserving" in out and "unital" in out
    lines = {line.split()[-1] for line in out.splitlines()[1:5]}
    assert lines == {"yes", "no"}


def test_channel_kraus_and_choi(capsys, tmp_path):
    code, out, _ = run(capsys, "channel", "kraus", "--in", DATA / "depolarizing_half.json", "--format", "json")
    assert code == 0 and len(json.loads(out)["kraus"]) == 4
    target = tmp_path / "choi.json"
    code, _, _ = run(capsys, "channel", "choi", "--in", DATA / "hadamard_channel.json",
                     "--normalization", "normalized", "--out", target)
    assert code == 0
    obj = json.loads(target.read_text())
    assert obj["normalization"] == "normalized"
    c = M.matrix_from_json(obj["choi"])
    assert np.trace(c).real == pytest.approx(1)


def test_channel_compose_and_fixed_point(capsys, tmp_path):
    code, out, _ = run(capsys, "channel", "compose", "--outer", DATA / "hadamard_channel.json",
                       "--inner", DATA / "hadamard_channel.json")
    assert code == 0
    path = tmp_path / "hh.json"
    path.write_text(out)
    code, out, _ = run(capsys, "channel", "fixed-point", "--in", DATA / "amplitude_damping.json", "--format", "json")
    assert code == 0
    r = M.matrix_from_json(json.loads(out)["fixed_point"])
    assert np.allclose(r, np.diag([1, 0]), atol=1e-10)
    code, out, _ = run(capsys, "channel", "compose", "--outer", DATA / "hadamard_channel.json",
                       "--inner", DATA / "hadamard_channel.json", "--tensor")
    assert code == 0 and json.loads(out)["in_dim"] == 4


def test_hadamard_demo(capsys):
    code, out, _ = run(capsys, "hadamard-demo", "--shots", 1024, "--seed", 7, "--format", "json")
    assert code == 0
    obj = json.loads(out)
    assert abs(obj["frequency_1"] - 0.5) <= 0.05
    assert obj["law"] == {"0": 0.5, "1": 0.5}


def test_determinism(capsys):
    argv = ("hadamard-demo", "--shots", 1024, "--seed", 3)
    first = run(capsys, *argv)
    assert first == run(capsys, *argv)


def test_bernoulli_csv(capsys):
    code, out, _ = run(capsys, "bernoulli", "--z", 1, "--w", 1, "--format", "csv")
    assert code == 0
    assert out == "outcome,probability\n-1,0\n1,1\n"


def test_povm_commands(capsys):
    code, out, _ = run(capsys, "povm", "check", "--in", DATA / "trine_povm.json",
                       "--state", DATA / "plus_state.json", "--format", "json")
    assert code == 0
    assert sum(json.loads(out)["probabilities"]) == pytest.approx(1)
    code, out, _ = run(capsys, "povm", "neumark", "--in", DATA / "trine_povm.json", "--format", "json")
    obj = json.loads(out)
    assert obj["dilated_dim"] == 6 and max(obj["compression_residuals"]) < 1e-10


def test_lueders_and_instrument(capsys):
    code, out, _ = run(capsys, "lueders", "--state", DATA / "classical_state.json",
                       "--projector", DATA / "projector_01.json", "--format", "json")
    assert code == 0
    obj = json.loads(out)
    assert obj["probability"] == pytest.approx(0.8)
    assert np.allclose(M.matrix_from_json(obj["posterior"]), np.diag([0.625, 0.375, 0]))
    code, out, _ = run(capsys, "instrument", "--in", DATA / "computational_instrument.json",
                       "--state", DATA / "plus_state.json", "--format", "csv")
    assert code == 0 and out == "outcome,probability\n0,0.5\n1,0.5\n"


def test_fock_commands(capsys):
    code, out, _ = run(capsys, "fock", "moments", "--q", 0, "--order", 8, "--format", "json")
    assert code == 0 and json.loads(out)["moments"] == [0, 1, 0, 2, 0, 5, 0, 14]
    code, out, _ = run(capsys, "favard", "roundtrip", "--measure", DATA / "uniform3_measure.json", "--format", "json")
    obj = json.loads(out)
    assert obj["omega"] == pytest.approx([2 / 3, 1 / 3])
    assert obj["atom_error"] < 1e-8
    code, out2, _ = run(capsys, "fock", "favard", "--measure", DATA / "uniform3_measure.json", "--format", "json")
    assert out2 == out


def test_algebra_commands(capsys):
    code, out, _ = run(capsys, "algebra", "closure", "--generators", DATA / "generators_xz.json", "--format", "json")
    assert code == 0 and json.loads(out)["algebra_dim"] == 4
    code, out, _ = run(capsys, "algebra", "commutant", "--generators", DATA / "generators_xz.json", "--format", "json")
    assert json.loads(out)["commutant_dim"] == 1
    code, out, _ = run(capsys, "algebra", "decompose", "--generators", DATA / "generators_repeated_block.json",
                       "--format", "json")
    obj = json.loads(out)
    assert obj["blocks"] == [{"n": 4, "m": 2, "l": 2}] and obj["center_dim"] == 1


def test_ks_verify(capsys):
    code, out, _ = run(capsys, "ks", "verify", "--format", "json")
    obj = json.loads(out)
    assert obj["solutions"] == 0 and obj["contexts_valid"]
    assert obj["parity"] == {"need": 9, "have": "even"}
    code, out, _ = run(capsys, "ks", "verify")
    assert "contradiction: True" in out


def test_validation_error_exit_code(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(M.matrix_to_json(np.diag([0.7, 0.7]))))
    code, out, err = run(capsys, "lueders", "--state", bad, "--projector", DATA / "projector_01.json")
    assert code == 2 and out == ""
    assert "error" in json.loads(err)


def test_numerical_error_exit_code(capsys, monkeypatch):
    from algprob import channels
    from algprob.errors import NumericalError

    def boom(ch):
        raise NumericalError("forced")

    monkeypatch.setattr(channels, "fixed_point", boom)
    code, _, err = run(capsys, "channel", "fixed-point", "--in", DATA / "depolarizing_half.json")
    assert code == 1 and json.loads(err)["message"] == "forced"


def test_usage_errors(capsys):
    assert run(capsys, "no-such-command")[0] == 64
    assert run(capsys)[0] == 64
    assert run(capsys, "grover", "--n", 3, "--marked", 1, "--tol", -1)[0] == 64


def test_env_tolerance(capsys, monkeypatch):
    monkeypatch.setenv("ALGPROB_DEFAULT_TOL", "not-a-number")
    assert run(capsys, "ks", "verify")[0] == 64
    monkeypatch.setenv("ALGPROB_DEFAULT_TOL", "1e-6")
    assert run(capsys, "ks", "verify")[0] == 0


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "algprob.cli", "ks", "verify", "--format", "json"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["solutions"] == 0
