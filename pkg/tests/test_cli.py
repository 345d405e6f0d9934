import json

import pytest

from shallow_shadows.cli import EXIT_NOT_HERALDED, EXIT_REFUSED, main


def _run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_channel(capsys):
    code, out = _run(capsys, "channel", "--n", "2", "--d", "1", "--pauli", "ZI")
    assert code == 0
    assert "0.2" in out


def test_tau(capsys):
    code, out = _run(capsys, "tau", "--n", "4", "--d", "1", "--pauli", "ZIII", "--pauli2", "XIII")
    assert code == 0
    assert "0" in out


def test_invert_exit_codes(capsys, tmp_path):
    code, _ = _run(capsys, "invert", "--n", "8", "--d", "2", "--chi", "3", "--chi-schedule", "2", "3",
                   "--out", str(tmp_path / "v.json"))
    assert code == 0
    assert (tmp_path / "v.json").exists()
    code, _ = _run(capsys, "invert", "--n", "8", "--d", "3", "--chi", "1", "--max-sweeps", "20",
                   "--out", str(tmp_path / "w.json"))
    assert code == EXIT_NOT_HERALDED


def test_sample_and_estimate(capsys, tmp_path):
    rec = tmp_path / "s.jsonl"
    code, _ = _run(capsys, "sample", "--n", "4", "--d", "2", "--count", "400", "--out", str(rec))
    assert code == 0
    out = tmp_path / "est.json"
    code, _ = _run(capsys, "estimate", "--records", str(rec), "--K", "4", "--out", str(out))
    assert code == 0
    rep = json.loads(out.read_text())
    assert abs(rep["estimate"] - 1.0) < 1.0


def test_norm_and_refusal(capsys):
    code, out = _run(capsys, "norm", "--n", "2", "--d", "1", "--pauli", "ZI")
    assert code == 0 and "5.0" in out
    code, _ = _run(capsys, "norm", "--n", "10", "--d", "2", "--pauli", "Z" * 10, "--statmech")
    assert code == EXIT_REFUSED
    code, out = _run(capsys, "norm", "--n", "10", "--d", "6", "--pauli", "Z" * 10, "--statmech")
    assert code == 0 and "statmech-bound" in out


def test_yaml_config(capsys, tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("n: 2\nd: '1'\npauli: [ZI]\n")
    code, out = _run(capsys, "channel", "--config", str(cfg))
    assert code == 0 and "0.2" in out


def test_missing_n_errors():
    with pytest.raises(SystemExit):
        main(["channel"])
