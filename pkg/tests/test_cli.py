import json
import math

import pytest

from hpqfim import cli, hybrid
from hpqfim.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, EXIT_VERIFY


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_sweep_writes_csv(tmp_path, capsys):
    cfg = write(tmp_path, "er.cfg", "model.name = ExtraRotation\nprior.kind = VonMises\n"
                                    "grid.points = 5\noutput.path = er.csv\n")
    assert cli.main(["sweep", str(cfg)]) == EXIT_OK
    lines = (tmp_path / "er.csv").read_text().splitlines()
    assert lines[0] == "theta_I,inv_L,inv_M,inv_U,flags" and len(lines) == 6
    assert "ExtraRotation" in capsys.readouterr().out


def test_sweep_deterministic_bytes(tmp_path):
    cfg = write(tmp_path, "a.cfg", "model.name = AdditionalSine\nseed = 7\n")
    a, b = tmp_path / "1.csv", tmp_path / "2.csv"
    assert cli.main(["sweep", str(cfg), "-o", str(a)]) == EXIT_OK
    assert cli.main(["sweep", str(cfg), "-o", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_sweep_config_error(tmp_path, capsys):
    cfg = write(tmp_path, "bad.cfg", "model.name = ExtraRotation\nmodel.r = 2\n")
    assert cli.main(["sweep", str(cfg)]) == EXIT_CONFIG
    assert cli.main(["sweep", str(tmp_path / "missing.cfg")]) == EXIT_CONFIG
    assert "error" in capsys.readouterr().err


def test_sweep_numerical_error_exit(tmp_path, monkeypatch, capsys):
    cfg = write(tmp_path, "an.cfg", "model.name = AnisotropicShrink\ngrid.points = 3\n")
    real = hybrid.hpqfim
    monkeypatch.setattr(hybrid, "hpqfim", lambda avg, jp: -real(avg, jp))
    assert cli.main(["sweep", str(cfg), "-o", str(tmp_path / "x.csv")]) == EXIT_NUMERIC
    assert "theta_I" in capsys.readouterr().err


def test_show_direction_point(tmp_path, capsys):
    cfg = write(tmp_path, "d.cfg", "model.name = Direction\nprior.domain = (0.01, 0.99)\n")
    assert cli.main(["show", str(cfg), "--theta-i", "pi/2,0", "--theta-n", "0.6"]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    q = doc["pointwise"]["qfim"]
    assert q[0][0] == pytest.approx(0.36, abs=1e-15)
    assert q[1][1] == pytest.approx(0.36, abs=1e-15)
    assert q[2][2] == 1.5625
    assert doc["pointwise"]["entropy_nats"] == pytest.approx(0.5004024235381879, abs=1e-15)


def test_show_extra_rotation_zero_partial(tmp_path, capsys):
    cfg = write(tmp_path, "er.cfg", "model.name = ExtraRotation\nprior.kind = VonMises\n")
    assert cli.main(["show", str(cfg), "--theta-i", "1", "--theta-n", "0.3"]) == EXIT_OK
    out = capsys.readouterr().out
    doc = json.loads(out)
    assert doc["pointwise"]["J_I|N"] == [[0.0]]
    assert '"J_I|N": [\n      [0.0]\n    ]' in out
    assert doc["inv_U"] == "inf" and doc["inv_L"] == 4.0


def test_show_numbers_have_17_digits(tmp_path, capsys):
    cfg = write(tmp_path, "er.cfg", "model.name = ExtraRotation\nprior.kind = VonMises\n")
    cli.main(["show", str(cfg), "--theta-i", "1"])
    out = capsys.readouterr().out
    assert '"risk_bound": 6.2401937238700906' in out


def test_show_domain_violation(tmp_path, capsys):
    cfg = write(tmp_path, "d.cfg", "model.name = Direction\n")
    assert cli.main(["show", str(cfg), "--theta-i", "pi/2,0", "--theta-n", "1.5"]) == EXIT_CONFIG
    assert cli.main(["show", str(cfg), "--theta-i", "oops"]) == EXIT_CONFIG


def test_verify_exit_codes(monkeypatch, capsys):
    assert cli.main(["verify", "matrix"]) == EXIT_OK
    real = hybrid.hpqfim

    def corrupted(avg, j_pi):
        # flip the sign of the correction term
        return 2 * avg.ii - real(avg, j_pi)

    monkeypatch.setattr(hybrid, "hpqfim", corrupted)
    assert cli.main(["verify", "bounds"]) == EXIT_VERIFY
    out = capsys.readouterr().out
    line = next(l for l in out.splitlines() if l.startswith("FAIL bounds.bracketing"))
    witness = float(line.split("witness=")[1].split()[0])
    assert witness < 0


def test_json_encoder():
    assert cli.to_json({"a": [1.0, math.inf], "b": None}) == '{\n  "a": [1.0, "inf"],\n  "b": null\n}'
    assert cli._num(0.1) == "0.10000000000000001"
