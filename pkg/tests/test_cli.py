import json

import pytest

from entropic_bell import catalog
from entropic_bell.cli import main


def test_check_builtin(tmp_path, capsys):
    assert main(["check", "builtin:pe", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "0.01997328" in out and "local weight = 97/100" in out
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert {"command", "seed", "version", "config_hash"} <= set(manifest)


def test_check_noise_and_pnl(tmp_path, capsys):
    assert main(["check", "builtin:p_noise_2233", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "local weight = 1 " in out and "CHSH-type violations: 0  I2233 violations: 0" in out
    assert main(["check", "builtin:p_NL", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "I2233^1 = 4" in out and "local weight = 0" in out


def test_check_file_input(tmp_path, capsys):
    f = tmp_path / "d.json"
    f.write_text(catalog.p_iso("3/5").to_json())
    assert main(["check", str(f), "--q", "1,2", "--out", str(tmp_path / "o")]) == 0
    assert "local weight = 4/5" in capsys.readouterr().out
    bad = tmp_path / "bad.json"
    bad.write_text("{\"scenario\": [2,2,2,2], \"probs\": [\"1\"]}")
    assert main(["check", str(bad), "--out", str(tmp_path / "o")]) == 2


def test_usage_errors(tmp_path):
    assert main(["reproduce", "prop9", "--out", str(tmp_path)]) == 2
    assert main(["check", "builtin:nothing", "--out", str(tmp_path)]) == 2
    assert main(["frobnicate"]) == 2
    assert main(["check", "builtin:pe", "--q", "-1"]) == 2


@pytest.mark.parametrize("seed, size", [("builtin:p_nl", 432), ("builtin:p_noise", 1),
                                        ("functional:i2233", 432), ("functional:chsh", 8)])
def test_orbit(tmp_path, capsys, seed, size):
    assert main(["orbit", seed, "--out", str(tmp_path)]) == 0
    assert f": {size} distinct" in capsys.readouterr().out
    assert len((tmp_path / "orbit.csv").read_text().splitlines()) == size + 1


def test_orbit_with_lift(tmp_path, capsys):
    assert main(["orbit", "functional:chsh2233", "--lift", "--out", str(tmp_path)]) == 0
    assert ": 648 distinct" in capsys.readouterr().out
    assert main(["orbit", "functional:i2233", "--lift", "--out", str(tmp_path)]) == 2


def test_reproduce_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["reproduce", "prop3", "--out", str(out), "--jobs", "1"]) == 0
        assert main(["reproduce", "fig2a", "--grid", "21", "--out", str(out), "--jobs", "1"]) == 0
    for target, name in [("prop3", "prop3_local_weight.csv"), ("fig2a", "fig2a.csv")]:
        assert (a / target / name).read_bytes() == (b / target / name).read_bytes()


def test_failed_check_exits_one(tmp_path):
    # with tol = -1 the classical curve (identically 0) counts as violating, so a check fails
    assert main(["reproduce", "fig1", "--tol", "-1", "--out", str(tmp_path)]) == 1
