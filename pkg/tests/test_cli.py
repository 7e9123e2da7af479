import json

import numpy as np
import pytest

from qmemtwin import io
from qmemtwin.cli import ConfigError, parse_input, parse_int_range, parse_sweep, run


def data_rows(text):
    return [r for r in io.parse_csv(text) if r["phi"] != "visibility"]


def test_registry_list(capsys):
    assert run(["registry", "list"]) == 0
    names = capsys.readouterr().out.split()
    assert len(names) == 11
    assert "Lambda895" in names


def test_registry_show(capsys):
    assert run(["registry", "show", "Lambda895"]) == 0
    out = capsys.readouterr().out
    line = next(l for l in out.splitlines() if l.startswith("eta_e2e_0"))
    assert float(line.split()[1]) == 0.13
    assert run(["registry", "show", "Foo"]) == 2
    assert "Foo" in capsys.readouterr().err


def test_mzi_default_sweep(tmp_path):
    out = tmp_path / "mzi.csv"
    assert run(["mzi", "--memory", "Lambda895", "--trunc", "3", "--out", str(out)]) == 0
    rows = io.parse_csv(out.read_text())
    assert len(data_rows(out.read_text())) == 41
    assert rows[-1]["phi"] == "visibility"
    manifest = json.loads(io.manifest_path(out).read_text())
    assert manifest["subcommand"] == "mzi"
    assert "version" in manifest


def test_mzi_incompatible_input(capsys):
    assert run(["mzi", "--memory", "Lambda895", "--input-wavelength", "780"]) == 2
    assert "wavelength" in capsys.readouterr().err


def test_mzi_json_output(capsys):
    assert run(["mzi", "--memory", "Test", "--phases", "4", "--format", "json"]) == 0
    rows = json.loads(capsys.readouterr().out)
    # four phases plus the visibility footer
    assert len(rows) == 5


def test_token_perfect_memory(capsys):
    assert run(["token", "--memory", "Test", "--detector-kappa", "1", "--detector-nb", "0"]) == 0
    row = io.parse_csv(capsys.readouterr().out)[0]
    assert row["c"] == pytest.approx(1.0)
    assert row["above_threshold"] is True


def test_token_lambda895_below_threshold(capsys):
    assert run(["token", "--memory", "Lambda895"]) == 0
    row = io.parse_csv(capsys.readouterr().out)[0]
    assert row["above_threshold"] is False


def test_truncation_and_fidelity(capsys):
    assert run(["truncation", "--memory", "Test", "--trunc-range", "1:4"]) == 0
    rows = io.parse_csv(capsys.readouterr().out)
    assert [r["truncation"] for r in rows] == [1, 2, 3, 4]
    assert run(["fidelity", "--study", "efficiency", "--input", "single", "--grid", "0:1:3"]) == 0
    rows = io.parse_csv(capsys.readouterr().out)
    assert [r["fidelity"] for r in rows] == pytest.approx([0.0, 0.5, 1.0])


def test_bad_config_exits_2():
    with pytest.raises(SystemExit) as exc:
        run(["mzi", "--phases", "0:1"])
    assert exc.value.code == 2
    assert run(["mzi", "--input", "squeezed"]) == 2
    assert run(["mzi", "--trunc", "0"]) == 2


def test_parse_helpers():
    assert parse_sweep("0.5") == [0.5]
    assert parse_sweep("0:1:3") == pytest.approx([0, 0.5, 1])
    assert parse_sweep("1e-6:1e-4:3:log") == pytest.approx([1e-6, 1e-5, 1e-4])
    assert np.allclose(parse_sweep("0:1:2"), [0, 1])
    with pytest.raises(ConfigError):
        parse_sweep("a:b:c")
    assert list(parse_int_range("2:5")) == [2, 3, 4, 5]
    assert parse_input("coherent:1.5") == ("coherent", 1.5)
    assert parse_input("single") == ("single_photon", 0.0)
    with pytest.raises(ConfigError):
        parse_input("coherent:x")


def test_replay_is_byte_identical(tmp_path):
    out = tmp_path / "tok.csv"
    assert run(["token", "--memory", "Ladder780", "--mu-emission", "0.5:1:2", "--out", str(out)]) == 0
    again = tmp_path / "again.csv"
    assert run(["replay", str(io.manifest_path(out)), "--out", str(again)]) == 0
    assert again.read_bytes() == out.read_bytes()


def test_memory_file(tmp_path, capsys):
    path = tmp_path / "mem.yaml"
    path.write_text("memories:\n  - class_name: Test\n    t_in: 0.5\n    t_out: 0.5\n")
    assert run(["mzi", "--memory", "Test", "--memory-file", str(path), "--phases", "3"]) == 0
    rows = io.parse_csv(capsys.readouterr().out)
    # amplitude transmission 1/2 through the memory arm
    assert rows[-1]["n_A"] == pytest.approx(2 * 0.5 / (1 + 0.25))
