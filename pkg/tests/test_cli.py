import json

import pytest

from qce_lqr.cli import main


def test_codec_encode(capsys):
    assert main(["codec", "encode", "--eg", "5"]) == 0
    assert capsys.readouterr().out.strip() == "00101"


def test_codec_hex_roundtrip(capsys):
    assert main(["codec", "encode", "--signed-eg", "-2", "0", "7", "--hex"]) == 0
    h, n = capsys.readouterr().out.split()
    assert main(["codec", "decode", h, "--nbits", n, "--signed"]) == 0
    assert capsys.readouterr().out.split() == ["-2", "0", "7"]


def test_codec_usage_errors(capsys):
    assert main(["codec", "encode", "--eg", "0"]) == 2
    assert main(["codec", "decode", "0012"]) == 1


def test_unknown_flag_exit_2():
    with pytest.raises(SystemExit) as e:
        main(["simulate", "--bogus"])
    assert e.value.code == 2


def test_converse(capsys):
    assert main(["converse", "--alpha", "0.5", "--dx", "1", "--du", "1", "--T", "1048576"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["bounds"]["coefficient"] == 0.25
    assert d["ok"]


def test_simulate_and_config(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"T": 256, "system": "double_integrator"}))
    assert main(["simulate", "--config", str(cfg), "--T", "512", "--seed", "2", "--out-dir", str(tmp_path)]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["system"] == "double_integrator" and d["config"]["T"] == 512
    first = (tmp_path / "double_integrator_practical_qce_seed2.json").read_bytes()
    assert main(["simulate", "--config", str(cfg), "--T", "512", "--seed", "2", "--out-dir", str(tmp_path)]) == 0
    assert (tmp_path / "double_integrator_practical_qce_seed2.json").read_bytes() == first


def test_simulate_unknown_system():
    assert main(["simulate", "--system", "cartpole"]) == 2


def test_bad_config_key(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"horizon": 5}))
    assert main(["simulate", "--config", str(cfg)]) == 2


def test_bench(tmp_path, capsys):
    assert main(["bench", "--systems", "scalar", "--T", "512", "--trials", "2", "--seed", "1", "--out-dir", str(tmp_path)]) == 0
    assert (tmp_path / "scalar_practical_qce.csv").exists()
    assert (tmp_path / "scalar_summary.json").exists()
    assert json.loads((tmp_path / "bench.json").read_text())["trigger_gap"][0]["system"] == "scalar"


def test_verify(capsys):
    assert main(["verify", "--quick"]) == 0
    assert "FAIL" not in capsys.readouterr().out
