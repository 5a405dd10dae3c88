import json

import pytest

from jointra.bip import load_instance
from jointra.cli import main

CFG = "ttis = 2\nseeds = 2\nrbs = 3\nusers_per_cell = 2\nschedulers = joint, single_cell, round_robin\n"


@pytest.fixture
def cfg_file(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text(CFG)
    return p


def test_run_writes_outputs(tmp_path, cfg_file, monkeypatch):
    out = tmp_path / "out"
    monkeypatch.setenv("JOINTRA_OUTPUT_DIR", str(out))
    assert main(["run", str(cfg_file)]) == 0
    for name in ("summary.csv", "summary.json", "per_seed.csv", "cdf.csv"):
        assert (out / name).exists()
    doc = json.loads((out / "summary.json").read_text())
    assert doc["status"] == "complete"
    assert set(doc["schedulers"]) == {"joint", "single_cell", "round_robin"}
    header = (out / "summary.csv").read_text().splitlines()[0]
    assert "avg_spectrum_efficiency_bps_per_hz_per_sector" in header
    assert "p5_user_throughput_kbps" in header
    assert not (out / "PARTIAL").exists()


def test_sweep(tmp_path, monkeypatch):
    p = tmp_path / "s.cfg"
    p.write_text("ttis = 2\nseeds = 1\nrbs = 2\nusers_per_cell = 2\nschedulers = joint\n"
                 "sweep_users = 1, 2\n")
    monkeypatch.setenv("JOINTRA_OUTPUT_DIR", str(tmp_path / "o"))
    assert main(["run", str(p)]) == 0
    rows = (tmp_path / "o" / "sweep.csv").read_text().splitlines()
    assert len(rows) == 3


def test_config_error_exit_code(tmp_path, capsys):
    p = tmp_path / "bad.cfg"
    p.write_text("ttis = -1\nfoo = 2\n")
    assert main(["run", str(p)]) == 2
    err = capsys.readouterr().err
    assert "unknown key 'foo'" in err and "seeds: missing required key" in err


def test_missing_config_file(tmp_path):
    assert main(["run", str(tmp_path / "nope.cfg")]) == 2


def test_dump_instance(tmp_path, cfg_file):
    out = tmp_path / "inst.txt"
    assert main(["dump-instance", str(cfg_file), "--seed", "1", "-o", str(out)]) == 0
    pb = load_instance(out.read_text())
    assert pb.rb_count == 3 and tuple(pb.sizes) == (2, 2, 2)


def test_self_test_fixtures():
    assert main(["self-test", "--level", "fixtures"]) == 0
