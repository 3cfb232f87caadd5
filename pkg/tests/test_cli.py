import json
import subprocess
import sys

from mcllc.cli import main


def test_generate_allocate_analyze(tmp_path, capsys):
    ts = tmp_path / "ts.json"
    al = tmp_path / "al.json"
    assert main(["generate", "--seed", "7", "--utilisation", "0.2", "-o", str(ts)]) == 0
    doc = json.loads(ts.read_text())
    assert len(doc["tasks"]) == 10 and doc["cache"]["total_pages"] == 128
    assert main(["allocate", str(ts), "--strategy", "Manberg", "-o", str(al)]) == 0
    assert main(["analyze", str(ts), str(al)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["schedulable"] is True
    assert all(v["schedulable"] for v in out["verdicts"])


def test_generate_seed_flag(tmp_path):
    a, b, c = (tmp_path / f"{k}.json" for k in "abc")
    main(["generate", "--seed", "1", "-o", str(a)])
    main(["generate", "--seed", "1", "-o", str(b)])
    main(["generate", "--seed", "2", "-o", str(c)])
    assert a.read_bytes() == b.read_bytes() != c.read_bytes()


def test_allocate_infeasible_exit_code(tmp_path):
    ts = tmp_path / "ts.json"
    main(["generate", "--utilisation", "1.5", "--wcet-ratio", "12", "-o", str(ts)])
    assert main(["allocate", str(ts), "--strategy", "N"]) == 1


def test_experiment_and_report(tmp_path, monkeypatch, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"experiment_id": "ratio", "varied_param": "wcet_ratio",
                               "values": [4, 8], "tasksets_per_point": 1,
                               "utilisations": [0.2, 0.6]}))
    monkeypatch.setenv("MCLLC_WORKERS", "2")
    out = tmp_path / "res"
    assert main(["experiment", str(cfg), "--out", str(out), "--seed", "3"]) == 0
    assert (out / "ratio_records.csv").exists()
    capsys.readouterr()
    assert main(["report", str(out / "ratio_summary.csv"), "--out", str(tmp_path / "plots")]) == 0
    assert len(capsys.readouterr().out.split()) == 7


def test_bad_config_reports_error(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"experiment_id": "x", "varied_param": "colour"}))
    assert main(["experiment", str(cfg)]) == 1
    assert "error" in capsys.readouterr().err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "mcllc", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "mcllc" in proc.stdout
