import csv
import json
from pathlib import Path

import pytest

from qdnet.cli import main
from qdnet.cnf import EXAMPLE_FORMULA, planted_3sat, to_dimacs
from qdnet.seeding import derive_rng

FAST = ["--horizon", "2000"]


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def read_manifest(out_dir, command):
    with open(Path(out_dir) / f"{command}-manifest.json") as fh:
        return json.load(fh)


def test_profile_outputs(tmp_path):
    out = tmp_path / "run"
    code = main(["profile", "--dots", "2", *FAST, "--out", str(out)])
    assert code == 0
    rows = read_csv(out / "profile.csv")
    assert len(rows) == 4  # every blocking pattern of two dots
    assert list(rows[0]) == ["blocked", "p_dot1", "p_dot2"]
    assert rows[0]["blocked"] == ""
    assert {r["blocked"] for r in rows} == {"", "l1", "l2", "l1+l2"}
    assert (out / "profile.png").exists()
    manifest = read_manifest(out, "profile")
    assert manifest["subcommand"] == "profile"
    assert manifest["outputs"] == ["profile.csv"]
    assert manifest["figures"] == ["profile.png"]
    assert manifest["config"]["dots"] == "2"
    assert manifest["config"]["horizon"] == "2000.0"


def test_profile_json_format(tmp_path):
    code = main(["profile", "--dots", "2", *FAST, "--format", "json",
                 "--no-figures", "--out", str(tmp_path)])
    assert code == 0
    rows = json.loads((tmp_path / "profile.json").read_text())
    assert len(rows) == 4
    assert set(rows[0]) == {"blocked", "p_dot1", "p_dot2"}
    assert not (tmp_path / "profile.png").exists()
    assert read_manifest(tmp_path, "profile")["figures"] == []


def test_profile_gain_doubles(tmp_path):
    base, doubled = tmp_path / "g1", tmp_path / "g2"
    args = ["profile", "--dots", "2", "--patterns", "unblocked,l1",
            "--horizon", "1000", "--no-figures"]
    assert main([*args, "--out", str(base)]) == 0
    assert main([*args, "--gain", "2", "--out", str(doubled)]) == 0
    for r1, r2 in zip(read_csv(base / "profile.csv"), read_csv(doubled / "profile.csv")):
        assert r1["blocked"] == r2["blocked"]
        for col in ("p_dot1", "p_dot2"):
            assert float(r2[col]) == 2.0 * float(r1[col])


def test_profile_trace_pattern(tmp_path):
    code = main(["profile", "--dots", "2", *FAST, "--trace-pattern", "l2",
                 "--no-figures", "--out", str(tmp_path)])
    assert code == 0
    rows = read_csv(tmp_path / "trajectory.csv")
    assert rows
    assert list(rows[0])[0] == "t_ps"
    assert "total_emitted" in rows[0]
    assert read_manifest(tmp_path, "profile")["config"]["trace_pattern"] == "l2"


def test_profile_rejects_unknown_level(tmp_path):
    assert main(["profile", "--dots", "2", "--patterns", "l9",
                 "--out", str(tmp_path)]) == 2


def test_nor_outputs(tmp_path):
    code = main(["nor", "--dots", "4", "--cycles", "4", "--trials", "10",
                 *FAST, "--out", str(tmp_path)])
    assert code == 0
    rows = read_csv(tmp_path / "nor.csv")
    assert len(rows) == 4
    assert rows[0]["cycle"] == "1" and rows[-1]["cycle"] == "4"
    for col in ("ratio_x1", "ratio_state7", "ratio_state10", "ratio_correct",
                "win_correct"):
        assert col in rows[0]
    assert (tmp_path / "nor.png").exists()


def test_nor_start_round_trips(tmp_path):
    code = main(["nor", "--dots", "4", "--cycles", "2", "--trials", "5",
                 "--start", "0101", *FAST, "--no-figures", "--out", str(tmp_path)])
    assert code == 0
    assert read_manifest(tmp_path, "nor")["config"]["start"] == "0101"


def test_sat_success(tmp_path, phi_file, capsys):
    code = main(["sat", str(phi_file), "--seed", "3", "--out", str(tmp_path)])
    assert code == 0
    stdout = capsys.readouterr().out
    assert "satisfied in" in stdout
    assert "assignment: 1 1 1 1" in stdout
    rows = read_csv(tmp_path / "sat.csv")
    assert rows == [{"solved": "1", "steps": rows[0]["steps"],
                     "assignment": "1 1 1 1"}]
    manifest = read_manifest(tmp_path, "sat")
    assert Path(manifest["config"]["path"]).is_absolute()


def test_sat_budget_exhaustion(tmp_path, phi_file):
    code = main(["sat", str(phi_file), "--budget", "2", "--seed", "0",
                 "--out", str(tmp_path)])
    assert code == 4
    rows = read_csv(tmp_path / "sat.csv")
    assert rows[0]["solved"] == "0"
    assert rows[0]["steps"] == "2"
    assert rows[0]["assignment"] == ""
    # the manifest still lands so the attempt can be replayed
    assert read_manifest(tmp_path, "sat")["config"]["budget"] == "2"


def test_sat_trace_figure(tmp_path, phi_file):
    code = main(["sat", str(phi_file), "--trace", "--seed", "3",
                 "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "sat_trace.png").exists()
    assert "sat_trace.png" in read_manifest(tmp_path, "sat")["figures"]


def test_sat_missing_file(tmp_path):
    assert main(["sat", str(tmp_path / "nope.cnf"), "--out", str(tmp_path)]) == 3


def test_sat_malformed_file(tmp_path):
    bad = tmp_path / "bad.cnf"
    bad.write_text("p cnf 2 1\n1 5 0\n")
    assert main(["sat", str(bad), "--out", str(tmp_path)]) == 3


def test_sat_invalid_p(tmp_path, phi_file):
    assert main(["sat", str(phi_file), "--p", "1.5", "--out", str(tmp_path)]) == 2


def test_walksat(tmp_path, phi_file, capsys):
    code = main(["walksat", str(phi_file), "--seed", "0", "--out", str(tmp_path)])
    assert code == 0
    assert "assignment: 1 1 1 1" in capsys.readouterr().out
    assert read_csv(tmp_path / "walksat.csv")[0]["solved"] == "1"


def test_bench(tmp_path):
    inst_dir = tmp_path / "instances"
    inst_dir.mkdir()
    (inst_dir / "phi.cnf").write_text(to_dimacs(EXAMPLE_FORMULA))
    formula, _ = planted_3sat(20, 91, derive_rng(0, "cli-bench"), name="uf20-cli")
    (inst_dir / "uf20.cnf").write_text(to_dimacs(formula))
    out = tmp_path / "out"
    code = main(["bench", str(inst_dir), "--trials", "3", "--out", str(out)])
    assert code == 0
    rows = read_csv(out / "bench.csv")
    assert [(r["instance"], r["solver"]) for r in rows] == [
        ("phi", "nanops"), ("phi", "walksat"),
        ("uf20", "nanops"), ("uf20", "walksat"),
    ]
    assert all(r["trials"] == "3" for r in rows)
    assert (out / "bench.png").exists()
    manifest = read_manifest(out, "bench")
    assert Path(manifest["config"]["paths"]).is_absolute()


def test_bench_empty_dir(tmp_path):
    empty = tmp_path / "none"
    empty.mkdir()
    assert main(["bench", str(empty), "--out", str(tmp_path)]) == 3


def test_bandit(tmp_path, capsys):
    code = main(["bandit", "--plays", "15", "--samples", "4",
                 "--beta-grid", "2,10", *FAST, "--out", str(tmp_path)])
    assert code == 0
    assert "bandit: nanodm" in capsys.readouterr().out
    eff = read_csv(tmp_path / "efficiency.csv")
    assert len(eff) == 15
    assert list(eff[0]) == ["play", "nanodm_rate", "softmax_rate",
                            "nanodm_std", "softmax_std"]
    sel = read_csv(tmp_path / "selection.csv")
    assert len(sel) == 201
    assert list(sel[0]) == ["j", "S_A", "S_B", "S_B-S_A"]
    assert sel[0]["j"] == "-100" and sel[-1]["j"] == "100"
    assert (tmp_path / "efficiency.png").exists()
    assert (tmp_path / "selection.png").exists()


def test_config_file_precedence(tmp_path):
    cfg = tmp_path / "run.conf"
    cfg.write_text("# nor settings\ntrials = 10\nwindow = 2\n")
    code = main(["nor", "--dots", "3", "--cycles", "2", "--trials", "6",
                 *FAST, "--no-figures", "--config", str(cfg),
                 "--out", str(tmp_path)])
    assert code == 0
    manifest = read_manifest(tmp_path, "nor")
    assert manifest["config"]["trials"] == "6"   # flag beats file
    assert manifest["config"]["window"] == "2"   # file beats default


def test_config_file_errors(tmp_path, phi_file):
    missing = tmp_path / "absent.conf"
    assert main(["sat", str(phi_file), "--config", str(missing),
                 "--out", str(tmp_path)]) == 3
    malformed = tmp_path / "bad.conf"
    malformed.write_text("just words\n")
    assert main(["sat", str(phi_file), "--config", str(malformed),
                 "--out", str(tmp_path)]) == 3
    unknown = tmp_path / "unknown.conf"
    unknown.write_text("bogus = 1\n")
    assert main(["sat", str(phi_file), "--config", str(unknown),
                 "--out", str(tmp_path)]) == 2


def test_unknown_flag_exits_2(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["profile", "--bogus", "--out", str(tmp_path)])
    assert exc.value.code == 2


def test_rerun_reproduces_bitwise(tmp_path, phi_file):
    first, second = tmp_path / "a", tmp_path / "b"
    code = main(["profile", "--dots", "2", "--horizon", "1500",
                 "--trace-pattern", "l1", "--out", str(first)])
    assert code == 0
    code = main(["rerun", str(first / "profile-manifest.json"),
                 "--out", str(second)])
    assert code == 0
    names = sorted(p.name for p in first.iterdir())
    assert names == sorted(p.name for p in second.iterdir())
    for name in names:
        assert (first / name).read_bytes() == (second / name).read_bytes(), name


def test_rerun_missing_manifest(tmp_path):
    assert main(["rerun", str(tmp_path / "gone.json"),
                 "--out", str(tmp_path)]) == 3
