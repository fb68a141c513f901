import json
import subprocess
import sys

import pytest

from beolcamo.cli import describe_function, main
from conftest import BENCH_DIR

C17 = str(BENCH_DIR / "c17.bench")
C432 = str(BENCH_DIR / "c432.bench")
C880 = str(BENCH_DIR / "c880.bench")


def _json(capsys):
    return json.loads(capsys.readouterr().out)


def test_counts_table(capsys):
    assert main(["counts"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "scheme,AND,NAND,OR,NOR,XOR,XNOR"
    assert lines[1] == "TwoToOne,4,4,4,4,4,4"
    assert lines[2] == "ThreeToOne,9,9,9,9,9,9"
    assert lines[3] == "ExtendedFixed1,5,5,5,5,7,7"
    assert lines[4] == "ExtendedFixed2,10,10,10,10,14,14"


def test_counts_list_xor(capsys):
    assert main(["counts", "--list", "XOR", "--scheme", "ext2"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "# XOR under ExtendedFixed2: 14 functions"
    assert set(out[1:]) == {"0", "1", "a", "~a", "w", "~w", "b", "~b", "x", "~x",
                            "a^b", "a^x", "w^b", "w^x"}


def test_describe_function():
    assert describe_function(["p", "q"], (0, 0, 0, 1)) == "p&q"
    assert describe_function(["p", "q"], (1, 1, 0, 0)) == "~q"


def test_stats(capsys):
    assert main(["stats", C17, C432]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "benchmark,inputs,outputs,gates,inv_buf"
    assert out[1].startswith("c17,5,2,6,")


def test_camo_deterministic(tmp_path, capsys):
    args = ["camo", C432, "--scheme", "extended", "--m", "2", "--fraction", "0.3", "--seed", "3"]
    assert main(args + ["--out-dir", str(tmp_path / "a")]) == 0
    s1 = _json(capsys)
    assert main(args + ["--out-dir", str(tmp_path / "b")]) == 0
    s2 = _json(capsys)
    for name in ("c432.camo.bench", "c432.camo.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert s1["gates_selected"] == s2["gates_selected"] == 51
    assert s1["scheme"] == "ExtendedFixed2"


def test_camo_fraction_zero(tmp_path, capsys):
    assert main(["camo", C17, "--scheme", "2to1", "--fraction", "0", "--out-dir", str(tmp_path)]) == 0
    s = _json(capsys)
    assert s["candidate_lists"] == 0 and s["key_bits"] == 0
    side = json.loads((tmp_path / "c17.camo.json").read_text())
    assert side["lists"] == []


@pytest.mark.parametrize("argv", [["camo", C17, "--scheme", "bogus"],
                                  ["camo", C17, "--scheme", "2to1", "--m", "2"],
                                  ["camo", C17, "--scheme", "dummyvia:3"],
                                  ["camo", C17, "--scheme", "2to1", "--fraction", "1.5"],
                                  ["attack", C17],
                                  []])
def test_usage_errors_exit_2(argv, tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    with pytest.raises(SystemExit) as ei:
        main(argv)
    assert ei.value.code == 2


def test_missing_file_is_error(tmp_path, capsys):
    assert main(["stats", str(tmp_path / "nope.bench")]) == 1


def test_lock_attack_verify_pipeline(tmp_path, capsys):
    locked = tmp_path / "l.bench"
    key = tmp_path / "l.key.json"
    assert main(["lock", C880, "--scheme", "2to1", "--fraction", "0.1", "--seed", "1",
                 "-o", str(locked), "--key", str(key)]) == 0
    info = _json(capsys)
    assert info["key_bits"] > 0
    rec = tmp_path / "rec.json"
    log = tmp_path / "c.csv"
    assert main(["attack", str(locked), "--oracle", C880, "--clause-log", str(log),
                 "--key-out", str(rec), "--report", str(tmp_path / "r.json")]) == 0
    rep = _json(capsys)
    assert rep["status"] == "Solved" and rep["verified"]
    assert json.loads((tmp_path / "r.json").read_text())["dip_count"] == rep["dip_count"]
    rows = [ln for ln in log.read_text().splitlines() if not ln.startswith("#")]
    assert len(rows) == rep["dip_count"] + 2
    assert main(["verify", str(locked), C880, "--key", str(rec)]) == 0
    assert _json(capsys)["verdict"] == "Equivalent"
    assert main(["verify", str(locked), C880, "--key", str(key)]) == 0
    capsys.readouterr()

    k = json.loads(key.read_text())
    bits = k["bits"]
    k["bits"] = ("1" if bits[0] == "0" else "0") + bits[1:]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(k))
    code = main(["verify", str(locked), C880, "--key", str(bad)])
    out = _json(capsys)
    # a flipped key bit may alias an equally valid choice; otherwise it must be caught
    assert (code, out["verdict"]) in {(0, "Equivalent"), (5, "Counterexample")}


def test_wrong_design_gives_counterexample(tmp_path, capsys):
    other = tmp_path / "o.bench"
    text = open(C17).read()
    assert "N23 = NAND(N16, N19)" in text
    other.write_text(text.replace("N23 = NAND(N16, N19)", "N23 = AND(N16, N19)"))
    assert main(["verify", C17, str(other)]) == 5
    out = _json(capsys)
    assert out["verdict"] == "Counterexample" and len(out["pattern"]) == 5


def test_camo_then_self_attack(tmp_path, capsys):
    assert main(["camo", C432, "--scheme", "3to1", "--fraction", "0.1",
                 "--out-dir", str(tmp_path)]) == 0
    _json(capsys)
    assert main(["attack", str(tmp_path / "c432.camo.bench"), "--camo-sidecar",
                 str(tmp_path / "c432.camo.json"), "--out-dir", str(tmp_path)]) == 0
    assert _json(capsys)["status"] == "Solved"
    assert (tmp_path / "c432.camo.clauses.csv").exists()


def test_attack_budgets_exit_codes(tmp_path, capsys):
    locked = tmp_path / "l.bench"
    assert main(["lock", C880, "--scheme", "3to1", "--fraction", "0.3", "-o", str(locked)]) == 0
    capsys.readouterr()
    base = ["attack", str(locked), "--oracle", C880, "--out-dir", str(tmp_path)]
    assert main(base + ["--max-iterations", "2"]) == 4
    assert _json(capsys)["status"] == "BudgetExceeded"
    assert main(base + ["--budget-seconds", "0"]) == 3
    out = _json(capsys)
    assert out["status"] == "TimeOut" and not out["verified"]


def test_sweep_command(tmp_path, capsys):
    plan = tmp_path / "p.json"
    plan.write_text(json.dumps({"benchmarks": [C17], "schemes": ["2to1"], "fractions": [0.5],
                                "seeds": 2, "output_dir": "out"}))
    assert main(["sweep", str(plan), "--quiet", "--workers", "1"]) == 0
    assert _json(capsys)["executed"] == 2
    assert main(["sweep", str(plan), "--quiet", "--workers", "1"]) == 0
    assert _json(capsys)["skipped"] == 2


def test_console_entry_point():
    out = subprocess.run([sys.executable, "-m", "beolcamo.cli", "--version"],
                         capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.startswith("beolcamo ")
