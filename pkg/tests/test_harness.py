import json

import pytest

from beolcamo.camouflage import Scheme, select_gates
from beolcamo.harness import (ROW_FIELDS, SweepPlan, build_locked, run_cell, run_sweep,
                              summarize)
from conftest import BENCH_DIR

C432 = str(BENCH_DIR / "c432.bench")
C17 = str(BENCH_DIR / "c17.bench")


def _plan(tmp_path, **kw):
    d = {"benchmarks": [C432], "schemes": ["2to1", "3to1", "ext1"], "fractions": [0.1, 0.2, 0.3],
         "seeds": 5, "max_iterations": 2, "output_dir": str(tmp_path / "out")}
    d.update(kw)
    return SweepPlan.from_dict(d)


def test_plan_parsing(tmp_path):
    p = tmp_path / "plan.json"
    p.write_text(json.dumps({"benchmarks": ["../x/c17.bench"], "schemes": ["ext2"], "seeds": [4, 9],
                             "output_dir": "res"}))
    plan = SweepPlan.load(p)
    assert plan.seeds == [4, 9] and len(plan.fractions) == 10
    assert plan.fractions[0] == 0.1 and plan.fractions[-1] == 1.0
    assert plan.output_dir == str(tmp_path / "res")
    assert plan.benchmarks == [str(tmp_path / "../x/c17.bench")]
    assert plan.budget_seconds == 600.0


@pytest.mark.parametrize("bad", [{"schemes": ["nonsense"]}, {"fractions": [0.0]},
                                 {"fractions": [1.2]}, {"colour": "red"}, {"schemes": []}])
def test_plan_errors(tmp_path, bad):
    with pytest.raises((ValueError, TypeError)):
        _plan(tmp_path, **bad)


def test_cell_hash_sensitivity(tmp_path):
    cells = _plan(tmp_path).cells()
    assert len({c.key for c in cells}) == len(cells) == 45
    again = _plan(tmp_path).cells()
    assert [c.key for c in cells] == [c.key for c in again]
    other = _plan(tmp_path, budget_seconds=10).cells()
    assert not {c.key for c in cells} & {c.key for c in other}


def test_sweep_rows_and_resume(tmp_path):
    plan = _plan(tmp_path)
    rep = run_sweep(plan, workers=1)
    assert rep.executed == 45 and rep.skipped == 0 and len(rep.rows) == 45
    assert {r["status"] for r in rep.rows} <= {"Solved", "BudgetExceeded"}
    text = rep.results_path.read_text()
    assert text.startswith("# tool: beolcamo")
    header = next(ln for ln in text.splitlines() if not ln.startswith("#"))
    assert header.split(",") == ROW_FIELDS
    assert len(rep.summary) == 9 and all(s["cells"] == 5 for s in rep.summary)

    rep2 = run_sweep(plan, workers=1)
    assert rep2.executed == 0 and rep2.skipped == 45
    assert rep.results_path.read_text() == text
    summary = (tmp_path / "out" / "summary.csv").read_text()
    assert "median_dip_count" in summary


def test_interrupted_sweep_appends_only(tmp_path):
    small = _plan(tmp_path, fractions=[0.1], seeds=[0])
    run_sweep(small, workers=1)
    before = (tmp_path / "out" / "results.csv").read_text()
    rep = run_sweep(_plan(tmp_path, fractions=[0.1], seeds=[0, 1]), workers=1)
    assert rep.executed == 3 and rep.skipped == 3
    after = rep.results_path.read_text()
    assert after.startswith(before)


def test_selection_shared_across_schemes():
    from beolcamo.bench import read_bench
    nl = read_bench(C432)
    sel = select_gates(nl, 0.2, 1, "c432")
    want = {nl.net_names[nl.gates[g].output] for g in sel.gates}
    for s in ("2to1", "3to1", "ext1"):
        locked, _ = build_locked(nl, "c432", Scheme.parse(s), 0.2, 1)
        assert want <= {e.gate for e in locked.elements}


def test_error_rows_are_recorded(tmp_path):
    plan = _plan(tmp_path, benchmarks=[C17], schemes=["3to1"], fractions=[1.0], seeds=[0])
    rep = run_sweep(plan, workers=1)
    assert rep.rows[0]["status"] == "Error" and "CamouflageError" in rep.rows[0]["error"]
    assert rep.summary[0]["errors"] == 1 and rep.summary[0]["median_dip_count"] == ""


def test_run_cell_clause_log(tmp_path):
    cell = _plan(tmp_path, max_iterations=None, fractions=[0.1], seeds=[0],
                 schemes=["2to1"]).cells()[0]
    row = run_cell(cell, str(tmp_path))
    assert row["status"] == "Solved" and row["verified"] == 1
    log = (tmp_path / f"{cell.key}.csv").read_text()
    assert "# scheme: TwoToOne" in log


def test_summarize_medians():
    rows = [{"benchmark": "b", "scheme": "S", "fraction": "0.1", "status": st, "dip_count": d,
             "wall_seconds": "1", "key_bits": "4"}
            for st, d in [("Solved", "3"), ("Solved", "5"), ("Solved", "10"), ("TimeOut", "99")]]
    (s,) = summarize(rows)
    assert s["median_dip_count"] == 5.0 and s["solved"] == 3 and s["timeout"] == 1


def test_parallel_matches_serial(tmp_path):
    plan_a = _plan(tmp_path / "a", fractions=[0.1], seeds=[0, 1], schemes=["2to1"])
    plan_b = _plan(tmp_path / "b", fractions=[0.1], seeds=[0, 1], schemes=["2to1"])
    ra = run_sweep(plan_a, workers=1)
    rb = run_sweep(plan_b, workers=2)
    key = lambda r: r["cell_hash"]  # noqa: E731
    strip = lambda rs: [(r["cell_hash"], r["status"], r["dip_count"]) for r in sorted(rs, key=key)]  # noqa: E731
    assert strip(ra.rows) == strip(rb.rows)
