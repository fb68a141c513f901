"""The pure-numpy path (numba disabled) must give the same answers."""
import json
import os
import subprocess
import sys

SCRIPT = r"""
import json, sys
import numpy as np
from beolcamo import _jit
from beolcamo.attack import dip_loop, equivalence_check
from beolcamo.bench import read_bench
from beolcamo.camouflage import Scheme, acyclic_under, apply_camouflage, random_assignments, select_gates
from beolcamo.lock import lock, resolve
from beolcamo.sat import Solver
from beolcamo.sim import truth_table

nl = read_bench(sys.argv[1])
out = {"numba": _jit.USE_NUMBA}
for sch in ("2to1", "ext2"):
    camo = apply_camouflage(nl, select_gates(nl, 0.1, 2), Scheme.parse(sch), 2)
    out[sch + "_acyclic"] = bool(acyclic_under(camo, random_assignments(camo, 50, 0)).all())
    locked, key = lock(camo)
    res = dip_loop(locked, nl)
    out[sch + "_status"] = res.status.value
    out[sch + "_dips"] = res.dip_count
    out[sch + "_verified"] = res.verified
    out[sch + "_equiv"] = equivalence_check(resolve(locked, key), nl).equivalent
rng = np.random.default_rng(0)
sat = []
for _ in range(30):
    s = Solver()
    s.new_vars(8)
    s.add_clauses([[int(v) * (1 if rng.random() < .5 else -1) for v in rng.choice(8, 3, replace=False) + 1]
                   for _ in range(34)])
    sat.append(s.solve().is_sat)
out["sat"] = sat
print(json.dumps(out))
"""


def _run(bench, no_numba):
    env = dict(os.environ)
    env.pop("BEOLCAMO_NO_NUMBA", None)
    if no_numba:
        env["BEOLCAMO_NO_NUMBA"] = "1"
    p = subprocess.run([sys.executable, "-c", SCRIPT, str(bench)], capture_output=True, text=True,
                       env=env, timeout=600)
    assert p.returncode == 0, p.stderr
    return json.loads(p.stdout.strip().splitlines()[-1])


def test_fallback_matches_numba():
    from conftest import BENCH_DIR
    bench = BENCH_DIR / "c432.bench"
    a = _run(bench, False)
    b = _run(bench, True)
    assert a.pop("numba") is True and b.pop("numba") is False
    assert a == b
    assert a["2to1_status"] == "Solved" and a["ext2_verified"] and a["ext2_equiv"]
