"""Time the compiled kernels against the interpreted fallback.

Each backend runs in its own subprocess (``BEOLCAMO_NO_NUMBA=1`` selects the
fallback), so numba compilation is excluded by a warm-up call.  Usage::

    python benchmarks/bench_kernels.py [--repeat 3] [--json out.json]
"""
import argparse
import json
import os
import subprocess
import sys
import time
from pathlib import Path

HERE = Path(__file__).resolve().parent
C432 = HERE / "iscas85" / "c432.bench"
C880 = HERE / "iscas85" / "c880.bench"


def _best(fn, repeat):
    fn()  # warm-up (jit compile)
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def workloads(repeat: int) -> dict:
    import numpy as np

    from beolcamo.attack import dip_loop
    from beolcamo.bench import read_bench
    from beolcamo.camouflage import Scheme, acyclic_under, apply_camouflage, random_assignments, select_gates
    from beolcamo.encode import CircuitEncoder
    from beolcamo.lock import lock
    from beolcamo.sat import Solver
    from beolcamo.sim import simulate

    nl = read_bench(C880)
    rng = np.random.default_rng(0)
    pats = rng.random((4096, len(nl.inputs))) < 0.5
    camo = apply_camouflage(nl, select_gates(nl, 0.3, 0), Scheme.extended(2), 0)
    choices = random_assignments(camo, 200, 0)
    enc = CircuitEncoder(nl)

    def encode():
        lit = enc.new_lits()
        lit[nl.inputs] = 2 * np.arange(1, len(nl.inputs) + 1)
        enc.encode(lit, len(nl.inputs) + 1)

    def sat():
        r = np.random.default_rng(1)
        s = Solver()
        n = 60
        s.new_vars(n)
        for _ in range(int(4.2 * n)):
            v = r.choice(n, 3, replace=False) + 1
            s.add_clause([int(x) if r.random() < .5 else -int(x) for x in v])
        s.solve()

    small = read_bench(C432)
    locked, _ = lock(apply_camouflage(small, select_gates(small, 0.05, 0), Scheme.two_to_one(), 0))

    def attack():
        dip_loop(locked, small)

    return {
        "simulate_c880_4096": _best(lambda: simulate(nl, pats), repeat),
        "encode_c880": _best(encode, repeat),
        "acyclic_c880_200": _best(lambda: acyclic_under(camo, choices), repeat),
        "sat_random3_60": _best(sat, repeat),
        "attack_c432_5pct": _best(attack, repeat),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json")
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args(argv)
    if args.worker:
        print(json.dumps(workloads(args.repeat)))
        return 0
    results = {}
    for label, flag in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, BEOLCAMO_NO_NUMBA=flag)
        out = subprocess.run([sys.executable, __file__, "--worker", "--repeat", str(args.repeat)],
                             env=env, check=True, capture_output=True, text=True).stdout
        results[label] = json.loads(out.strip().splitlines()[-1])
    print(f"{'workload':24s} {'numba [s]':>10s} {'fallback [s]':>13s} {'speedup':>8s}")
    for k in results["numba"]:
        a, b = results["numba"][k], results["numpy"][k]
        print(f"{k:24s} {a:10.4f} {b:13.4f} {b / a:8.1f}x")
    if args.json:
        Path(args.json).write_text(json.dumps(results, indent=1) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
