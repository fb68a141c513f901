"""``beolcamo`` command-line interface.

Subcommands: ``camo``, ``lock``, ``attack``, ``verify``, ``sweep``, ``stats``
and ``counts``.  Every command is deterministic given its seed: rerunning
with the same inputs and flags writes byte-identical files (attack reports
differ only in wall-clock fields).

Exit codes: 0 success (Solved / Equivalent), 1 error, 2 usage error,
3 TimeOut, 4 BudgetExceeded, 5 Counterexample.
"""
from __future__ import annotations

import argparse
import json
import sys
from itertools import product
from pathlib import Path

import numpy as np

from . import __version__
from .attack import AttackConfig, AttackStatus, dip_loop, equivalence_check
from .bench import read_bench
from .camouflage import (Scheme, SelectionSet, apply_camouflage, empty_selection,
                         function_count, load_camouflaged, realizable_functions, select_gates)
from .lock import Key, LockedCircuit, key_width, lock, lock_prior_art, resolve
from .netlist import GateKind, stats

EXIT_OK, EXIT_ERROR, EXIT_USAGE, EXIT_TIMEOUT, EXIT_BUDGET, EXIT_CEX = 0, 1, 2, 3, 4, 5
_STATUS_EXIT = {AttackStatus.SOLVED: EXIT_OK, AttackStatus.TIMEOUT: EXIT_TIMEOUT,
                AttackStatus.BUDGET_EXCEEDED: EXIT_BUDGET}


class UsageError(Exception):
    pass


def _meta(args, **extra) -> dict:
    d = {"tool": "beolcamo", "version": __version__, "command": args.command}
    d.update(extra)
    return d


def _scheme(args) -> Scheme:
    text = args.scheme
    if getattr(args, "m", None) is not None:
        if not text.lower().startswith("ext"):
            raise UsageError("--m only applies to the extended scheme")
        text = f"extended:m={args.m}"
    try:
        return Scheme.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _selection(args, netlist, name):
    if getattr(args, "selection", None):
        return SelectionSet.load(args.selection)
    if args.fraction == 0:
        return empty_selection(netlist, args.seed)
    if not 0 < args.fraction <= 1:
        raise UsageError("--fraction must be in [0, 1]")
    return select_gates(netlist, args.fraction, args.seed, name)


def _out_paths(inp: Path, out: str | None, suffix: str, out_dir: str | None):
    if out:
        return Path(out)
    d = Path(out_dir) if out_dir else Path(".")
    d.mkdir(parents=True, exist_ok=True)
    return d / f"{inp.stem}.{suffix}"


# -- commands -------------------------------------------------------------------

def cmd_camo(args) -> int:
    inp = Path(args.input)
    nl = read_bench(inp)
    scheme = _scheme(args)
    if not scheme.is_wiring:
        raise UsageError(f"{scheme.label} is a locking model; use 'beolcamo lock'")
    sel = _selection(args, nl, inp.stem)
    camo = apply_camouflage(nl, sel, scheme, args.seed, radius=args.radius,
                            disguised_prob=args.disguised_prob)
    bench = _out_paths(inp, args.output, "camo.bench", args.out_dir)
    sidecar = Path(args.sidecar) if args.sidecar else bench.with_suffix(".json")
    camo.save(bench, sidecar)
    if args.selection_out:
        sel.save(args.selection_out)
    summary = {
        "benchmark": inp.stem, "scheme": scheme.label, "fraction": sel.fraction, "seed": args.seed,
        "gates_selected": len(sel.gates), "gates_camouflaged": len(camo.gates),
        "inv_buf_transformed": len(camo.transforms), "ties_inserted": len(camo.ties),
        "candidate_lists": len(camo.lists),
        "key_bits": int(sum(key_width(len(cl.candidates)) for cl in camo.lists)),
        "bench": str(bench), "sidecar": str(sidecar)}
    _print(summary, args)
    return EXIT_OK


def cmd_lock(args) -> int:
    inp = Path(args.input)
    if args.camo_sidecar:
        camo = load_camouflaged(inp, args.camo_sidecar)
        locked, key = lock(camo)
        label = camo.scheme.label
    else:
        if not args.scheme:
            raise UsageError("lock needs --scheme or --camo-sidecar")
        nl = read_bench(inp)
        scheme = _scheme(args)
        sel = _selection(args, nl, inp.stem)
        if scheme.is_wiring:
            locked, key = lock(apply_camouflage(nl, sel, scheme, args.seed, radius=args.radius))
        else:
            locked, key = lock_prior_art(nl, sel, scheme, args.seed, radius=args.radius)
        label = scheme.label
    out = _out_paths(inp, args.output, "locked.bench", args.out_dir)
    key_path = Path(args.key) if args.key else out.with_suffix(".key.json")
    locked.save(out)
    key.save(key_path)
    _print({"scheme": label, "key_bits": locked.n_key, "locked": str(out), "key": str(key_path),
            "gates": len(locked.netlist.gates)}, args)
    return EXIT_OK


def cmd_attack(args) -> int:
    inp = Path(args.input)
    if args.camo_sidecar:
        camo = load_camouflaged(inp, args.camo_sidecar)
        locked, _ = lock(camo)
        oracle = camo.resolve(camo.secret_indices())
    else:
        if not args.oracle:
            raise UsageError("attack needs --oracle (or --camo-sidecar for self-attack)")
        locked = LockedCircuit.load(inp)
        oracle = read_bench(args.oracle)
    cfg = AttackConfig(time_budget=args.budget_seconds, max_iterations=args.max_iterations,
                       log_interval=args.log_interval, verify=not args.no_verify)
    res = dip_loop(locked, oracle, cfg)
    meta = _meta(args, locked=str(inp), budget_seconds=args.budget_seconds,
                 max_iterations=args.max_iterations)
    clause_log = _out_paths(inp, args.clause_log, "clauses.csv", args.out_dir)
    res.write_clause_log(clause_log, meta=meta)
    if args.ticks:
        res.write_ticks(args.ticks)
    report = dict(meta, **res.summary(), clause_log=str(clause_log))
    if args.report:
        Path(args.report).write_text(json.dumps(report, indent=1) + "\n")
    if args.key_out and res.key is not None:
        res.key.save(args.key_out)
    _print(report, args)
    return _STATUS_EXIT[res.status]


def cmd_verify(args) -> int:
    a = read_bench(args.first)
    if args.key:
        key = Key.load(args.key)
        a = resolve(LockedCircuit.from_netlist(a), key)
    b = read_bench(args.second)
    eq = equivalence_check(a, b, time_budget=args.budget_seconds)
    if eq.equivalent:
        _print({"verdict": "Equivalent", "seconds": round(eq.seconds, 4)}, args)
        return EXIT_OK
    cex = {a.net_names[i]: int(v) for i, v in zip(a.inputs, eq.counterexample)}
    _print({"verdict": "Counterexample",
            "pattern": "".join("1" if v else "0" for v in eq.counterexample),
            "inputs": cex}, args)
    return EXIT_CEX


def cmd_sweep(args) -> int:
    from .harness import SweepPlan, run_sweep
    plan = SweepPlan.load(args.plan)
    if args.output_dir:
        plan.output_dir = args.output_dir

    def progress(row):
        if not args.quiet:
            print(f"{row['benchmark']} {row['scheme']} {row['fraction']} seed={row['seed']}: "
                  f"{row['status']} dips={row['dip_count']}", file=sys.stderr)

    rep = run_sweep(plan, workers=args.workers, progress=progress)
    _print({"results": str(rep.results_path), "executed": rep.executed, "skipped": rep.skipped,
            "rows": len(rep.rows), "errors": sum(r["status"] == "Error" for r in rep.rows)}, args)
    return EXIT_OK


def cmd_stats(args) -> int:
    rows = []
    for p in args.inputs:
        s = stats(read_bench(p))
        rows.append({"benchmark": Path(p).stem, "inputs": s.inputs, "outputs": s.outputs,
                     "gates": s.gates, "inv_buf": s.inv_buf,
                     "per_kind": {k: v for k, v in s.per_kind.items() if v}})
    if args.json:
        print(json.dumps(rows, indent=1))
    else:
        print("benchmark,inputs,outputs,gates,inv_buf")
        for r in rows:
            print(f"{r['benchmark']},{r['inputs']},{r['outputs']},{r['gates']},{r['inv_buf']}")
    return EXIT_OK


_KINDS = [GateKind.AND, GateKind.NAND, GateKind.OR, GateKind.NOR, GateKind.XOR, GateKind.XNOR]


def cmd_counts(args) -> int:
    schemes = [Scheme.two_to_one(), Scheme.three_to_one()] + [Scheme.extended(m) for m in args.m]
    if args.list:
        kind = GateKind(args.list.upper())
        try:
            scheme = Scheme.parse(args.scheme) if args.scheme else Scheme.extended(2)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        variables, funcs = realizable_functions(kind, scheme)
        names = sorted(describe_function(variables, f) for f in funcs)
        print(f"# {kind.value} under {scheme.label}: {len(names)} functions")
        for n in names:
            print(n)
        return EXIT_OK
    print("scheme," + ",".join(k.value for k in _KINDS))
    for s in schemes:
        print(s.label + "," + ",".join(str(function_count(k, s)) for k in _KINDS))
    return EXIT_OK


_TWO_VAR = {(0, 0, 0, 1): "{0}&{1}", (0, 1, 1, 1): "{0}|{1}", (0, 1, 1, 0): "{0}^{1}",
            (1, 1, 1, 0): "~({0}&{1})", (1, 0, 0, 0): "~({0}|{1})", (1, 0, 0, 1): "~({0}^{1})",
            (0, 0, 1, 0): "{0}&~{1}", (0, 1, 0, 0): "~{0}&{1}", (1, 1, 0, 1): "~{0}|{1}",
            (1, 0, 1, 1): "{0}|~{1}"}


def describe_function(variables: list[str], tt: tuple) -> str:
    """Readable form of a truth table over ``variables`` (at most two in support)."""
    n = len(variables)
    arr = np.asarray(tt, dtype=np.int64)
    rows = np.arange(1 << n)
    support = [j for j in range(n)
               if not np.array_equal(arr[rows & ~(1 << j)], arr[rows | (1 << j)])]
    if not support:
        return str(int(arr[0]))
    if len(support) == 1:
        j = support[0]
        return variables[j] if arr[1 << j] == 1 and arr[0] == 0 else "~" + variables[j]
    if len(support) == 2:
        i, j = support
        key = tuple(int(arr[(bi << i) | (bj << j)]) for bi, bj in product((0, 1), repeat=2))
        return _TWO_VAR[key].format(variables[i], variables[j])
    return "tt:" + "".join(str(int(b)) for b in arr)


# -- entry point ----------------------------------------------------------------

def _print(d: dict, args):
    print(json.dumps(d, indent=1, default=str))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="beolcamo", description="BEOL interconnect camouflaging "
                                 "and SAT-attack evaluation toolkit.")
    ap.add_argument("--version", action="version", version=f"beolcamo {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def sel_flags(p, scheme_required):
        p.add_argument("--scheme", required=scheme_required,
                       help="2to1, 3to1, extended (with --m), ext1, ext2, ambiguous[:K1,K2,..], "
                            "muxpair[:input], dummyvia:N")
        p.add_argument("--m", type=int, help="regular wires of the extended scheme")
        p.add_argument("--fraction", type=float, default=0.1, help="fraction of gates (0..1]")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--selection", help="reuse a saved selection set (JSON)")
        p.add_argument("--radius", type=int, default=5, help="dummy-net neighbourhood radius")

    p = sub.add_parser("camo", help="camouflage a BENCH netlist")
    p.add_argument("input")
    sel_flags(p, True)
    p.add_argument("--disguised-prob", type=float, default=0.2)
    p.add_argument("-o", "--output", help="camouflaged BENCH path")
    p.add_argument("--sidecar", help="sidecar JSON path (default: next to the BENCH)")
    p.add_argument("--selection-out", help="also write the selection set")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_camo)

    p = sub.add_parser("lock", help="write the attacker's key-controlled netlist")
    p.add_argument("input", help="original BENCH (or camouflaged BENCH with --camo-sidecar)")
    sel_flags(p, False)
    p.add_argument("--camo-sidecar")
    p.add_argument("-o", "--output")
    p.add_argument("--key", help="key file path (default: <output>.key.json)")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_lock)

    p = sub.add_parser("attack", help="oracle-guided SAT attack")
    p.add_argument("input", help="locked BENCH (or camouflaged BENCH with --camo-sidecar)")
    p.add_argument("--oracle", help="original BENCH queried as a black box")
    p.add_argument("--camo-sidecar", help="self-attack a camouflaged design")
    p.add_argument("--budget-seconds", type=float, default=600.0)
    p.add_argument("--max-iterations", type=int)
    p.add_argument("--log-interval", type=float, default=10.0)
    p.add_argument("--clause-log", help="per-iteration clause CSV path")
    p.add_argument("--ticks", help="periodic progress CSV path")
    p.add_argument("--report", help="JSON report path")
    p.add_argument("--key-out", help="write the recovered key")
    p.add_argument("--no-verify", action="store_true", help="skip the final equivalence check")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("verify", help="combinational equivalence check")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--key", help="resolve FIRST (a locked netlist) with this key first")
    p.add_argument("--budget-seconds", type=float)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="run a sweep plan (JSON)")
    p.add_argument("plan")
    p.add_argument("--workers", type=int)
    p.add_argument("--output-dir")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("stats", help="interface and gate counts")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("counts", help="realizable-function counts per camouflaged gate")
    p.add_argument("--m", type=int, nargs="+", default=[1, 2])
    p.add_argument("--list", metavar="KIND", help="list the functions of one gate kind")
    p.add_argument("--scheme", help="scheme for --list (default ext2)")
    p.set_defaults(func=cmd_counts)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        ap.error(str(exc))
    except (OSError, ValueError, RuntimeError, KeyError) as exc:
        print(f"beolcamo {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
