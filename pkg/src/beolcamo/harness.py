"""Experiment sweeps: camouflage fraction x scheme x seed attack grids.

A plan is a JSON object::

    {
      "benchmarks": ["benchmarks/iscas85/c432.bench"],
      "schemes": ["2to1", "3to1", "ext1"],
      "fractions": [0.1, 0.2, 0.3],
      "seeds": 5,
      "budget_seconds": 600,
      "max_iterations": null,
      "output_dir": "sweep-c432",
      "workers": null,
      "clause_logs": false
    }

``seeds`` is a count (seeds ``0..n-1``) or an explicit list; ``fractions``
defaults to 0.1..1.0 in steps of 0.1; relative paths are taken from the plan
file's directory; ``workers`` defaults to the number of cores minus one.

Every cell is keyed by a content hash of its inputs (benchmark file bytes,
scheme, fraction, seed, budgets, tool version).  Rows are appended to
``results.csv`` as cells finish, and cells whose hash is already present are
skipped, so an interrupted sweep can simply be rerun.  Previously written
rows are never modified.  ``summary.csv`` is regenerated from all rows.
"""
from __future__ import annotations

import csv
import hashlib
import json
import multiprocessing as mp
import os
import time
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import __version__
from .attack import AttackConfig, dip_loop
from .bench import read_bench
from .camouflage import Scheme, apply_camouflage, select_gates
from .lock import lock, lock_prior_art

DEFAULT_FRACTIONS = tuple(round(0.1 * i, 1) for i in range(1, 11))
ROW_FIELDS = ["cell_hash", "benchmark", "scheme", "fraction", "seed", "status", "dip_count",
              "oracle_queries", "final_clauses", "wall_seconds", "key_bits", "verified", "error"]
SUMMARY_FIELDS = ["benchmark", "scheme", "fraction", "cells", "solved", "timeout", "errors",
                  "median_dip_count", "median_wall_seconds", "median_key_bits"]


def default_workers() -> int:
    return max(1, (os.cpu_count() or 1) - 1)


@dataclass
class SweepPlan:
    benchmarks: list[str]
    schemes: list[str]
    fractions: list[float] = field(default_factory=lambda: list(DEFAULT_FRACTIONS))
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2])
    budget_seconds: float = 600.0
    max_iterations: int | None = None
    output_dir: str = "sweep"
    workers: int | None = None
    clause_logs: bool = False

    def __post_init__(self):
        if isinstance(self.seeds, int):
            self.seeds = list(range(self.seeds))
        self.seeds = [int(s) for s in self.seeds]
        self.fractions = [float(f) for f in self.fractions]
        for f in self.fractions:
            if not 0.0 < f <= 1.0:
                raise ValueError(f"sweep fraction {f} outside (0, 1]")
        for s in self.schemes:
            Scheme.parse(s)
        if not self.benchmarks or not self.schemes:
            raise ValueError("plan needs at least one benchmark and one scheme")

    @classmethod
    def from_dict(cls, d: dict, base_dir: str | Path = ".") -> "SweepPlan":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown plan keys: {sorted(unknown)}")
        d = dict(d)
        base = Path(base_dir)
        d["benchmarks"] = [str(p if Path(p).is_absolute() else base / p) for p in d["benchmarks"]]
        if "output_dir" in d and not Path(d["output_dir"]).is_absolute():
            d["output_dir"] = str(base / d["output_dir"])
        return cls(**d)

    @classmethod
    def load(cls, path: str | Path) -> "SweepPlan":
        path = Path(path)
        return cls.from_dict(json.loads(path.read_text()), path.parent)

    def to_dict(self) -> dict:
        return asdict(self)

    def cells(self) -> list["Cell"]:
        out = []
        for b in self.benchmarks:
            digest = _file_digest(b)
            for f in self.fractions:
                for seed in self.seeds:
                    for s in self.schemes:
                        out.append(Cell(b, Path(b).stem, Scheme.parse(s).label, s, f, seed,
                                        self.budget_seconds, self.max_iterations, digest))
        return out


@dataclass(frozen=True)
class Cell:
    path: str
    benchmark: str
    scheme: str          # canonical label
    scheme_spec: str
    fraction: float
    seed: int
    budget_seconds: float
    max_iterations: int | None
    bench_digest: str

    @property
    def key(self) -> str:
        d = {"bench": self.bench_digest, "scheme": Scheme.parse(self.scheme_spec).to_dict(),
             "fraction": self.fraction, "seed": self.seed, "budget": self.budget_seconds,
             "max_iterations": self.max_iterations, "version": __version__}
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]


@lru_cache(maxsize=None)
def _file_digest(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@lru_cache(maxsize=8)
def _load(path: str):
    return read_bench(path)


def build_locked(netlist, benchmark: str, scheme: Scheme, fraction: float, seed: int):
    """Lock ``netlist`` with the selection shared by every scheme of a cell."""
    sel = select_gates(netlist, fraction, seed, benchmark)
    if scheme.is_wiring:
        return lock(apply_camouflage(netlist, sel, scheme, seed))
    return lock_prior_art(netlist, sel, scheme, seed)


def run_cell(cell: Cell, clause_dir: str | None = None) -> dict:
    row = {"cell_hash": cell.key, "benchmark": cell.benchmark, "scheme": cell.scheme,
           "fraction": cell.fraction, "seed": cell.seed}
    t0 = time.perf_counter()
    try:
        nl = _load(cell.path)
        locked, _ = build_locked(nl, cell.benchmark, Scheme.parse(cell.scheme_spec),
                                 cell.fraction, cell.seed)
        res = dip_loop(locked, nl, AttackConfig(time_budget=cell.budget_seconds,
                                                max_iterations=cell.max_iterations))
        if clause_dir is not None:
            res.write_clause_log(Path(clause_dir) / f"{cell.key}.csv", meta=_cell_meta(cell))
        row.update(status=res.status.value, dip_count=res.dip_count,
                   oracle_queries=res.oracle_queries,
                   final_clauses=res.iterations[-1].clause_count,
                   wall_seconds=round(res.wall_seconds, 4), key_bits=res.n_key,
                   verified=int(res.verified), error="")
    except Exception as exc:  # recorded, sweep continues
        row.update(status="Error", dip_count="", oracle_queries="", final_clauses="",
                   wall_seconds=round(time.perf_counter() - t0, 4), key_bits="", verified=0,
                   error=f"{type(exc).__name__}: {exc}")
    return row


def _cell_meta(cell: Cell) -> dict:
    return {"tool": f"beolcamo {__version__}", "benchmark": cell.benchmark, "scheme": cell.scheme,
            "fraction": cell.fraction, "seed": cell.seed, "budget_seconds": cell.budget_seconds}


def _run_cell_star(args):
    return run_cell(*args)


@dataclass
class SweepReport:
    rows: list[dict]
    executed: int
    skipped: int
    results_path: Path
    summary: list[dict]


def read_rows(path: Path) -> list[dict]:
    if not path.exists():
        return []
    with path.open(newline="") as fh:
        return list(csv.DictReader(ln for ln in fh if not ln.startswith("#")))


def run_sweep(plan: SweepPlan, workers: int | None = None, progress=None) -> SweepReport:
    out = Path(plan.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = out / "results.csv"
    clause_dir = None
    if plan.clause_logs:
        clause_dir = out / "clauses"
        clause_dir.mkdir(exist_ok=True)
        clause_dir = str(clause_dir)
    done = {r["cell_hash"] for r in read_rows(results)}
    cells = plan.cells()
    todo = [c for c in cells if c.key not in done]
    skipped = len(cells) - len(todo)
    new = not results.exists()
    n_workers = workers or plan.workers or default_workers()
    with results.open("a", newline="") as fh:
        if new:
            fh.write(f"# tool: beolcamo {__version__}\n")
            fh.write(f"# plan: {json.dumps(plan.to_dict(), sort_keys=True)}\n")
        w = csv.DictWriter(fh, fieldnames=ROW_FIELDS)
        if new:
            w.writeheader()

        def emit(row):
            w.writerow(row)
            fh.flush()
            if progress is not None:
                progress(row)

        if n_workers <= 1 or len(todo) <= 1:
            for c in todo:
                emit(run_cell(c, clause_dir))
        else:
            with mp.get_context("spawn").Pool(n_workers) as pool:
                for row in pool.imap_unordered(_run_cell_star, [(c, clause_dir) for c in todo]):
                    emit(row)
    wanted = {c.key for c in cells}
    rows = [r for r in read_rows(results) if r["cell_hash"] in wanted]
    summary = summarize(rows)
    write_summary(out / "summary.csv", summary, plan)
    return SweepReport(rows, len(todo), skipped, results, summary)


def summarize(rows: list[dict]) -> list[dict]:
    """Medians per (benchmark, scheme, fraction) over Solved cells."""
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        groups.setdefault((r["benchmark"], r["scheme"], float(r["fraction"])), []).append(r)
    out = []
    for (b, s, f), rs in sorted(groups.items()):
        solved = [r for r in rs if r["status"] == "Solved"]
        med = lambda k: float(np.median([float(r[k]) for r in solved])) if solved else ""  # noqa: E731
        out.append({"benchmark": b, "scheme": s, "fraction": f, "cells": len(rs),
                    "solved": len(solved),
                    "timeout": sum(r["status"] == "TimeOut" for r in rs),
                    "errors": sum(r["status"] == "Error" for r in rs),
                    "median_dip_count": med("dip_count"),
                    "median_wall_seconds": med("wall_seconds"),
                    "median_key_bits": med("key_bits")})
    return out


def write_summary(path: Path, summary: list[dict], plan: SweepPlan):
    with path.open("w", newline="") as fh:
        fh.write(f"# tool: beolcamo {__version__}\n")
        fh.write(f"# seeds: {plan.seeds}\n")
        w = csv.DictWriter(fh, fieldnames=SUMMARY_FIELDS)
        w.writeheader()
        w.writerows(summary)
