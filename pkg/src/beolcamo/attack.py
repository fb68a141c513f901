"""Oracle-guided SAT attack and SAT-based equivalence checking.

The attack keeps one incremental solver holding a miter: two copies of the
locked circuit that share the data inputs ``X`` (and every net that does not
depend on the key) but have independent keys ``K1`` and ``K2``.  An
activation literal guards the "outputs differ" clause, so the same solver
answers both the DIP query (solve under ``act``) and the final key query
(solve without it).  Each DIP ``x`` with oracle response ``y`` adds
``C(x, K1) = y`` and ``C(x, K2) = y``; since ``x`` is a constant those copies
are constant-folded before encoding.
"""
from __future__ import annotations

import csv
import enum
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .encode import FALSE, TRUE, CircuitEncoder, StrashTable, pack_clauses, xor_lit
from .lock import Key, LockedCircuit, resolve
from .netlist import Netlist, NetlistError, transitive_fanout
from .sat import _kernels as K
from .sat.solver import Solver, SolverConfig, Status
from .sim import simulate, simulate_nets


class AttackError(RuntimeError):
    """The attack reached an internally inconsistent state."""


class AttackStatus(enum.Enum):
    SOLVED = "Solved"
    TIMEOUT = "TimeOut"
    BUDGET_EXCEEDED = "BudgetExceeded"


@dataclass
class AttackConfig:
    """``time_budget`` is wall-clock seconds from the start of the loop;
    ``max_iterations`` bounds the number of DIPs; ``log_interval`` is the
    spacing of progress ticks taken while a single solve runs long."""
    time_budget: float | None = 600.0
    max_iterations: int | None = None
    log_interval: float = 10.0
    verify: bool = True
    solver: SolverConfig = field(default_factory=SolverConfig)


@dataclass
class IterationRecord:
    iteration: int
    wall_seconds: float
    clause_count: int
    variable_count: int
    dip_hex: str


@dataclass
class AttackResult:
    status: AttackStatus
    key: Key | None
    dips: list[np.ndarray]
    iterations: list[IterationRecord]
    ticks: list[tuple[float, int, int, int]]
    oracle_queries: int
    wall_seconds: float
    verified: bool
    n_key: int
    solver_stats: dict = field(default_factory=dict)

    @property
    def dip_count(self) -> int:
        return len(self.dips)

    def summary(self) -> dict:
        return {"status": self.status.value, "dip_count": self.dip_count,
                "oracle_queries": self.oracle_queries, "wall_seconds": round(self.wall_seconds, 4),
                "n_key": self.n_key, "verified": self.verified,
                "key": self.key.bitstring() if self.key is not None else None,
                "final_clauses": self.iterations[-1].clause_count if self.iterations else 0}

    def write_clause_log(self, path, meta: dict | None = None):
        """Per-iteration CSV; metadata goes in leading ``#`` lines."""
        path = Path(path)
        with path.open("w", newline="") as fh:
            for k, v in (meta or {}).items():
                fh.write(f"# {k}: {v}\n")
            w = csv.writer(fh)
            w.writerow(["iteration", "wall_seconds", "clause_count", "variable_count", "dip_hex"])
            for r in self.iterations:
                w.writerow([r.iteration, f"{r.wall_seconds:.6f}", r.clause_count,
                            r.variable_count, r.dip_hex])

    def write_ticks(self, path):
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["wall_seconds", "clause_count", "variable_count", "iteration"])
            for t in self.ticks:
                w.writerow([f"{t[0]:.3f}", t[1], t[2], t[3]])


def read_clause_log(path) -> list[dict]:
    with Path(path).open() as fh:
        rows = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(rows))


def bits_hex(bits: np.ndarray) -> str:
    """Hex of a bit vector, bit ``i`` weighted ``2**i``."""
    v = 0
    for i, b in enumerate(np.asarray(bits, dtype=bool).tolist()):
        if b:
            v |= 1 << i
    return format(v, "x")


def match_ports(names_a: list[str], names_b: list[str], what: str) -> list[int]:
    """Index into ``names_b`` for each entry of ``names_a``.

    Ports are matched by name when both sides use the same names, otherwise
    by position.
    """
    if len(names_a) != len(names_b):
        raise NetlistError(f"{what} count mismatch: {len(names_a)} vs {len(names_b)}")
    if set(names_a) == set(names_b) and len(set(names_a)) == len(names_a):
        pos = {n: i for i, n in enumerate(names_b)}
        return [pos[n] for n in names_a]
    return list(range(len(names_a)))


def _encode_into(solver: Solver, enc: CircuitEncoder, lit, active=None, strash=None):
    e = enc.encode(lit, solver.n_vars, simplify=True, active=active, strash=strash)
    if e.next_var > solver.n_vars:
        solver.new_vars(e.next_var - solver.n_vars)
    solver.add_internal(e.lits, e.offsets)


def _add_lists(solver: Solver, clauses: list, next_var: int):
    if next_var > solver.n_vars:
        solver.new_vars(next_var - solver.n_vars)
    if clauses:
        solver.add_internal(*pack_clauses(clauses))


class Miter:
    """Incremental two-copy miter of a locked circuit."""

    def __init__(self, locked: LockedCircuit, solver: Solver | None = None):
        self.locked = locked
        nl = locked.netlist
        self.solver = solver if solver is not None else Solver()
        s = self.solver
        self.enc = CircuitEncoder(nl)
        keyed = transitive_fanout(nl, locked.key_inputs)
        self.keyed_nets = keyed
        self.keyed_gates = np.array([keyed[g.output] for g in nl.gates], dtype=np.bool_)
        s.new_vars(1)
        s.add_internal(np.array([TRUE], np.int32), np.array([0, 1], np.int64))
        self.data = locked.data_inputs
        x0 = s.new_vars(len(self.data)) - 1
        self.x_lits = 2 * np.arange(x0, x0 + len(self.data), dtype=np.int64)
        k1 = s.new_vars(locked.n_key) - 1
        k2 = s.new_vars(locked.n_key) - 1
        self.k1 = 2 * np.arange(k1, k1 + locked.n_key, dtype=np.int64)
        self.k2 = 2 * np.arange(k2, k2 + locked.n_key, dtype=np.int64)
        keys = np.asarray(locked.key_inputs, dtype=np.int64)
        data = np.asarray(self.data, dtype=np.int64)

        lit1 = self.enc.new_lits()
        lit1[data] = self.x_lits
        lit1[keys] = self.k1
        _encode_into(s, self.enc, lit1)
        lit2 = lit1.copy()
        lit2[keys] = self.k2
        _encode_into(s, self.enc, lit2, active=self.keyed_gates)

        clauses: list = []
        nv = s.n_vars
        diffs = set()
        for o in nl.outputs:
            d, nv = xor_lit(int(lit1[o]), int(lit2[o]), nv, clauses)
            if d != FALSE:
                diffs.add(d)
        self.trivially_equal = not diffs
        self.act = 2 * nv
        nv += 1
        if diffs and TRUE not in diffs:
            clauses.append([self.act ^ 1] + sorted(diffs))
        elif TRUE not in diffs:
            clauses.append([self.act ^ 1])
        _add_lists(s, clauses, nv)

    @property
    def act_dimacs(self) -> int:
        return (self.act >> 1) + 1

    def constrain(self, x: np.ndarray, y: np.ndarray, base_values: np.ndarray):
        """Add ``C(x, K1) = y`` and ``C(x, K2) = y``.

        ``base_values`` are the net values of the locked circuit under ``x``
        (any key); key-independent nets take their constant from it.
        """
        nl = self.locked.netlist
        keys = np.asarray(self.locked.key_inputs, dtype=np.int64)
        const = np.where(base_values, TRUE, FALSE).astype(np.int64)
        for kl in (self.k1, self.k2):
            lit = self.enc.new_lits()
            free = ~self.keyed_nets
            lit[free] = const[free]
            lit[keys] = kl
            _encode_into(self.solver, self.enc, lit, active=self.keyed_gates)
            units = []
            for o, want in zip(nl.outputs, y.tolist()):
                lo = int(lit[o])
                target = lo if want else lo ^ 1
                if target == FALSE:
                    raise AttackError("oracle response contradicts the locked circuit for every key")
                if target != TRUE:
                    units.append([target])
            _add_lists(self.solver, units, self.solver.n_vars)

    def x_values(self, model: np.ndarray) -> np.ndarray:
        return model[self.x_lits >> 1].copy()

    def key_values(self, model: np.ndarray) -> np.ndarray:
        return model[self.k1 >> 1].copy()


def build_miter(locked: LockedCircuit) -> Miter:
    return Miter(locked)


def dip_loop(locked: LockedCircuit, oracle: Netlist, config: AttackConfig | None = None,
             progress=None) -> AttackResult:
    """Run the oracle-guided attack until the miter becomes unsatisfiable.

    ``oracle`` is queried only through simulation.  ``progress(record)`` is
    called after every iteration if given.
    """
    cfg = config or AttackConfig()
    t0 = time.perf_counter()
    nl = locked.netlist
    data_names = [nl.net_names[i] for i in locked.data_inputs]
    in_map = match_ports(data_names, [oracle.net_names[i] for i in oracle.inputs], "primary input")
    out_map = match_ports([nl.net_names[o] for o in nl.outputs],
                          [oracle.net_names[o] for o in oracle.outputs], "primary output")
    in_perm = np.asarray(in_map, dtype=np.int64)
    out_perm = np.asarray(out_map, dtype=np.int64)

    miter = Miter(locked, Solver(cfg.solver))
    s = miter.solver
    deadline = None if cfg.time_budget is None else t0 + cfg.time_budget
    ticks: list = []
    state = {"last": t0, "it": 0}

    def tick():
        now = time.perf_counter()
        if now - state["last"] >= cfg.log_interval:
            state["last"] = now
            ticks.append((now - t0, s.n_clauses_added, s.n_vars, state["it"]))
        return deadline is not None and now > deadline

    iterations = [IterationRecord(0, time.perf_counter() - t0, s.n_clauses_added, s.n_vars, "")]
    dips: list[np.ndarray] = []
    seen: set[bytes] = set()
    queries = 0
    key_idx = set(locked.key_inputs)
    pi_pos = [j for j, i in enumerate(nl.inputs) if i not in key_idx]

    def result(status, key=None, verified=False):
        return AttackResult(status, key, dips, iterations, ticks, queries,
                            time.perf_counter() - t0, verified, locked.n_key,
                            {"conflicts": int(s.st[K.CONFLICTS]), "variables": s.n_vars})

    if not miter.trivially_equal:
        while True:
            if cfg.max_iterations is not None and len(dips) >= cfg.max_iterations:
                return result(AttackStatus.BUDGET_EXCEEDED)
            if tick():
                return result(AttackStatus.TIMEOUT)
            out = s.solve([miter.act_dimacs], interrupt=tick)
            if out.status is Status.UNKNOWN:
                return result(AttackStatus.TIMEOUT)
            if out.status is Status.UNSAT:
                break
            x = miter.x_values(out.model)
            h = np.packbits(x).tobytes()
            if h in seen:
                raise AttackError("solver returned a repeated distinguishing input")
            seen.add(h)
            ox = np.zeros(len(oracle.inputs), dtype=bool)
            ox[in_perm] = x
            y = simulate(oracle, ox)[out_perm]
            queries += 1
            full = np.zeros(len(nl.inputs), dtype=bool)
            full[pi_pos] = x
            base = simulate_nets(nl, full)
            before = s.n_clauses_added
            miter.constrain(x, y, base)
            if s.n_clauses_added <= before:
                raise AttackError("DIP constraint added no clauses")
            dips.append(x)
            state["it"] = len(dips)
            rec = IterationRecord(len(dips), time.perf_counter() - t0, s.n_clauses_added,
                                  s.n_vars, bits_hex(x))
            iterations.append(rec)
            if progress is not None:
                progress(rec)

    out = s.solve([], interrupt=tick)
    if out.status is Status.UNKNOWN:
        return result(AttackStatus.TIMEOUT)
    if out.status is Status.UNSAT:
        raise AttackError("no key is consistent with the oracle responses")
    bits = miter.key_values(out.model)
    key = Key(bits, list(locked.elements))
    verified = False
    if cfg.verify:
        eq = equivalence_check(resolve(locked, key), oracle)
        if not eq.equivalent:
            raise AttackError("recovered key is not functionally correct")
        verified = True
    return result(AttackStatus.SOLVED, key, verified)


@dataclass
class EquivalenceResult:
    equivalent: bool
    counterexample: np.ndarray | None = None   # input pattern of the first netlist
    seconds: float = 0.0

    def __bool__(self):
        return self.equivalent


def equivalence_check(a: Netlist, b: Netlist, time_budget: float | None = None) -> EquivalenceResult:
    """Combinational equivalence of two netlists with matching interfaces.

    Both circuits are encoded over shared input variables with structural
    hashing, so identical sub-structures collapse before the solver runs.
    A counterexample, when found, is confirmed by simulation.
    """
    t0 = time.perf_counter()
    in_map = match_ports([a.net_names[i] for i in a.inputs], [b.net_names[i] for i in b.inputs],
                         "primary input")
    out_map = match_ports([a.net_names[o] for o in a.outputs],
                          [b.net_names[o] for o in b.outputs], "primary output")
    s = Solver()
    s.new_vars(1)
    s.add_internal(np.array([TRUE], np.int32), np.array([0, 1], np.int64))
    x0 = s.new_vars(len(a.inputs)) - 1
    xl = 2 * np.arange(x0, x0 + len(a.inputs), dtype=np.int64)
    ea, eb = CircuitEncoder(a), CircuitEncoder(b)
    table = StrashTable(len(a.gates) + len(b.gates))
    la = ea.new_lits()
    la[np.asarray(a.inputs, dtype=np.int64)] = xl
    lb = eb.new_lits()
    b_in = np.asarray(b.inputs, dtype=np.int64)
    lb[b_in[np.asarray(in_map, dtype=np.int64)]] = xl
    _encode_into(s, ea, la, strash=table)
    _encode_into(s, eb, lb, strash=table)
    clauses: list = []
    nv = s.n_vars
    diffs = set()
    for j, o in enumerate(a.outputs):
        d, nv = xor_lit(int(la[o]), int(lb[b.outputs[out_map[j]]]), nv, clauses)
        if d != FALSE:
            diffs.add(d)
    if not diffs:
        return EquivalenceResult(True, None, time.perf_counter() - t0)
    if TRUE not in diffs:
        clauses.append(sorted(diffs))
    _add_lists(s, clauses, nv)
    out = s.solve([], time_budget=time_budget)
    if out.status is Status.UNKNOWN:
        raise TimeoutError("equivalence check exceeded its time budget")
    if out.status is Status.UNSAT:
        return EquivalenceResult(True, None, time.perf_counter() - t0)
    x = out.model[xl >> 1].copy()
    xb = np.zeros(len(b.inputs), dtype=bool)
    xb[np.asarray(in_map, dtype=np.int64)] = x
    ya = simulate(a, x)
    yb = simulate(b, xb)[np.asarray(out_map, dtype=np.int64)]
    if np.array_equal(ya, yb):
        raise AttackError("equivalence counterexample failed to reproduce in simulation")
    return EquivalenceResult(False, x, time.perf_counter() - t0)
