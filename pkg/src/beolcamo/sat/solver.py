"""Incremental CDCL SAT solver.

The public interface speaks DIMACS literals (``v`` / ``-v`` with ``v >= 1``).
Search runs inside the kernels of :mod:`beolcamo.sat._kernels`; this class
owns the arrays, grows them, schedules Luby restarts and reduces the learnt
clause database.  Every model is checked against all clauses ever added
before it is returned.
"""
from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K


class Status(enum.Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    UNKNOWN = "UNKNOWN"      # a conflict or time budget ran out


class SolverError(RuntimeError):
    pass


@dataclass
class SolverConfig:
    restart_base: int = 64
    var_decay: float = 0.95
    clause_decay: float = 0.999
    learnt_factor: float = 1.0 / 3.0
    learnt_min: int = 2000
    learnt_growth: float = 1.1
    check_models: bool = True
    #: conflicts per kernel call between wall-clock checks
    slice_conflicts: int = 2000


@dataclass
class SolveOutcome:
    status: Status
    model: np.ndarray | None = None        # bool per variable, index ``v - 1``
    core_empty: bool = False               # UNSAT independent of the assumptions
    stats: dict = field(default_factory=dict)

    def value(self, lit: int) -> bool:
        if self.model is None:
            raise SolverError("no model available")
        v = self.model[abs(lit) - 1]
        return bool(v) if lit > 0 else not bool(v)

    @property
    def is_sat(self) -> bool:
        return self.status is Status.SAT


def luby(y: float, x: int) -> float:
    """``x``-th element (0-based) of the Luby sequence scaled by powers of ``y``."""
    size, seq = 1, 0
    while size < x + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != x:
        size = (size - 1) >> 1
        seq -= 1
        x = x % size
    return y ** seq


def to_internal(lits) -> np.ndarray:
    a = np.asarray(lits, dtype=np.int64)
    return (2 * (np.abs(a) - 1) + (a < 0)).astype(np.int32)


class Solver:
    """CDCL solver with two-watched-literal propagation, first-UIP learning,
    VSIDS, phase saving, Luby restarts and assumptions.

    Clauses can be added between :meth:`solve` calls; learnt clauses are kept.
    """

    def __init__(self, config: SolverConfig | None = None):
        self.config = config or SolverConfig()
        self._cap_v = 0
        self.VI = np.zeros((K.V_ROWS, 0), dtype=np.int32)
        self.LI = np.zeros((2, 0), dtype=np.int32)
        self.act = np.zeros(0, dtype=np.float64)
        self.CI = np.zeros((K.C_ROWS, 1024), dtype=np.int32)
        self.cact = np.zeros(1024, dtype=np.float64)
        self.lits = np.zeros(8192, dtype=np.int32)
        self.st = np.zeros(K.ST_SIZE, dtype=np.int64)
        self.st[K.OK] = 1
        self.fst = np.array([1.0, 1.0, self.config.var_decay, self.config.clause_decay])
        # every clause as given, for model checking
        self._olits = np.zeros(8192, dtype=np.int32)
        self._ooff = np.zeros(1025, dtype=np.int64)
        self._n_orig = 0
        self.n_clauses_added = 0
        self._max_learnts = float(self.config.learnt_min)
        self._grow_vars(64)

    # -- sizing ---------------------------------------------------------
    @property
    def n_vars(self) -> int:
        return int(self.st[K.NV])

    @property
    def ok(self) -> bool:
        return bool(self.st[K.OK])

    def _grow_vars(self, need: int):
        if need <= self._cap_v:
            return
        cap = max(need, 2 * self._cap_v, 64)
        VI = np.zeros((K.V_ROWS, cap), dtype=np.int32)
        VI[:, :self._cap_v] = self.VI
        VI[K.HEAPIDX, self._cap_v:] = -1
        # trail limits are indexed by decision level, which is bounded by nvars
        LI = np.zeros((2, 2 * cap), dtype=np.int32)
        LI[:, :2 * self._cap_v] = self.LI
        LI[K.WHEAD, 2 * self._cap_v:] = -1
        act = np.zeros(cap)
        act[:self._cap_v] = self.act
        self.VI, self.LI, self.act, self._cap_v = VI, LI, act, cap

    def _grow_clauses(self, n_clauses: int, n_lits: int):
        if n_clauses > self.CI.shape[1]:
            cap = max(n_clauses, 2 * self.CI.shape[1])
            CI = np.zeros((K.C_ROWS, cap), dtype=np.int32)
            CI[:, :self.CI.shape[1]] = self.CI
            cact = np.zeros(cap)
            cact[:self.cact.shape[0]] = self.cact
            self.CI, self.cact = CI, cact
        if n_lits > self.lits.shape[0]:
            cap = max(n_lits, 2 * self.lits.shape[0])
            if cap >= 2 ** 31:
                raise SolverError("literal pool exceeds int32 addressing")
            lits = np.zeros(cap, dtype=np.int32)
            lits[:self.st[K.NL]] = self.lits[:self.st[K.NL]]
            self.lits = lits

    # -- problem construction ------------------------------------------
    def new_var(self) -> int:
        return self.new_vars(1)

    def new_vars(self, k: int) -> int:
        """Create ``k`` variables and return the DIMACS index of the first."""
        first = self.n_vars + 1
        if k <= 0:
            return first
        self._grow_vars(self.n_vars + k)
        K.new_vars(self.VI, self.LI, self.act, self.st, k)
        return first

    def add_clause(self, lits) -> None:
        lits = [int(x) for x in lits]
        for x in lits:
            if x == 0:
                raise SolverError("0 is not a literal")
        flat = to_internal(lits)
        self.add_internal(flat, np.array([0, len(flat)], dtype=np.int64))

    def add_clauses(self, clauses) -> None:
        clauses = [list(map(int, c)) for c in clauses]
        off = np.zeros(len(clauses) + 1, dtype=np.int64)
        off[1:] = np.cumsum([len(c) for c in clauses])
        flat = to_internal([x for c in clauses for x in c])
        if np.any(flat < 0) or any(0 in c for c in clauses):
            raise SolverError("0 is not a literal")
        self.add_internal(flat, off)

    def add_internal(self, flat: np.ndarray, off: np.ndarray) -> None:
        """Batch-add clauses given as internal literals (``2*(v-1) + neg``)
        with CSR offsets.  Variables must already exist."""
        flat = np.ascontiguousarray(flat, dtype=np.int32)
        off = np.ascontiguousarray(off, dtype=np.int64)
        n = off.shape[0] - 1
        if n <= 0:
            return
        if flat.size and int(flat.max()) >= 2 * self.n_vars:
            raise SolverError(f"literal refers to variable > {self.n_vars}")
        if self.st[K.DL] != 0:
            K.cancel_until(self.VI, self.LI, self.act, self.st, 0)
        self._store_original(flat, off)
        self.n_clauses_added += n
        self._grow_clauses(int(self.st[K.NC]) + n + 1, int(self.st[K.NL]) + flat.size + 1)
        K.add_clauses(flat, off, self.VI, self.LI, self.CI, self.lits, self.cact, self.st)

    def _store_original(self, flat, off):
        n = off.shape[0] - 1
        base = self._ooff[self._n_orig]
        need_l = base + flat.size
        if need_l > self._olits.shape[0]:
            a = np.zeros(max(need_l, 2 * self._olits.shape[0]), dtype=np.int32)
            a[:base] = self._olits[:base]
            self._olits = a
        if self._n_orig + n + 1 > self._ooff.shape[0]:
            a = np.zeros(max(self._n_orig + n + 1, 2 * self._ooff.shape[0]), dtype=np.int64)
            a[:self._n_orig + 1] = self._ooff[:self._n_orig + 1]
            self._ooff = a
        self._olits[base:need_l] = flat
        self._ooff[self._n_orig + 1:self._n_orig + n + 1] = base + off[1:]
        self._n_orig += n

    # -- search ---------------------------------------------------------
    def solve(self, assumptions=(), conflict_budget: int | None = None,
              time_budget: float | None = None, interrupt=None) -> SolveOutcome:
        """Decide satisfiability under ``assumptions`` (DIMACS literals).

        Returns ``Status.UNKNOWN`` if ``conflict_budget`` conflicts or
        ``time_budget`` seconds are exhausted first, or if ``interrupt()``
        returns true.  ``interrupt`` is polled at fixed conflict intervals,
        so it can log progress without perturbing the search.
        """
        t0 = time.perf_counter()
        c0 = int(self.st[K.CONFLICTS])
        ass = to_internal(list(assumptions)) if len(assumptions) else np.zeros(0, np.int32)
        if ass.size and int(ass.max()) >= 2 * self.n_vars:
            raise SolverError("assumption on unknown variable")
        if self.st[K.DL] != 0:
            K.cancel_until(self.VI, self.LI, self.act, self.st, 0)
        if not self.ok:
            return self._outcome(Status.UNSAT, t0, c0, core_empty=True)
        cfg = self.config
        self._max_learnts = max(self._max_learnts,
                                cfg.learnt_factor * (self.st[K.NC] - self.st[K.NLEARNT]))
        restart_i = 0
        while True:
            limit = int(cfg.restart_base * luby(2, restart_i))
            restart_i += 1
            left = limit
            while True:
                pause = cfg.slice_conflicts
                if conflict_budget is not None:
                    pause = min(pause, max(0, c0 + conflict_budget - int(self.st[K.CONFLICTS])))
                self._grow_clauses(int(self.st[K.NC]) + 2, int(self.st[K.NL]) + 2 * self.n_vars + 2)
                r = K.search(left, pause, ass, self.VI, self.LI, self.CI, self.lits,
                             self.act, self.cact, self.st, self.fst)
                left -= int(self.st[K.LASTC])
                if r == K.R_SAT:
                    model = self._extract_model()
                    return self._outcome(Status.SAT, t0, c0, model=model)
                if r == K.R_UNSAT:
                    return self._outcome(Status.UNSAT, t0, c0, core_empty=True)
                if r == K.R_UNSAT_ASSUMP:
                    K.cancel_until(self.VI, self.LI, self.act, self.st, 0)
                    return self._outcome(Status.UNSAT, t0, c0)
                if r == K.R_RESTART:
                    break
                # R_PAUSE / R_GROW: check budgets and continue
                spent = int(self.st[K.CONFLICTS]) - c0
                if conflict_budget is not None and spent >= conflict_budget:
                    K.cancel_until(self.VI, self.LI, self.act, self.st, 0)
                    return self._outcome(Status.UNKNOWN, t0, c0)
                if (time_budget is not None and time.perf_counter() - t0 > time_budget) or \
                        (interrupt is not None and interrupt()):
                    K.cancel_until(self.VI, self.LI, self.act, self.st, 0)
                    return self._outcome(Status.UNKNOWN, t0, c0)
            # at level 0 after a restart
            if self.st[K.NLEARNT] - self.st[K.TS] >= self._max_learnts:
                self._reduce_db()
                self._max_learnts *= cfg.learnt_growth
            if (time_budget is not None and time.perf_counter() - t0 > time_budget) or \
                    (interrupt is not None and interrupt()):
                return self._outcome(Status.UNKNOWN, t0, c0)

    def _reduce_db(self):
        nc = int(self.st[K.NC])
        flags = self.CI[K.FLAGS, :nc]
        size = self.CI[K.SIZE, :nc]
        cand = np.nonzero((flags & K.LEARNT).astype(bool) & (size > 2))[0]
        if cand.size:
            order = cand[np.argsort(self.cact[cand], kind="stable")]
            drop = order[:order.size // 2]
            self.CI[K.FLAGS, drop] |= K.DELETED
        K.compact(self.VI, self.LI, self.CI, self.lits, self.cact, self.st)

    def _extract_model(self) -> np.ndarray:
        nv = self.n_vars
        model = self.LI[K.VAL, 0:2 * nv:2] == 1
        if self.config.check_models:
            bad = K.first_violated(self._olits, self._ooff, self._n_orig, self.LI)
            if bad >= 0:
                raise SolverError(f"internal error: model violates clause {bad}")
        K.cancel_until(self.VI, self.LI, self.act, self.st, 0)
        return model.copy()

    def _outcome(self, status, t0, c0, model=None, core_empty=False):
        stats = {
            "conflicts": int(self.st[K.CONFLICTS]) - c0,
            "total_conflicts": int(self.st[K.CONFLICTS]),
            "decisions": int(self.st[K.DECISIONS]),
            "propagations": int(self.st[K.PROPS]),
            "learnts": int(self.st[K.NLEARNT]),
            "clauses": self.n_clauses_added,
            "seconds": time.perf_counter() - t0,
        }
        return SolveOutcome(status, model, core_empty, stats)

    def value_of(self, outcome: SolveOutcome, lit: int) -> bool:
        return outcome.value(lit)


def dpll_solve(n_vars: int, clauses) -> np.ndarray | None:
    """Plain DPLL with unit propagation and no learning.

    Returns a model (bool per variable) or ``None`` when unsatisfiable.  Used
    as an independent cross-check on small instances.
    """
    clauses = [tuple(c) for c in clauses]
    assign: dict[int, bool] = {}

    def simplify(cls, assign):
        out = []
        for c in cls:
            rest = []
            sat = False
            for x in c:
                v = assign.get(abs(x))
                if v is None:
                    rest.append(x)
                elif v == (x > 0):
                    sat = True
                    break
            if sat:
                continue
            if not rest:
                return None
            out.append(rest)
        return out

    def rec(cls, assign):
        cls = simplify(cls, assign)
        if cls is None:
            return None
        while True:
            unit = next((c[0] for c in cls if len(c) == 1), None)
            if unit is None:
                break
            assign = dict(assign)
            assign[abs(unit)] = unit > 0
            cls = simplify(cls, assign)
            if cls is None:
                return None
        if not cls:
            return assign
        v = abs(cls[0][0])
        for b in (True, False):
            a = dict(assign)
            a[v] = b
            r = rec(cls, a)
            if r is not None:
                return r
        return None

    res = rec(clauses, assign)
    if res is None:
        return None
    return np.array([res.get(v, False) for v in range(1, n_vars + 1)], dtype=bool)
