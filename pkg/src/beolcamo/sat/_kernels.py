"""CDCL kernels over flat arrays.

State layout (all owned by :class:`beolcamo.sat.solver.Solver`):

``VI``  int32 ``[V_ROWS, cap_vars]``   per-variable rows (level, reason, heap, ...)
``LI``  int32 ``[2, 2 * cap_vars]``    per-literal value (+1/-1/0) and watch-list head
``CI``  int32 ``[C_ROWS, cap_clauses]`` clause start/size/flags and the two watch links
``act`` float64 variable activities, ``cact`` float64 clause activities
``lits`` int32 literal pool, ``st`` int64 scalar registers, ``fst`` float64 registers

Literals are ``2 * var + sign`` (sign 1 = negated).  Watch lists are singly
linked through the clauses: entry ``2 * c + k`` means clause ``c`` watches
the literal at its position ``k`` (0 or 1), and ``CI[WN0 + k, c]`` is the
next entry of the same list.  The kernels never allocate; the search returns
``R_GROW`` when the pools are close to full and the caller reallocates.
"""
import numpy as np

from .._jit import njit

# VI rows
LEVEL = 0
REASON = 1
HEAP = 2
HEAPIDX = 3
TRAIL = 4
SEEN = 5
POL = 6
TRAILLIM = 7
LBUF = 8
STACK = 9
V_ROWS = 10

# LI rows
VAL = 0
WHEAD = 1

# CI rows
START = 0
SIZE = 1
FLAGS = 2
WN0 = 3
C_ROWS = 5

LEARNT = 1
DELETED = 2

# st registers
NV = 0
NC = 1
NL = 2
TS = 3
QH = 4
DL = 5
OK = 6
CONFLICTS = 7
DECISIONS = 8
PROPS = 9
NLEARNT = 10
HS = 11
LASTC = 12
ST_SIZE = 16

# fst registers
VARINC = 0
CLAINC = 1
VARDECAY = 2
CLADECAY = 3

R_SAT = 10
R_UNSAT = 20
R_UNSAT_ASSUMP = 21
R_RESTART = 1
R_PAUSE = 2
R_GROW = 3


@njit
def _heap_up(VI, act, i):
    v = VI[HEAP, i]
    while i > 0:
        p = (i - 1) >> 1
        u = VI[HEAP, p]
        if act[v] > act[u] or (act[v] == act[u] and v < u):
            VI[HEAP, i] = u
            VI[HEAPIDX, u] = i
            i = p
        else:
            break
    VI[HEAP, i] = v
    VI[HEAPIDX, v] = i


@njit
def _heap_down(VI, act, i, n):
    v = VI[HEAP, i]
    while True:
        c = 2 * i + 1
        if c >= n:
            break
        if c + 1 < n:
            a = VI[HEAP, c]
            b = VI[HEAP, c + 1]
            if act[b] > act[a] or (act[b] == act[a] and b < a):
                c += 1
        u = VI[HEAP, c]
        if act[u] > act[v] or (act[u] == act[v] and u < v):
            VI[HEAP, i] = u
            VI[HEAPIDX, u] = i
            i = c
        else:
            break
    VI[HEAP, i] = v
    VI[HEAPIDX, v] = i


@njit
def _heap_insert(VI, act, st, v):
    n = st[HS]
    VI[HEAP, n] = v
    VI[HEAPIDX, v] = n
    st[HS] = n + 1
    _heap_up(VI, act, n)


@njit
def _heap_pop(VI, act, st):
    v = VI[HEAP, 0]
    VI[HEAPIDX, v] = -1
    n = st[HS] - 1
    st[HS] = n
    if n > 0:
        last = VI[HEAP, n]
        VI[HEAP, 0] = last
        VI[HEAPIDX, last] = 0
        _heap_down(VI, act, 0, n)
    return v


@njit
def new_vars(VI, LI, act, st, k):
    """Register ``k`` fresh variables (capacity already ensured)."""
    base = st[NV]
    for v in range(base, base + k):
        VI[LEVEL, v] = 0
        VI[REASON, v] = -1
        VI[SEEN, v] = 0
        VI[POL, v] = 1
        VI[HEAPIDX, v] = -1
        act[v] = 0.0
        LI[VAL, 2 * v] = 0
        LI[VAL, 2 * v + 1] = 0
        LI[WHEAD, 2 * v] = -1
        LI[WHEAD, 2 * v + 1] = -1
        _heap_insert(VI, act, st, v)
    st[NV] = base + k


@njit
def _bump_var(VI, act, st, fst, v):
    act[v] += fst[VARINC]
    if act[v] > 1e100:
        for i in range(st[NV]):
            act[i] *= 1e-100
        fst[VARINC] *= 1e-100
    if VI[HEAPIDX, v] >= 0:
        _heap_up(VI, act, VI[HEAPIDX, v])


@njit
def _bump_clause(cact, st, fst, c):
    cact[c] += fst[CLAINC]
    if cact[c] > 1e20:
        for i in range(st[NC]):
            cact[i] *= 1e-20
        fst[CLAINC] *= 1e-20


@njit
def _enqueue(VI, LI, st, lit, reason):
    LI[VAL, lit] = 1
    LI[VAL, lit ^ 1] = -1
    v = lit >> 1
    VI[LEVEL, v] = st[DL]
    VI[REASON, v] = reason
    VI[TRAIL, st[TS]] = lit
    st[TS] += 1


@njit
def _attach(CI, LI, lits, c):
    s = CI[START, c]
    l0 = lits[s]
    l1 = lits[s + 1]
    CI[WN0, c] = LI[WHEAD, l0]
    LI[WHEAD, l0] = 2 * c
    CI[WN0 + 1, c] = LI[WHEAD, l1]
    LI[WHEAD, l1] = 2 * c + 1


@njit
def _propagate(VI, LI, CI, lits, st):
    while st[QH] < st[TS]:
        p = VI[TRAIL, st[QH]]
        st[QH] += 1
        st[PROPS] += 1
        fl = p ^ 1
        prev = -1
        e = LI[WHEAD, fl]
        while e != -1:
            c = e >> 1
            k = e & 1
            nxt = CI[WN0 + k, c]
            s = CI[START, c]
            other = lits[s + 1 - k]
            if LI[VAL, other] == 1:
                prev = e
                e = nxt
                continue
            sz = CI[SIZE, c]
            moved = False
            for i in range(2, sz):
                lit = lits[s + i]
                if LI[VAL, lit] != -1:
                    lits[s + i] = fl
                    lits[s + k] = lit
                    if prev == -1:
                        LI[WHEAD, fl] = nxt
                    else:
                        CI[WN0 + (prev & 1), prev >> 1] = nxt
                    CI[WN0 + k, c] = LI[WHEAD, lit]
                    LI[WHEAD, lit] = e
                    moved = True
                    break
            if moved:
                e = nxt
                continue
            prev = e
            if LI[VAL, other] == -1:
                st[QH] = st[TS]
                return c
            _enqueue(VI, LI, st, other, c)
            e = nxt
    return -1


@njit
def _new_level(VI, st):
    VI[TRAILLIM, st[DL]] = st[TS]
    st[DL] += 1


@njit
def cancel_until(VI, LI, act, st, level):
    if st[DL] <= level:
        return
    stop = VI[TRAILLIM, level]
    for t in range(st[TS] - 1, stop - 1, -1):
        lit = VI[TRAIL, t]
        v = lit >> 1
        LI[VAL, lit] = 0
        LI[VAL, lit ^ 1] = 0
        VI[REASON, v] = -1
        VI[POL, v] = lit & 1
        if VI[HEAPIDX, v] < 0:
            _heap_insert(VI, act, st, v)
    st[TS] = stop
    st[QH] = stop
    st[DL] = level


@njit
def _analyze(confl, VI, CI, lits, act, cact, st, fst):
    """First-UIP learning; the learnt clause is left in ``VI[LBUF, :n]``."""
    dl = st[DL]
    path = 0
    p = -1
    n = 1
    idx = st[TS] - 1
    while True:
        if CI[FLAGS, confl] & LEARNT:
            _bump_clause(cact, st, fst, confl)
        s = CI[START, confl]
        sz = CI[SIZE, confl]
        pv = -1 if p == -1 else p >> 1
        for j in range(sz):
            q = lits[s + j]
            v = q >> 1
            if v == pv:
                continue
            if VI[SEEN, v] == 0 and VI[LEVEL, v] > 0:
                _bump_var(VI, act, st, fst, v)
                VI[SEEN, v] = 1
                if VI[LEVEL, v] >= dl:
                    path += 1
                else:
                    VI[LBUF, n] = q
                    n += 1
        while VI[SEEN, VI[TRAIL, idx] >> 1] == 0:
            idx -= 1
        p = VI[TRAIL, idx]
        idx -= 1
        confl = VI[REASON, p >> 1]
        VI[SEEN, p >> 1] = 0
        path -= 1
        if path <= 0:
            break
    VI[LBUF, 0] = p ^ 1

    # drop literals whose reason is subsumed by the rest of the clause
    m = 1
    for i in range(1, n):
        q = VI[LBUF, i]
        v = q >> 1
        r = VI[REASON, v]
        keep = True
        if r != -1:
            keep = False
            s = CI[START, r]
            sz = CI[SIZE, r]
            for t in range(sz):
                u = lits[s + t] >> 1
                if u != v and VI[SEEN, u] == 0 and VI[LEVEL, u] > 0:
                    keep = True
                    break
        if keep:
            VI[STACK, m] = q
            m += 1
    for i in range(1, n):
        VI[SEEN, VI[LBUF, i] >> 1] = 0
    for i in range(1, m):
        VI[LBUF, i] = VI[STACK, i]

    bt = 0
    if m > 1:
        best = 1
        for i in range(2, m):
            if VI[LEVEL, VI[LBUF, i] >> 1] > VI[LEVEL, VI[LBUF, best] >> 1]:
                best = i
        tmp = VI[LBUF, 1]
        VI[LBUF, 1] = VI[LBUF, best]
        VI[LBUF, best] = tmp
        bt = VI[LEVEL, VI[LBUF, 1] >> 1]
    return m, bt


@njit
def _store_clause(VI, CI, lits, cact, st, n, flags):
    c = st[NC]
    s = st[NL]
    for i in range(n):
        lits[s + i] = VI[LBUF, i]
    CI[START, c] = s
    CI[SIZE, c] = n
    CI[FLAGS, c] = flags
    cact[c] = 0.0
    st[NC] = c + 1
    st[NL] = s + n
    return c


@njit
def _pick_branch(VI, LI, act, st):
    while st[HS] > 0:
        v = _heap_pop(VI, act, st)
        if LI[VAL, 2 * v] == 0:
            return 2 * v + VI[POL, v]
    return -1


@njit
def search(restart_left, pause_left, assumps, VI, LI, CI, lits, act, cact, st, fst):
    """Run CDCL until SAT/UNSAT or a budget/capacity boundary (see ``R_*``)."""
    conflicts = 0
    cap_l = lits.shape[0]
    cap_c = CI.shape[1]
    n_ass = assumps.shape[0]
    while True:
        if st[NL] + st[NV] + 1 > cap_l or st[NC] + 1 > cap_c:
            st[LASTC] = conflicts
            return R_GROW
        confl = _propagate(VI, LI, CI, lits, st)
        if confl >= 0:
            st[CONFLICTS] += 1
            conflicts += 1
            if st[DL] == 0:
                st[OK] = 0
                st[LASTC] = conflicts
                return R_UNSAT
            n, bt = _analyze(confl, VI, CI, lits, act, cact, st, fst)
            cancel_until(VI, LI, act, st, bt)
            if n == 1:
                _enqueue(VI, LI, st, VI[LBUF, 0], -1)
            else:
                c = _store_clause(VI, CI, lits, cact, st, n, LEARNT)
                _attach(CI, LI, lits, c)
                _bump_clause(cact, st, fst, c)
                st[NLEARNT] += 1
                _enqueue(VI, LI, st, VI[LBUF, 0], c)
            fst[VARINC] /= fst[VARDECAY]
            fst[CLAINC] /= fst[CLADECAY]
        else:
            if restart_left >= 0 and conflicts >= restart_left:
                cancel_until(VI, LI, act, st, 0)
                st[LASTC] = conflicts
                return R_RESTART
            if pause_left >= 0 and conflicts >= pause_left:
                st[LASTC] = conflicts
                return R_PAUSE
            nxt = -1
            while st[DL] < n_ass:
                p = assumps[st[DL]]
                vp = LI[VAL, p]
                if vp == 1:
                    _new_level(VI, st)
                elif vp == -1:
                    st[LASTC] = conflicts
                    return R_UNSAT_ASSUMP
                else:
                    nxt = p
                    break
            if nxt == -1:
                nxt = _pick_branch(VI, LI, act, st)
                if nxt == -1:
                    st[LASTC] = conflicts
                    return R_SAT
                st[DECISIONS] += 1
            _new_level(VI, st)
            _enqueue(VI, LI, st, nxt, -1)


@njit
def add_clauses(flat, off, VI, LI, CI, lits, cact, st):
    """Add clauses at decision level 0 with unit propagation.

    Duplicate literals are merged, tautologies and clauses satisfied at level
    0 are dropped, false literals are stripped.  Sets ``st[OK] = 0`` when the
    formula becomes unsatisfiable.
    """
    for i in range(off.shape[0] - 1):
        if st[OK] == 0:
            return
        n = 0
        sat = False
        for j in range(off[i], off[i + 1]):
            lit = flat[j]
            vl = LI[VAL, lit]
            if vl == 1:
                sat = True
                break
            if vl == -1:
                continue
            mark = VI[SEEN, lit >> 1]
            if mark == 0:
                VI[SEEN, lit >> 1] = 1 + (lit & 1)
                VI[LBUF, n] = lit
                n += 1
            elif mark != 1 + (lit & 1):
                sat = True
                break
        for t in range(n):
            VI[SEEN, VI[LBUF, t] >> 1] = 0
        if sat:
            continue
        if n == 0:
            st[OK] = 0
            return
        if n == 1:
            _enqueue(VI, LI, st, VI[LBUF, 0], -1)
            if _propagate(VI, LI, CI, lits, st) >= 0:
                st[OK] = 0
                return
            continue
        c = _store_clause(VI, CI, lits, cact, st, n, 0)
        _attach(CI, LI, lits, c)


@njit
def compact(VI, LI, CI, lits, cact, st):
    """Drop deleted and level-0 satisfied clauses, strip false literals and
    rebuild all watch lists.  Must be called at level 0 after propagation."""
    nc = st[NC]
    newc = 0
    newl = 0
    nlearnt = 0
    for c in range(nc):
        fl = CI[FLAGS, c]
        if fl & DELETED:
            continue
        s = CI[START, c]
        sz = CI[SIZE, c]
        sat = False
        for j in range(sz):
            if LI[VAL, lits[s + j]] == 1:
                sat = True
                break
        if sat:
            continue
        start = newl
        for j in range(sz):
            lit = lits[s + j]
            if LI[VAL, lit] == 0:
                lits[newl] = lit
                newl += 1
        CI[START, newc] = start
        CI[SIZE, newc] = newl - start
        CI[FLAGS, newc] = fl
        cact[newc] = cact[c]
        if fl & LEARNT:
            nlearnt += 1
        newc += 1
    st[NC] = newc
    st[NL] = newl
    st[NLEARNT] = nlearnt
    for lit in range(2 * st[NV]):
        LI[WHEAD, lit] = -1
    for c in range(newc):
        _attach(CI, LI, lits, c)
    for t in range(st[TS]):
        VI[REASON, VI[TRAIL, t] >> 1] = -1


@njit
def first_violated(olits, ooff, n, LI):
    """Index of the first stored clause not satisfied by the current assignment, or -1."""
    for i in range(n):
        ok = False
        for j in range(ooff[i], ooff[i + 1]):
            if LI[VAL, olits[j]] == 1:
                ok = True
                break
        if not ok:
            return i
    return -1
