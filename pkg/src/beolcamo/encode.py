"""Circuit-to-CNF encoding.

Literals follow the solver's internal convention: ``2 * var + neg`` with
0-based variables.  In simplifying mode variable 0 is reserved as the
constant TRUE, so literal ``0`` is true and literal ``1`` is false, and every
net is mapped to a literal rather than a fresh variable: constants are
propagated, buffers/inverters become aliases, duplicated or complementary
inputs are folded, and (optionally) structurally identical AND/XOR nodes are
merged through a hash table shared between encodings.

Non-simplifying mode is the textbook Tseitin transform: one variable per
net, ``n + 1`` clauses per ``n``-input AND/OR-type gate, 4 per XOR/XNOR, 2
per INV/BUF, one unit clause per constant.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _jit
from .netlist import Netlist
from .sat.cnf import Cnf

TRUE = 0
FALSE = 1
_EMPTY = -1


@_jit.njit
def _emit(cl_lits, cl_off, cnt, a, b, c, n):
    nc = cnt[1]
    nl = cnt[2]
    cl_lits[nl] = a
    if n > 1:
        cl_lits[nl + 1] = b
    if n > 2:
        cl_lits[nl + 2] = c
    cnt[2] = nl + n
    cnt[1] = nc + 1
    cl_off[nc + 1] = nl + n


@_jit.njit
def _hash_slot(hk, op, a, b):
    mask = hk.shape[0] - 1
    key = (op << 61) | (a << 31) | b
    h = (a * 1000003 + b * 7919 + op * 104729) & mask
    while hk[h] != -1 and hk[h] != key:
        h = (h + 1) & mask
    return h, key


@_jit.njit
def _and2(a, b, cl_lits, cl_off, cnt, hk, hv):
    """Hashed two-input AND of non-constant literals."""
    if a == b:
        return a
    if a == (b ^ 1):
        return FALSE
    if a > b:
        a, b = b, a
    h, key = _hash_slot(hk, 0, a, b)
    if hk[h] == key:
        return hv[h]
    v = cnt[0]
    cnt[0] = v + 1
    y = 2 * v
    _emit(cl_lits, cl_off, cnt, y ^ 1, a, 0, 2)
    _emit(cl_lits, cl_off, cnt, y ^ 1, b, 0, 2)
    _emit(cl_lits, cl_off, cnt, y, a ^ 1, b ^ 1, 3)
    hk[h] = key
    hv[h] = y
    cnt[3] += 1
    return y


@_jit.njit
def _xor_var(a, b, cl_lits, cl_off, cnt, hk, hv, use_hash):
    """Positive literal equal to ``a XOR b`` for positive, distinct ``a``, ``b``."""
    if a > b:
        a, b = b, a
    h = 0
    key = 0
    if use_hash:
        h, key = _hash_slot(hk, 2, a, b)
        if hk[h] == key:
            return hv[h]
    v = cnt[0]
    cnt[0] = v + 1
    y = 2 * v
    _emit(cl_lits, cl_off, cnt, y ^ 1, a, b, 3)
    _emit(cl_lits, cl_off, cnt, y ^ 1, a ^ 1, b ^ 1, 3)
    _emit(cl_lits, cl_off, cnt, y, a ^ 1, b, 3)
    _emit(cl_lits, cl_off, cnt, y, a, b ^ 1, 3)
    if use_hash:
        hk[h] = key
        hv[h] = y
        cnt[3] += 1
    return y


@_jit.njit
def encode_kernel(order, kind, fan_ptr, fan_idx, out, active, lit, simplify, use_hash,
                  hk, hv, cl_lits, cl_off, cnt, buf):
    """Encode gates of ``order`` (where ``active``) into ``cl_lits``/``cl_off``.

    ``lit`` holds the literal of every net (``-1`` = not yet encoded) and is
    updated in place.  ``cnt`` = [next variable, clauses, literals, hashed nodes].
    """
    for t in range(order.shape[0]):
        g = order[t]
        if not active[g]:
            continue
        k = kind[g]
        op = k >> 1
        inv = k & 1
        a0 = fan_ptr[g]
        a1 = fan_ptr[g + 1]
        o = out[g]
        if not simplify:
            v = cnt[0]
            cnt[0] = v + 1
            y = 2 * v ^ inv
            if op == 4:
                # constant: base function is FALSE, so TIE0 asserts ~v and TIE1 asserts v
                _emit(cl_lits, cl_off, cnt, y ^ 1, 0, 0, 1)
            elif op == 3:
                x = lit[fan_idx[a0]]
                _emit(cl_lits, cl_off, cnt, y ^ 1, x, 0, 2)
                _emit(cl_lits, cl_off, cnt, y, x ^ 1, 0, 2)
            elif op == 2:
                a = lit[fan_idx[a0]]
                b = lit[fan_idx[a0 + 1]]
                _emit(cl_lits, cl_off, cnt, y ^ 1, a, b, 3)
                _emit(cl_lits, cl_off, cnt, y ^ 1, a ^ 1, b ^ 1, 3)
                _emit(cl_lits, cl_off, cnt, y, a ^ 1, b, 3)
                _emit(cl_lits, cl_off, cnt, y, a, b ^ 1, 3)
            else:
                # OR(x) = NOT AND(NOT x)
                neg = 1 if op == 1 else 0
                y = y ^ neg
                for j in range(a0, a1):
                    _emit(cl_lits, cl_off, cnt, y ^ 1, lit[fan_idx[j]] ^ neg, 0, 2)
                nl = cnt[2]
                nc = cnt[1]
                cl_lits[nl] = y
                for j in range(a0, a1):
                    cl_lits[nl + 1 + j - a0] = lit[fan_idx[j]] ^ neg ^ 1
                cnt[2] = nl + 1 + a1 - a0
                cnt[1] = nc + 1
                cl_off[nc + 1] = cnt[2]
            lit[o] = 2 * v
            continue

        if op == 4:
            lit[o] = FALSE ^ inv
        elif op == 3:
            lit[o] = lit[fan_idx[a0]] ^ inv
        elif op == 2:
            a = lit[fan_idx[a0]]
            b = lit[fan_idx[a0 + 1]]
            par = inv
            if a <= 1:
                par ^= 1 - a
                a = -1
            else:
                par ^= a & 1
                a = a & ~1
            if b <= 1:
                par ^= 1 - b
                b = -1
            else:
                par ^= b & 1
                b = b & ~1
            if a < 0 and b < 0:
                lit[o] = 1 - par
            elif a < 0:
                lit[o] = b ^ par
            elif b < 0:
                lit[o] = a ^ par
            elif a == b:
                lit[o] = 1 - par
            else:
                lit[o] = _xor_var(a, b, cl_lits, cl_off, cnt, hk, hv, use_hash) ^ par
        else:
            neg = 1 if op == 1 else 0
            res_inv = inv ^ neg
            n = 0
            const_false = False
            for j in range(a0, a1):
                x = lit[fan_idx[j]] ^ neg
                if x == TRUE:
                    continue
                if x == FALSE:
                    const_false = True
                    break
                dup = False
                for q in range(n):
                    if buf[q] == x:
                        dup = True
                        break
                    if buf[q] == (x ^ 1):
                        const_false = True
                        break
                if const_false:
                    break
                if not dup:
                    buf[n] = x
                    n += 1
            if const_false:
                lit[o] = FALSE ^ res_inv
            elif n == 0:
                lit[o] = TRUE ^ res_inv
            elif n == 1:
                lit[o] = buf[0] ^ res_inv
            elif use_hash:
                acc = buf[0]
                for q in range(1, n):
                    acc = _and2(acc, buf[q], cl_lits, cl_off, cnt, hk, hv)
                    if acc == FALSE:
                        break
                lit[o] = acc ^ res_inv
            else:
                v = cnt[0]
                cnt[0] = v + 1
                y = 2 * v
                for q in range(n):
                    _emit(cl_lits, cl_off, cnt, y ^ 1, buf[q], 0, 2)
                nl = cnt[2]
                nc = cnt[1]
                cl_lits[nl] = y
                for q in range(n):
                    cl_lits[nl + 1 + q] = buf[q] ^ 1
                cnt[2] = nl + 1 + n
                cnt[1] = nc + 1
                cl_off[nc + 1] = cnt[2]
                lit[o] = y ^ res_inv


class StrashTable:
    """Open-addressing hash of (op, lit, lit) -> literal, shared across encodings."""

    def __init__(self, capacity: int):
        size = 1 << max(10, int(2 * capacity).bit_length())
        self.keys = np.full(size, -1, dtype=np.int64)
        self.vals = np.zeros(size, dtype=np.int64)
        self.used = 0

    def ensure(self, extra: int):
        if 2 * (self.used + extra) >= self.keys.shape[0]:
            old_k, old_v = self.keys, self.vals
            live = old_k != -1
            self.__init__(2 * (self.used + extra))
            ks, vs = old_k[live], old_v[live]
            for key, val in zip(ks.tolist(), vs.tolist()):
                a = (key >> 31) & 0x3FFFFFFF
                b = key & 0x7FFFFFFF
                op = key >> 61
                mask = self.keys.shape[0] - 1
                h = (a * 1000003 + b * 7919 + op * 104729) & mask
                while self.keys[h] != -1:
                    h = (h + 1) & mask
                self.keys[h] = key
                self.vals[h] = val
            self.used = int(live.sum())


@dataclass
class Encoded:
    lits: np.ndarray      # int32 clause literals
    offsets: np.ndarray   # int64 CSR offsets, len = clauses + 1
    next_var: int

    @property
    def n_clauses(self) -> int:
        return len(self.offsets) - 1


class CircuitEncoder:
    """Reusable encoder for one netlist (array view computed once)."""

    def __init__(self, netlist: Netlist):
        self.netlist = netlist
        f = netlist.flat()
        self.flat = f
        self.kind = f.kind.astype(np.int64)
        self.fan_ptr = f.fan_ptr
        self.fan_idx = f.fan_idx.astype(np.int64)
        self.out = f.out.astype(np.int64)
        self.order = f.order.astype(np.int64)
        arity = np.maximum(np.diff(f.fan_ptr), 2)
        self._max_clauses = int(np.sum(3 * arity + 4)) + 1
        self._max_lits = int(np.sum(8 * arity + 12)) + 1
        self._max_arity = int(arity.max()) if arity.size else 2
        self.all_active = np.ones(len(netlist.gates), dtype=np.bool_)
        self._dummy_hash = np.full(2, -1, dtype=np.int64)

    def new_lits(self) -> np.ndarray:
        return np.full(self.netlist.n_nets, _EMPTY, dtype=np.int64)

    def encode(self, lit: np.ndarray, next_var: int, simplify: bool = True,
               active: np.ndarray | None = None, strash: StrashTable | None = None) -> Encoded:
        """Encode the netlist given preset literals for its sources.

        ``lit`` must hold literals for every primary input (and, with
        ``active``, for every net driven by an inactive gate); it is filled in
        place for the remaining nets.
        """
        act = self.all_active if active is None else active
        cl_lits = np.empty(self._max_lits, dtype=np.int32)
        cl_off = np.zeros(self._max_clauses + 1, dtype=np.int64)
        cnt = np.array([next_var, 0, 0, 0], dtype=np.int64)
        buf = np.empty(self._max_arity, dtype=np.int64)
        if strash is not None:
            strash.ensure(self._max_clauses // 3)
            hk, hv = strash.keys, strash.vals
        else:
            hk, hv = self._dummy_hash, self._dummy_hash
        encode_kernel(self.order, self.kind, self.fan_ptr, self.fan_idx, self.out, act, lit,
                      simplify, strash is not None, hk, hv, cl_lits, cl_off, cnt, buf)
        if strash is not None:
            strash.used += int(cnt[3])
        nc = int(cnt[1])
        return Encoded(cl_lits[:int(cnt[2])].copy(), cl_off[:nc + 1].copy(), int(cnt[0]))


def xor_lit(a: int, b: int, next_var: int, clauses: list) -> tuple[int, int]:
    """Literal for ``a XOR b`` with constant folding; appends clauses as lists."""
    par = 0
    if a <= 1:
        par ^= 1 - a
        a = -1
    else:
        par ^= a & 1
        a &= ~1
    if b <= 1:
        par ^= 1 - b
        b = -1
    else:
        par ^= b & 1
        b &= ~1
    if a < 0 and b < 0:
        return 1 - par, next_var
    if a < 0:
        return b ^ par, next_var
    if b < 0 or a == b:
        return (a ^ par if b < 0 else 1 - par), next_var
    y = 2 * next_var
    clauses += [[y ^ 1, a, b], [y ^ 1, a ^ 1, b ^ 1], [y, a ^ 1, b], [y, a, b ^ 1]]
    return y ^ par, next_var + 1


def pack_clauses(clauses: list) -> tuple[np.ndarray, np.ndarray]:
    off = np.zeros(len(clauses) + 1, dtype=np.int64)
    off[1:] = np.cumsum([len(c) for c in clauses])
    lits = np.array([x for c in clauses for x in c], dtype=np.int32)
    return lits, off


@dataclass
class VarMap:
    """DIMACS variable of every net plus the interface groups."""
    net_var: np.ndarray
    inputs: list[int]
    outputs: list[int]
    keys: list[int]


def tseitin(netlist: Netlist, key_inputs=()) -> tuple[Cnf, VarMap]:
    """Plain Tseitin encoding, one DIMACS variable per net.

    Primary inputs get variables ``1..PI`` in input order; gate outputs
    follow in topological order.
    """
    enc = CircuitEncoder(netlist)
    lit = enc.new_lits()
    for j, i in enumerate(netlist.inputs):
        lit[i] = 2 * j
    e = enc.encode(lit, len(netlist.inputs), simplify=False)
    cnf = Cnf(n_vars=e.next_var)
    for c in range(e.n_clauses):
        seg = e.lits[e.offsets[c]:e.offsets[c + 1]]
        cnf.add_clause([(int(x) >> 1) + 1 if not x & 1 else -((int(x) >> 1) + 1) for x in seg])
    net_var = (lit >> 1) + 1
    keyset = set(key_inputs)
    return cnf, VarMap(net_var, [int(net_var[i]) for i in netlist.inputs if i not in keyset],
                       [int(net_var[o]) for o in netlist.outputs],
                       [int(net_var[k]) for k in key_inputs])


def to_dimacs_lit(x: int) -> int:
    v = (int(x) >> 1) + 1
    return -v if x & 1 else v
