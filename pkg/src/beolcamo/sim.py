"""Bit-parallel functional simulation (the attack oracle).

Patterns are packed 64 per ``uint64`` word; every gate is evaluated once per
word.  The numba kernel walks gates in topological order; the interpreted
fallback evaluates whole logic levels at a time with numpy reductions.
"""
from __future__ import annotations

import numpy as np

from . import _jit
from .netlist import Netlist, NetlistError

_ONES = np.uint64(0xFFFFFFFFFFFFFFFF)


@_jit.njit
def _eval_kernel(kind, fan_ptr, fan_idx, out, order, values):
    n_words = values.shape[1]
    ones = np.uint64(0xFFFFFFFFFFFFFFFF)
    for t in range(order.shape[0]):
        g = order[t]
        k = kind[g]
        a = fan_ptr[g]
        b = fan_ptr[g + 1]
        o = out[g]
        op = k >> 1
        inv = k & 1
        for w in range(n_words):
            if op == 4:
                r = np.uint64(0)
            else:
                r = values[fan_idx[a], w]
                if op == 0:
                    for j in range(a + 1, b):
                        r &= values[fan_idx[j], w]
                elif op == 1:
                    for j in range(a + 1, b):
                        r |= values[fan_idx[j], w]
                elif op == 2:
                    for j in range(a + 1, b):
                        r ^= values[fan_idx[j], w]
            if inv:
                r ^= ones
            values[o, w] = r


def _eval_numpy(flat, values):
    for _, k, pins, outs in flat.groups:
        op = k >> 1
        if op == 4:
            r = np.zeros((len(outs), values.shape[1]), dtype=np.uint64)
        else:
            g = values[pins]                      # (n, arity, W)
            if op == 0:
                r = np.bitwise_and.reduce(g, axis=1)
            elif op == 1:
                r = np.bitwise_or.reduce(g, axis=1)
            elif op == 2:
                r = np.bitwise_xor.reduce(g, axis=1)
            else:
                r = g[:, 0, :].copy()
        if k & 1:
            r ^= _ONES
        values[outs] = r


def pack_patterns(patterns: np.ndarray) -> np.ndarray:
    """``(n_patterns, width)`` bools -> ``(width, n_words)`` uint64 bit-planes."""
    patterns = np.asarray(patterns, dtype=bool)
    n_pat, width = patterns.shape
    n_words = max(1, -(-n_pat // 64))
    planes = np.zeros((width, n_words * 64), dtype=bool)
    planes[:, :n_pat] = patterns.T
    return np.packbits(planes, axis=1, bitorder="little").view("<u8").reshape(width, n_words)


def unpack_patterns(planes: np.ndarray, n_pat: int) -> np.ndarray:
    bits = np.unpackbits(np.ascontiguousarray(planes).view(np.uint8), axis=1, bitorder="little")
    return bits[:, :n_pat].T.astype(bool)


def eval_words(netlist: Netlist, input_words: np.ndarray) -> np.ndarray:
    """Evaluate every net; ``input_words`` is ``(PI, W)`` uint64, returns ``(nets, W)``."""
    flat = netlist.flat()
    values = np.zeros((flat.n_nets, input_words.shape[1]), dtype=np.uint64)
    if len(flat.inputs):
        values[flat.inputs] = input_words
    if _jit.USE_NUMBA:
        _eval_kernel(flat.kind, flat.fan_ptr, flat.fan_idx, flat.out, flat.order, values)
    else:
        _eval_numpy(flat, values)
    return values


def simulate_nets(netlist: Netlist, stimulus) -> np.ndarray:
    """Value of every net for each pattern: ``(n_patterns, nets)`` bools."""
    stim, single = _as_patterns(netlist, stimulus)
    values = eval_words(netlist, pack_patterns(stim))
    res = unpack_patterns(values, stim.shape[0])
    return res[0] if single else res


def simulate(netlist: Netlist, stimulus) -> np.ndarray:
    """Primary-output response to ``stimulus``.

    ``stimulus`` is a bool vector of length ``len(netlist.inputs)`` or a
    ``(n_patterns, PI)`` matrix; the result has the matching shape over POs.
    """
    stim, single = _as_patterns(netlist, stimulus)
    values = eval_words(netlist, pack_patterns(stim))
    po = np.asarray(netlist.outputs, dtype=np.int64)
    res = unpack_patterns(values[po], stim.shape[0]) if len(po) else np.zeros((stim.shape[0], 0), bool)
    return res[0] if single else res


def _as_patterns(netlist, stimulus):
    stim = np.asarray(stimulus, dtype=bool)
    single = stim.ndim == 1
    if single:
        stim = stim[None, :]
    if stim.ndim != 2 or stim.shape[1] != len(netlist.inputs):
        raise NetlistError(
            f"stimulus width {stim.shape[-1]} does not match {len(netlist.inputs)} primary inputs")
    return stim, single


def exhaustive_patterns(n: int) -> np.ndarray:
    """All ``2**n`` patterns, pattern ``i`` has bit ``j`` = ``(i >> j) & 1``."""
    idx = np.arange(1 << n, dtype=np.int64)
    return ((idx[:, None] >> np.arange(n)[None, :]) & 1).astype(bool)


def truth_table(netlist: Netlist) -> np.ndarray:
    """``(2**PI, PO)`` response over all input patterns (small circuits only)."""
    n = len(netlist.inputs)
    if n > 24:
        raise ValueError(f"{n} inputs is too many for an exhaustive truth table")
    return simulate(netlist, exhaustive_patterns(n))
