"""Key-controlled (locked) view of camouflaged netlists.

Every unresolved choice becomes a multiplexer tree driven by key inputs
``keyinput<N>``.  A list of ``c`` candidates uses ``w = ceil(log2 c)`` key
bits (least significant first); code ``j`` selects candidate ``j mod c``,
so codes past the end alias back to the start.  Multiplexers are built from
plain gates, ``OR(AND(NOT k, a), AND(k, b))``, with one shared inverter per
key bit, so the attacker view contains ordinary cells only.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bench import read_bench, save_bench, write_bench
from .camouflage import (CamouflagedNetlist, DummyPicker, Scheme, SchemeKind, SelectionSet, _rng,
                         _S_DUMMY, _S_ORDER)
from .dyntopo import DynamicTopoOrder
from .netlist import GateKind, Netlist, NetlistError, topo_order

KEY_FORMAT = "beolcamo.key"
KEY_VERSION = 1
KEY_PREFIX = "keyinput"
_KEY_RE = re.compile(r"^keyinput(\d+)$")


def key_width(n_choices: int) -> int:
    return max(0, int(n_choices - 1).bit_length())


@dataclass(frozen=True)
class KeyElement:
    """One selector: ``width`` key bits from ``offset`` choose among ``choices``.

    ``kind`` is ``"pin"`` (candidate source of ``gate`` input ``pin``),
    ``"function"`` (gate function among kind names) or ``"output"`` (the
    net ``gate`` versus a dummy net).  ``gate`` is the output net name of
    the affected gate.
    """
    kind: str
    gate: str
    pin: int
    offset: int
    width: int
    choices: tuple[str, ...]

    def to_dict(self):
        return {"kind": self.kind, "gate": self.gate, "pin": self.pin, "offset": self.offset,
                "width": self.width, "choices": list(self.choices)}

    @classmethod
    def from_dict(cls, d):
        return cls(d["kind"], d["gate"], int(d["pin"]), int(d["offset"]), int(d["width"]),
                   tuple(d["choices"]))


@dataclass
class Key:
    bits: np.ndarray
    elements: list[KeyElement] = field(default_factory=list)

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=bool).ravel()

    def __len__(self):
        return len(self.bits)

    def code(self, el: KeyElement) -> int:
        b = self.bits[el.offset:el.offset + el.width]
        return int(sum(int(x) << i for i, x in enumerate(b)))

    def choice(self, el: KeyElement) -> int:
        return self.code(el) % len(el.choices)

    def bitstring(self) -> str:
        return "".join("1" if b else "0" for b in self.bits)

    @classmethod
    def from_bitstring(cls, s: str, elements=()):
        s = s.strip()
        if set(s) - {"0", "1"}:
            raise ValueError("key bit string may contain only 0 and 1")
        return cls(np.array([c == "1" for c in s], dtype=bool), list(elements))

    def to_json(self) -> str:
        d = {"format": KEY_FORMAT, "version": KEY_VERSION, "bits": self.bitstring(),
             "elements": [e.to_dict() for e in self.elements]}
        return json.dumps(d, indent=1) + "\n"

    def save(self, path):
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path) -> "Key":
        d = json.loads(Path(path).read_text())
        if d.get("format") != KEY_FORMAT:
            raise ValueError(f"{path}: not a key file")
        if d.get("version") != KEY_VERSION:
            raise ValueError(f"{path}: unsupported key file version {d.get('version')}")
        return cls.from_bitstring(d["bits"], [KeyElement.from_dict(e) for e in d["elements"]])


@dataclass
class LockedCircuit:
    netlist: Netlist
    key_inputs: list[int]
    elements: list[KeyElement] = field(default_factory=list)

    @property
    def n_key(self) -> int:
        return len(self.key_inputs)

    @property
    def data_inputs(self) -> list[int]:
        ks = set(self.key_inputs)
        return [i for i in self.netlist.inputs if i not in ks]

    @classmethod
    def from_netlist(cls, netlist: Netlist) -> "LockedCircuit":
        """Attacker view of a locked netlist: key inputs are recognised by name."""
        keys = {}
        for i in netlist.inputs:
            m = _KEY_RE.match(netlist.net_names[i])
            if m:
                keys[int(m.group(1))] = i
        if sorted(keys) != list(range(len(keys))):
            raise NetlistError("key inputs must be keyinput0..keyinput<K-1> without gaps")
        return cls(netlist, [keys[j] for j in range(len(keys))])

    def bench_text(self) -> str:
        return write_bench(self.netlist, header=[f"locked netlist ({KEY_FORMAT} v{KEY_VERSION}), "
                                                 f"{self.n_key} key inputs"])

    def save(self, path):
        Path(path).write_text(self.bench_text())

    @classmethod
    def load(cls, path) -> "LockedCircuit":
        return cls.from_netlist(read_bench(path))

    def resolve(self, key: Key) -> Netlist:
        return resolve(self, key)


# -- selector construction -------------------------------------------------------

class _Builder:
    def __init__(self, netlist: Netlist):
        self.nl = netlist
        self.keys: list[int] = []
        self.inv: dict[int, int] = {}
        self.elements: list[KeyElement] = []
        self.bits: list[bool] = []
        clash = next((n for n in netlist.net_names if _KEY_RE.match(n)), None)
        if clash is not None:
            raise NetlistError(f"netlist already has a key-like net named {clash!r}")

    def _key(self) -> int:
        k = self.nl.add_input(f"{KEY_PREFIX}{len(self.keys)}")
        self.keys.append(k)
        return k

    def _inv(self, k: int) -> int:
        if k not in self.inv:
            gid = self.nl.add_gate(GateKind.INV, (k,), self.nl.fresh_name("keyinv"))
            self.inv[k] = self.nl.gates[gid].output
        return self.inv[k]

    def _mux(self, k: int, a: int, b: int, out_gate: int | None) -> int:
        nl = self.nl
        lo = nl.gates[nl.add_gate(GateKind.AND, (self._inv(k), a), nl.fresh_name("sel"))].output
        hi = nl.gates[nl.add_gate(GateKind.AND, (k, b), nl.fresh_name("sel"))].output
        if out_gate is not None:
            nl.replace_gate(out_gate, kind=GateKind.OR, inputs=(lo, hi))
            return nl.gates[out_gate].output
        return nl.gates[nl.add_gate(GateKind.OR, (lo, hi), nl.fresh_name("sel"))].output

    def selector(self, leaves: list[int], secret: int, kind: str, gate: str, pin: int,
                 names: list[str], out_gate: int | None = None) -> int:
        """Multiplexer tree over ``leaves``; returns the root net.

        With ``out_gate`` the root OR overwrites that gate so an existing
        net keeps its driver position.
        """
        c = len(leaves)
        w = key_width(c)
        if w == 0:
            raise NetlistError("a selector needs at least two choices")
        offset = len(self.keys)
        keys = [self._key() for _ in range(w)]
        level = [leaves[j % c] for j in range(1 << w)]
        for bit, k in enumerate(keys):
            last = bit == w - 1
            level = [self._mux(k, level[2 * i], level[2 * i + 1], out_gate if last else None)
                     for i in range(len(level) // 2)]
        self.elements.append(KeyElement(kind, gate, pin, offset, w, tuple(names)))
        self.bits.extend(bool((secret >> i) & 1) for i in range(w))
        return level[0]

    def finish(self) -> tuple[LockedCircuit, Key]:
        topo_order(self.nl)
        return (LockedCircuit(self.nl, list(self.keys), list(self.elements)),
                Key(np.array(self.bits, dtype=bool), list(self.elements)))


def lock(camo: CamouflagedNetlist) -> tuple[LockedCircuit, Key]:
    """Locked circuit and correct key for a camouflaged netlist."""
    nl = camo.base.copy()
    b = _Builder(nl)
    names = nl.net_names
    new_inputs: dict[int, list[int]] = {}
    for cl in camo.lists:
        gname = names[nl.gates[cl.gate].output]
        root = b.selector(list(cl.candidates), cl.secret, "pin", gname, cl.pin,
                          [names[c] for c in cl.candidates])
        new_inputs.setdefault(cl.gate, list(nl.gates[cl.gate].inputs))[cl.pin] = root
    for gid, ins in new_inputs.items():
        nl.replace_gate(gid, inputs=ins)
    return b.finish()


def lock_prior_art(netlist: Netlist, selection: SelectionSet, scheme: Scheme, seed: int = 0,
                   radius: int = 5) -> tuple[LockedCircuit, Key]:
    """Key-controlled models of earlier camouflaging/locking styles.

    ``ambiguous``: each selected gate whose kind is in the set (and whose
    arity all kinds accept) computes every kind of the set over its inputs
    and a selector picks one.  ``mux_pair``: the selected gate's output (or
    one random input, with ``placement="input"``) is multiplexed against a
    unique loop-free dummy net.  ``dummy_via``: ``n_dummy`` random input pins
    of the selected gates each get a two-way selector between the true
    driver and a dummy net.
    """
    if scheme.is_wiring:
        raise ValueError(f"{scheme.label} is a wiring primitive; use apply_camouflage + lock")
    nl = netlist.copy()
    b = _Builder(nl)
    gates = sorted(set(selection.gates))
    rng = _rng(seed, _S_ORDER)
    names = nl.net_names

    if scheme.kind is SchemeKind.AMBIGUOUS:
        kinds = [GateKind(k) for k in scheme.kinds]
        for gid in gates:
            g = nl.gates[gid]
            if g.kind not in kinds or not all(k.check_arity(len(g.inputs)) for k in kinds):
                continue
            order = [kinds[i] for i in rng.permutation(len(kinds))]
            leaves = [nl.gates[nl.add_gate(k, g.inputs, nl.fresh_name("fn"))].output for k in order]
            b.selector(leaves, order.index(g.kind), "function", names[g.output], -1,
                       [k.value for k in order], out_gate=gid)
        return b.finish()

    const = np.zeros(netlist.n_nets, dtype=bool)
    for g in netlist.gates:
        if g.kind.is_tie:
            const[g.output] = True
    dt = DynamicTopoOrder.from_netlist(netlist)
    picker = DummyPicker(netlist, dt, ~const, _rng(seed, _S_DUMMY), radius)

    if scheme.kind is SchemeKind.MUX_PAIR and scheme.placement == "output":
        for gid in gates:
            g = nl.gates[gid]
            used = set(g.inputs) | {g.output}
            d = picker.pick(gid, g.output, 1, used, f"output of {names[g.output]!r}")[0]
            inner = nl.gates[nl.add_gate(g.kind, g.inputs, nl.fresh_name("core"))].output
            secret = int(rng.integers(2))
            leaves = [inner, d] if secret == 0 else [d, inner]
            b.selector(leaves, secret, "output", names[g.output], -1,
                       [names[x] for x in leaves], out_gate=gid)
        return b.finish()

    if scheme.kind is SchemeKind.MUX_PAIR:
        pins = [(gid, int(rng.integers(len(nl.gates[gid].inputs)))) for gid in gates
                if nl.gates[gid].inputs]
    else:
        all_pins = [(gid, p) for gid in gates for p in range(len(nl.gates[gid].inputs))]
        if scheme.n_dummy > len(all_pins):
            raise ValueError(f"{scheme.n_dummy} dummy wires requested but only "
                             f"{len(all_pins)} input pins are available")
        pick = np.sort(rng.choice(len(all_pins), size=scheme.n_dummy, replace=False))
        pins = [all_pins[i] for i in pick]
    new_inputs: dict[int, list[int]] = {}
    for gid, pin in pins:
        g = netlist.gates[gid]
        used = set(g.inputs) | {g.output}
        d = picker.pick(gid, g.output, 1, used, f"pin {pin} of {names[g.output]!r}")[0]
        real = g.inputs[pin]
        secret = int(rng.integers(2))
        leaves = [real, d] if secret == 0 else [d, real]
        root = b.selector(leaves, secret, "pin", names[g.output], pin, [names[x] for x in leaves])
        new_inputs.setdefault(gid, list(nl.gates[gid].inputs))[pin] = root
    for gid, ins in new_inputs.items():
        nl.replace_gate(gid, inputs=ins)
    return b.finish()


# -- resolution -------------------------------------------------------------------

_AND_LIKE = {GateKind.AND: (0, 0), GateKind.NAND: (0, 1), GateKind.OR: (1, 0), GateKind.NOR: (1, 1)}


def resolve(locked: LockedCircuit, key: Key) -> Netlist:
    """Plain netlist obtained by fixing the key inputs and propagating them.

    Only logic that depends on key inputs is simplified: gates that become
    constant or a plain (possibly inverted) copy of one input disappear,
    gates left without sinks as a consequence are swept, and a primary
    output whose driver disappeared is re-driven by a BUF/INV/TIE cell.
    """
    if len(key) != locked.n_key:
        raise ValueError(f"key has {len(key)} bits, circuit has {locked.n_key} key inputs")
    src = locked.netlist
    # rep[n]: None (unchanged), ("c", v) constant, ("a", m, neg) alias of net m
    rep: list = [None] * src.n_nets
    for j, k in enumerate(locked.key_inputs):
        rep[k] = ("c", int(key.bits[j]))
    new_gate: dict[int, tuple[GateKind, list[tuple[int, int]]]] = {}
    removed = set()
    for gid in topo_order(src):
        g = src.gates[gid]
        if not any(rep[i] is not None for i in g.inputs):
            continue
        lits = []
        for i in g.inputs:
            r = rep[i]
            if r is None:
                lits.append((i, 0))
            elif r[0] == "c":
                lits.append(("c", r[1]))
            else:
                lits.append((r[1], r[2]))
        res = _simplify(g.kind, lits)
        if res[0] == "gate":
            new_gate[gid] = (res[1], res[2])
        else:
            removed.add(gid)
            rep[g.output] = ("c", res[1]) if res[0] == "c" else ("a", res[1], res[2])

    out = Netlist(src.name)
    keyset = set(locked.key_inputs)
    inv_of: dict[int, str] = {}
    names = src.net_names
    for i in src.inputs:
        if i not in keyset:
            out.add_input(names[i])
    kept = [g for g in src.gates if g.id not in removed]
    for g in kept:
        out.add_net(names[g.output])
    extra = []

    def ref(n: int, neg: int) -> int:
        if not neg:
            return out.net_id(names[n])
        if n not in inv_of:
            nm = out.fresh_name(f"{names[n]}_n")
            out.add_net(nm)
            inv_of[n] = nm
            extra.append((GateKind.INV, [n], nm))
        return out.net_id(inv_of[n])

    def lit_ref(i: int) -> int:
        r = rep[i]
        if r is None:
            return ref(i, 0)
        if r[0] == "a":
            return ref(r[1], r[2])
        raise AssertionError("constant literal must have been folded")

    for g in kept:
        if g.id in new_gate:
            kind, lits = new_gate[g.id]
            ins = [ref(n, neg) for n, neg in lits]
        else:
            kind, ins = g.kind, [lit_ref(i) for i in g.inputs]
        out.add_gate(kind, ins, out.net_id(names[g.output]))
    for kind, (n,), nm in extra:
        out.add_gate(kind, [out.net_id(names[n])], out.net_id(nm))
    redriven = set()
    for o in src.outputs:
        r = rep[o]
        if r is None or o in redriven:
            out.add_output(out.net_id(names[o]))
            continue
        redriven.add(o)
        if not out.has_net(names[o]):
            out.add_net(names[o])
        nid = out.net_id(names[o])
        if r[0] == "c":
            out.add_gate(GateKind.TIE1 if r[1] else GateKind.TIE0, (), nid)
        else:
            out.add_gate(GateKind.INV if r[2] else GateKind.BUF, [out.net_id(names[r[1]])], nid)
        out.add_output(nid)
    return _sweep(out, src, locked)


def _simplify(kind: GateKind, lits):
    """Fold constants/duplicates of one gate: ``("c", v)``, ``("a", net, neg)``
    or ``("gate", kind, [(net, neg), ...])``."""
    if kind in (GateKind.BUF, GateKind.INV):
        inv = int(kind is GateKind.INV)
        (x,) = lits
        if x[0] == "c":
            return ("c", x[1] ^ inv)
        return ("a", x[0], x[1] ^ inv)
    if kind in _AND_LIKE:
        ctrl, inv = _AND_LIKE[kind]
        seen: dict[int, int] = {}
        for x in lits:
            if x[0] == "c":
                if x[1] == ctrl:
                    return ("c", ctrl ^ inv)
                continue
            n, neg = x
            if n in seen and seen[n] != neg:
                return ("c", ctrl ^ inv)
            seen[n] = neg
        if not seen:
            return ("c", (1 - ctrl) ^ inv)
        if len(seen) == 1:
            (n, neg), = seen.items()
            return ("a", n, neg ^ inv)
        return ("gate", kind, list(seen.items()))
    if kind in (GateKind.XOR, GateKind.XNOR):
        inv = int(kind is GateKind.XNOR)
        nets: list[int] = []
        for x in lits:
            if x[0] == "c":
                inv ^= x[1]
                continue
            n, neg = x
            inv ^= neg
            if n in nets:
                nets.remove(n)
            else:
                nets.append(n)
        if not nets:
            return ("c", inv)
        if len(nets) == 1:
            return ("a", nets[0], inv)
        return ("gate", GateKind.XNOR if inv else GateKind.XOR, [(n, 0) for n in nets])
    raise AssertionError(f"unexpected kind {kind}")


def _sweep(out: Netlist, src: Netlist, locked: LockedCircuit) -> Netlist:
    """Drop gates that lost all their sinks through key resolution."""
    had_sinks = {src.net_names[n] for n in range(src.n_nets) if src.sinks(n)}
    po = set(out.outputs)
    dead: set[int] = set()
    fo_count = [len(s) for s in out.fanout()]
    stack = [g.id for g in out.gates
             if fo_count[g.output] == 0 and g.output not in po and out.net_names[g.output] in had_sinks]
    while stack:
        gid = stack.pop()
        if gid in dead:
            continue
        dead.add(gid)
        for i in out.gates[gid].inputs:
            fo_count[i] -= 1
            d = out.net_driver[i]
            if fo_count[i] == 0 and d >= 0 and i not in po:
                stack.append(d)
    if not dead:
        return out
    res = Netlist(out.name)
    for i in out.inputs:
        res.add_input(out.net_names[i])
    for g in out.gates:
        if g.id not in dead:
            res.add_net(out.net_names[g.output])
    for g in out.gates:
        if g.id not in dead:
            res.add_gate(g.kind, [res.net_id(out.net_names[i]) for i in g.inputs],
                         res.net_id(out.net_names[g.output]))
    for o in out.outputs:
        res.add_output(res.net_id(out.net_names[o]))
    return res
