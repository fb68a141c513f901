"""Gate-level netlist intermediate representation.

A :class:`Netlist` is a DAG of gates over integer-indexed nets.  Every net is
either a primary input or driven by exactly one gate; constants are ordinary
nets driven by ``TIE0``/``TIE1`` pseudo-gates.  Ids are dense and assigned in
creation order, so every traversal below is deterministic.
"""
from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

PRIMARY_INPUT = -1
UNDRIVEN = -2


class GateKind(enum.Enum):
    AND = "AND"
    NAND = "NAND"
    OR = "OR"
    NOR = "NOR"
    XOR = "XOR"
    XNOR = "XNOR"
    BUF = "BUF"
    INV = "INV"
    TIE0 = "TIE0"
    TIE1 = "TIE1"

    @property
    def code(self) -> int:
        return KIND_CODE[self]

    @property
    def is_tie(self) -> bool:
        return self in (GateKind.TIE0, GateKind.TIE1)

    def check_arity(self, n: int) -> bool:
        if self in (GateKind.INV, GateKind.BUF):
            return n == 1
        if self.is_tie:
            return n == 0
        if self in (GateKind.XOR, GateKind.XNOR):
            return n == 2
        return n >= 2


# Kernel codes: ``code >> 1`` selects the base operation (AND, OR, XOR,
# identity, constant) and the low bit inverts the result.
KIND_CODE = {
    GateKind.AND: 0, GateKind.NAND: 1,
    GateKind.OR: 2, GateKind.NOR: 3,
    GateKind.XOR: 4, GateKind.XNOR: 5,
    GateKind.BUF: 6, GateKind.INV: 7,
    GateKind.TIE0: 8, GateKind.TIE1: 9,
}
KIND_FROM_CODE = {v: k for k, v in KIND_CODE.items()}

TWO_INPUT_KINDS = (GateKind.AND, GateKind.NAND, GateKind.OR,
                   GateKind.NOR, GateKind.XOR, GateKind.XNOR)


def eval_kind(kind: GateKind, values: Sequence[int]) -> int:
    """Evaluate ``kind`` on 0/1 input values (ints or integer arrays)."""
    if kind.is_tie:
        return kind.code & 1
    op = kind.code >> 1
    acc = values[0] * 1
    for v in values[1:]:
        if op == 0:
            acc = acc & v
        elif op == 1:
            acc = acc | v
        elif op == 2:
            acc = acc ^ v
    return acc ^ (kind.code & 1)


class NetlistError(ValueError):
    """Structural problem in a netlist (undeclared net, multiple drivers, ...)."""


class CycleError(NetlistError):
    def __init__(self, witness: list[int]):
        self.witness = witness
        super().__init__(f"combinational cycle through gates {witness}")


@dataclass(frozen=True)
class Gate:
    id: int
    kind: GateKind
    inputs: tuple[int, ...]
    output: int


@dataclass
class FlatNetlist:
    """Array view of a netlist consumed by the simulation and encoding kernels."""

    kind: np.ndarray       # int8 [G]
    fan_ptr: np.ndarray    # int64 [G + 1]
    fan_idx: np.ndarray    # int32 [E]
    out: np.ndarray        # int32 [G]
    order: np.ndarray      # int32 [G], topological
    level: np.ndarray      # int32 [G]
    inputs: np.ndarray     # int32 [PI]
    outputs: np.ndarray    # int32 [PO]
    n_nets: int
    groups: list = field(default_factory=list)


class Netlist:
    """Mutable-while-building gate netlist.

    Treat a netlist as read-only once it is handed to another component;
    transformations in this package work on copies.
    """

    def __init__(self, name: str = ""):
        self.name = name
        self.net_names: list[str] = []
        self.net_driver: list[int] = []
        self.gates: list[Gate] = []
        self.inputs: list[int] = []
        self.outputs: list[int] = []
        self._ids: dict[str, int] = {}
        self._fanout: list[list[tuple[int, int]]] | None = None
        self._flat: FlatNetlist | None = None
        self._fresh = 0

    # -- construction -----------------------------------------------------
    def _touch(self):
        self._fanout = None
        self._flat = None

    def add_net(self, name: str) -> int:
        if name in self._ids:
            raise NetlistError(f"duplicate net name {name!r}")
        nid = len(self.net_names)
        self.net_names.append(name)
        self.net_driver.append(UNDRIVEN)
        self._ids[name] = nid
        self._touch()
        return nid

    def fresh_name(self, prefix: str) -> str:
        while True:
            name = f"{prefix}{self._fresh}"
            self._fresh += 1
            if name not in self._ids:
                return name

    def add_input(self, name: str) -> int:
        nid = self.add_net(name)
        self.net_driver[nid] = PRIMARY_INPUT
        self.inputs.append(nid)
        return nid

    def add_output(self, net: int | str) -> int:
        nid = self.net_id(net) if isinstance(net, str) else net
        self.outputs.append(nid)
        return nid

    def add_gate(self, kind: GateKind, inputs: Sequence[int], output: int | str) -> int:
        inputs = tuple(int(i) for i in inputs)
        if not kind.check_arity(len(inputs)):
            raise NetlistError(f"{kind.value} cannot take {len(inputs)} inputs")
        if isinstance(output, str):
            out = self._ids.get(output)
            if out is None:
                out = self.add_net(output)
        else:
            out = output
        if self.net_driver[out] != UNDRIVEN:
            raise NetlistError(f"net {self.net_names[out]!r} is multiply driven")
        gid = len(self.gates)
        self.gates.append(Gate(gid, kind, inputs, out))
        self.net_driver[out] = gid
        self._touch()
        return gid

    def replace_gate(self, gid: int, kind: GateKind | None = None,
                     inputs: Sequence[int] | None = None) -> None:
        g = self.gates[gid]
        kind = g.kind if kind is None else kind
        inputs = g.inputs if inputs is None else tuple(int(i) for i in inputs)
        if not kind.check_arity(len(inputs)):
            raise NetlistError(f"{kind.value} cannot take {len(inputs)} inputs")
        self.gates[gid] = Gate(gid, kind, inputs, g.output)
        self._touch()

    def copy(self, name: str | None = None) -> "Netlist":
        n = Netlist(self.name if name is None else name)
        n.net_names = list(self.net_names)
        n.net_driver = list(self.net_driver)
        n.gates = list(self.gates)
        n.inputs = list(self.inputs)
        n.outputs = list(self.outputs)
        n._ids = dict(self._ids)
        n._fresh = self._fresh
        return n

    # -- queries ----------------------------------------------------------
    @property
    def n_nets(self) -> int:
        return len(self.net_names)

    def net_id(self, name: str) -> int:
        try:
            return self._ids[name]
        except KeyError:
            raise NetlistError(f"unknown net {name!r}") from None

    def has_net(self, name: str) -> bool:
        return name in self._ids

    def driver_gate(self, net: int) -> Gate | None:
        d = self.net_driver[net]
        return self.gates[d] if d >= 0 else None

    def fanout(self) -> list[list[tuple[int, int]]]:
        """Per-net list of ``(gate id, pin)`` sinks."""
        if self._fanout is None:
            fo: list[list[tuple[int, int]]] = [[] for _ in range(self.n_nets)]
            for g in self.gates:
                for pin, n in enumerate(g.inputs):
                    fo[n].append((g.id, pin))
            self._fanout = fo
        return self._fanout

    def sinks(self, net: int) -> list[tuple[int, int]]:
        return self.fanout()[net]

    def validate(self) -> None:
        for nid, d in enumerate(self.net_driver):
            if d == UNDRIVEN:
                raise NetlistError(f"net {self.net_names[nid]!r} has no driver")
        for o in self.outputs:
            if not 0 <= o < self.n_nets:
                raise NetlistError(f"primary output {o} does not name a net")
        topo_order(self)

    def flat(self) -> FlatNetlist:
        if self._flat is None:
            self._flat = _flatten(self)
        return self._flat

    def __repr__(self):
        return (f"Netlist({self.name!r}, pi={len(self.inputs)}, po={len(self.outputs)}, "
                f"gates={len(self.gates)})")


# -- topology --------------------------------------------------------------

def find_cycle(netlist: Netlist) -> list[int] | None:
    """Return a witness cycle (gate ids in edge order) or ``None``."""
    try:
        topo_order(netlist)
    except CycleError as exc:
        return exc.witness
    return None


def topo_order(netlist: Netlist) -> list[int]:
    """Kahn topological order of gate ids.

    Raises
    ------
    CycleError
        With ``witness`` holding the gate ids of one combinational cycle.
    """
    gates = netlist.gates
    fo = netlist.fanout()
    indeg = [0] * len(gates)
    for g in gates:
        indeg[g.id] = sum(1 for n in g.inputs if netlist.net_driver[n] >= 0)
    queue = deque(g.id for g in gates if indeg[g.id] == 0)
    order = []
    while queue:
        gid = queue.popleft()
        order.append(gid)
        for sink, _ in fo[gates[gid].output]:
            indeg[sink] -= 1
            if indeg[sink] == 0:
                queue.append(sink)
    if len(order) == len(gates):
        return order
    raise CycleError(_cycle_witness(netlist, {g for g in range(len(gates)) if indeg[g] > 0}))


def _cycle_witness(netlist: Netlist, remaining: set[int]) -> list[int]:
    # Every remaining gate has a remaining predecessor; walking predecessors
    # must revisit a gate.
    start = min(remaining)
    seen: dict[int, int] = {}
    path = []
    g = start
    while g not in seen:
        seen[g] = len(path)
        path.append(g)
        g = next(netlist.net_driver[n] for n in netlist.gates[g].inputs
                 if netlist.net_driver[n] in remaining)
    cycle = path[seen[g]:]
    cycle.reverse()
    return cycle


def _flatten(netlist: Netlist) -> FlatNetlist:
    order = np.asarray(topo_order(netlist), dtype=np.int32)
    G = len(netlist.gates)
    kind = np.empty(G, dtype=np.int8)
    out = np.empty(G, dtype=np.int32)
    fan_ptr = np.zeros(G + 1, dtype=np.int64)
    for g in netlist.gates:
        kind[g.id] = g.kind.code
        out[g.id] = g.output
        fan_ptr[g.id + 1] = len(g.inputs)
    np.cumsum(fan_ptr, out=fan_ptr)
    fan_idx = np.empty(int(fan_ptr[-1]), dtype=np.int32)
    for g in netlist.gates:
        fan_idx[fan_ptr[g.id]:fan_ptr[g.id + 1]] = g.inputs
    net_level = np.zeros(netlist.n_nets, dtype=np.int32)
    level = np.zeros(G, dtype=np.int32)
    for gid in order:
        g = netlist.gates[gid]
        lv = 1 + max((net_level[n] for n in g.inputs), default=-1)
        level[gid] = lv
        net_level[g.output] = lv
    flat = FlatNetlist(kind, fan_ptr, fan_idx, out, order, level,
                       np.asarray(netlist.inputs, dtype=np.int32),
                       np.asarray(netlist.outputs, dtype=np.int32),
                       netlist.n_nets)
    # (level, kind, arity) groups for the vectorised numpy simulator
    if G:
        arity = np.diff(fan_ptr)
        keys = np.stack([level.astype(np.int64), kind.astype(np.int64), arity], axis=1)
        uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
        inverse = inverse.ravel()
        for gi, (lv, k, a) in enumerate(uniq):
            members = np.nonzero(inverse == gi)[0]
            pins = fan_idx[fan_ptr[members][:, None] + np.arange(a)[None, :]] if a else None
            flat.groups.append((int(lv), int(k), pins, out[members]))
    return flat


# -- analysis ----------------------------------------------------------------

@dataclass
class NetlistStats:
    inputs: int
    outputs: int
    gates: int
    per_kind: dict[str, int]
    inv_buf: int

    def as_dict(self) -> dict:
        return {"inputs": self.inputs, "outputs": self.outputs, "gates": self.gates,
                "per_kind": dict(self.per_kind), "inv_buf": self.inv_buf}


def stats(netlist: Netlist) -> NetlistStats:
    per_kind = {k.value: 0 for k in GateKind}
    for g in netlist.gates:
        per_kind[g.kind.value] += 1
    return NetlistStats(len(netlist.inputs), len(netlist.outputs), len(netlist.gates),
                        per_kind, per_kind["INV"] + per_kind["BUF"])


def gate_nets(netlist: Netlist, gid: int) -> set[int]:
    g = netlist.gates[gid]
    return set(g.inputs) | {g.output}


def neighborhood_nets(netlist: Netlist, gate: int, radius: int) -> set[int]:
    """Nets within ``radius`` gate-hops of ``gate``, excluding its own nets.

    One hop moves from a net through any gate attached to it (driver or sink)
    to that gate's other nets; the gate's own input and output nets are hop 0.
    This is the logical stand-in for a placement-based spatial search.
    """
    if not 0 <= gate < len(netlist.gates):
        raise NetlistError(f"unknown gate id {gate}")
    if radius < 1:
        raise ValueError("radius must be >= 1")
    own = gate_nets(netlist, gate)
    visited = set(own)
    frontier = list(own)
    fo = netlist.fanout()
    drivers = netlist.net_driver
    gates = netlist.gates
    for _ in range(radius):
        nxt = []
        for n in frontier:
            attached = [s for s, _ in fo[n]]
            if drivers[n] >= 0:
                attached.append(drivers[n])
            for gid in attached:
                g = gates[gid]
                for m in g.inputs + (g.output,):
                    if m not in visited:
                        visited.add(m)
                        nxt.append(m)
        if not nxt:
            break
        frontier = nxt
    return visited - own


def transitive_fanout(netlist: Netlist, nets: Iterable[int]) -> np.ndarray:
    """Boolean mask over nets reachable forward from ``nets`` (inclusive)."""
    mask = np.zeros(netlist.n_nets, dtype=bool)
    fo = netlist.fanout()
    stack = list(nets)
    for n in stack:
        mask[n] = True
    while stack:
        n = stack.pop()
        for gid, _ in fo[n]:
            o = netlist.gates[gid].output
            if not mask[o]:
                mask[o] = True
                stack.append(o)
    return mask
