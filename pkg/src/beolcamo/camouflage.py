"""Interconnect camouflaging.

Each protected gate input receives a list of candidate source nets of which
exactly one is real.  Three wiring primitives are supported:

* ``two_to_one``   real net + 1 dummy net per input
* ``three_to_one`` real net + 2 dummy nets per input
* ``extended(m)``  constant 0, constant 1, real net + ``m - 1`` dummy nets

The extended primitive is combined with two netlist transformations that
make the constant wires indispensable: half of the protected INV/BUF gates
are rewritten into two-input gates with one constant input, and a few extra
two-input gates whose real inputs are constants ("disguised TIE cells") are
added and used as constant sources.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

import numpy as np

from . import _jit
from .bench import read_bench, save_bench
from .dyntopo import DynamicTopoOrder
from .netlist import GateKind, Netlist, NetlistError, eval_kind, neighborhood_nets

SIDECAR_FORMAT = "beolcamo.camo"
SIDECAR_VERSION = 1

# rng stream ids, one per pipeline stage
_S_SELECT, _S_TRANSFORM, _S_TIES, _S_DUMMY, _S_CONST, _S_ORDER = range(6)

INV_REWRITES = ((GateKind.NAND, 1), (GateKind.NOR, 0), (GateKind.XOR, 1), (GateKind.XNOR, 0))
BUF_REWRITES = ((GateKind.AND, 1), (GateKind.OR, 0), (GateKind.XOR, 0), (GateKind.XNOR, 1))
TIE_KINDS = (GateKind.AND, GateKind.NAND, GateKind.OR, GateKind.NOR, GateKind.XOR, GateKind.XNOR)


class CamouflageError(NetlistError):
    pass


def _rng(seed: int, stage: int) -> np.random.Generator:
    return np.random.default_rng([int(seed) & 0xFFFFFFFF, stage])


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


# -- schemes -----------------------------------------------------------------

class SchemeKind(str, enum.Enum):
    TWO_TO_ONE = "two_to_one"
    THREE_TO_ONE = "three_to_one"
    EXTENDED = "extended"
    AMBIGUOUS = "ambiguous"
    MUX_PAIR = "mux_pair"
    DUMMY_VIA = "dummy_via"


@dataclass(frozen=True)
class Scheme:
    """A camouflaging primitive or a prior-art locking model.

    ``m`` is the number of regular wires per input for ``extended``;
    ``kinds`` the function set for ``ambiguous``; ``n_dummy`` the number of
    dummy wires for ``dummy_via``; ``placement`` (``"output"`` or
    ``"input"``) the MUX position for ``mux_pair``.
    """
    kind: SchemeKind
    m: int = 0
    kinds: tuple[str, ...] = ()
    n_dummy: int = 0
    placement: str = "output"

    def __post_init__(self):
        k = self.kind
        if k is SchemeKind.EXTENDED and self.m < 1:
            raise ValueError("extended scheme needs m >= 1")
        if k is SchemeKind.AMBIGUOUS:
            if len(set(self.kinds)) < 2 or len(set(self.kinds)) != len(self.kinds):
                raise ValueError("ambiguous function set needs >= 2 distinct kinds")
            gk = [GateKind(x) for x in self.kinds]
            if any(g in (GateKind.INV, GateKind.BUF) or g.is_tie for g in gk) and \
                    len({g in (GateKind.INV, GateKind.BUF) for g in gk}) > 1:
                raise ValueError("ambiguous kinds must share one arity")
            if any(g.is_tie for g in gk):
                raise ValueError("constant kinds cannot form an ambiguous set")
        if k is SchemeKind.DUMMY_VIA and self.n_dummy < 1:
            raise ValueError("dummy_via needs n_dummy >= 1")
        if k is SchemeKind.MUX_PAIR and self.placement not in ("output", "input"):
            raise ValueError("mux placement must be 'output' or 'input'")

    # constructors
    @classmethod
    def two_to_one(cls):
        return cls(SchemeKind.TWO_TO_ONE)

    @classmethod
    def three_to_one(cls):
        return cls(SchemeKind.THREE_TO_ONE)

    @classmethod
    def extended(cls, m: int = 2):
        return cls(SchemeKind.EXTENDED, m=m)

    @classmethod
    def ambiguous(cls, kinds=("XOR", "NAND", "NOR")):
        return cls(SchemeKind.AMBIGUOUS, kinds=tuple(GateKind(k).value if not isinstance(k, GateKind)
                                                       else k.value for k in kinds))

    @classmethod
    def mux_pair(cls, placement: str = "output"):
        return cls(SchemeKind.MUX_PAIR, placement=placement)

    @classmethod
    def dummy_via(cls, n_dummy: int):
        return cls(SchemeKind.DUMMY_VIA, n_dummy=n_dummy)

    @classmethod
    def parse(cls, text: str) -> "Scheme":
        """Parse ``2to1``, ``3to1``, ``ext1``/``ext2``/``extended:m=3``,
        ``ambiguous:XOR,NAND,NOR``, ``muxpair[:input]``, ``dummyvia:30``."""
        t = text.strip()
        head, _, arg = t.partition(":")
        h = head.lower().replace("-", "").replace("_", "")
        if h in ("2to1", "twotoone"):
            return cls.two_to_one()
        if h in ("3to1", "threetoone"):
            return cls.three_to_one()
        if h.startswith("ext") or h.startswith("extendedfixed"):
            digits = "".join(ch for ch in h if ch.isdigit())
            if arg:
                key, _, val = arg.partition("=")
                digits = val if val else key
            return cls.extended(int(digits) if digits else 2)
        if h in ("ambiguous", "ambiguousfunctionset"):
            return cls.ambiguous(tuple(x.strip().upper() for x in arg.split(",")) if arg
                                 else ("XOR", "NAND", "NOR"))
        if h in ("muxpair", "mux"):
            return cls.mux_pair(arg or "output")
        if h in ("dummyvia", "dummy"):
            if not arg:
                raise ValueError("dummyvia needs a wire count, e.g. dummyvia:30")
            return cls.dummy_via(int(arg))
        raise ValueError(f"unknown scheme {text!r}")

    @property
    def label(self) -> str:
        k = self.kind
        if k is SchemeKind.TWO_TO_ONE:
            return "TwoToOne"
        if k is SchemeKind.THREE_TO_ONE:
            return "ThreeToOne"
        if k is SchemeKind.EXTENDED:
            return f"ExtendedFixed{self.m}"
        if k is SchemeKind.AMBIGUOUS:
            return "Ambiguous(" + ",".join(self.kinds) + ")"
        if k is SchemeKind.MUX_PAIR:
            return f"MuxPair({self.placement})"
        return f"DummyVia{self.n_dummy}"

    @property
    def is_wiring(self) -> bool:
        """True for the n:1 wiring primitives handled by :func:`apply_camouflage`."""
        return self.kind in (SchemeKind.TWO_TO_ONE, SchemeKind.THREE_TO_ONE, SchemeKind.EXTENDED)

    @property
    def uses_constants(self) -> bool:
        return self.kind is SchemeKind.EXTENDED

    @property
    def regular_wires(self) -> int:
        return {SchemeKind.TWO_TO_ONE: 2, SchemeKind.THREE_TO_ONE: 3}.get(self.kind, self.m)

    def to_dict(self) -> dict:
        d = {"kind": self.kind.value}
        if self.kind is SchemeKind.EXTENDED:
            d["m"] = self.m
        if self.kind is SchemeKind.AMBIGUOUS:
            d["kinds"] = list(self.kinds)
        if self.kind is SchemeKind.DUMMY_VIA:
            d["n_dummy"] = self.n_dummy
        if self.kind is SchemeKind.MUX_PAIR:
            d["placement"] = self.placement
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Scheme":
        return cls(SchemeKind(d["kind"]), m=d.get("m", 0), kinds=tuple(d.get("kinds", ())),
                   n_dummy=d.get("n_dummy", 0), placement=d.get("placement", "output"))


# -- selection -----------------------------------------------------------------

@dataclass(frozen=True)
class SelectionSet:
    benchmark: str
    fraction: float
    seed: int
    gates: tuple[int, ...]
    pool_size: int = 0

    def to_dict(self) -> dict:
        return {"benchmark": self.benchmark, "fraction": self.fraction, "seed": self.seed,
                "pool_size": self.pool_size, "gates": list(self.gates)}

    @classmethod
    def from_dict(cls, d: dict) -> "SelectionSet":
        return cls(d["benchmark"], float(d["fraction"]), int(d["seed"]),
                   tuple(int(g) for g in d["gates"]), int(d.get("pool_size", 0)))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "SelectionSet":
        return cls.from_dict(json.loads(Path(path).read_text()))


def camouflageable_gates(netlist: Netlist) -> list[int]:
    return [g.id for g in netlist.gates if not g.kind.is_tie]


def select_gates(netlist: Netlist, fraction: float, seed: int,
                 benchmark: str | None = None) -> SelectionSet:
    """Uniform sample of ``round(fraction * pool)`` non-TIE gates."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    pool = camouflageable_gates(netlist)
    n = round_half_up(fraction * len(pool))
    rng = _rng(seed, _S_SELECT)
    picked = rng.choice(len(pool), size=n, replace=False) if n else np.zeros(0, dtype=np.int64)
    gates = tuple(sorted(pool[i] for i in picked))
    return SelectionSet(benchmark if benchmark is not None else netlist.name,
                        float(fraction), int(seed), gates, len(pool))


def empty_selection(netlist: Netlist, seed: int = 0) -> SelectionSet:
    return SelectionSet(netlist.name, 0.0, seed, (), len(camouflageable_gates(netlist)))


# -- transformations --------------------------------------------------------

@dataclass(frozen=True)
class TransformRecord:
    gate: int
    original: GateKind
    new: GateKind
    const_pin: int
    value: int


@dataclass(frozen=True)
class DisguisedTie:
    gate: int
    value: int


def add_tie(netlist: Netlist, value: int, prefix: str = "tie") -> int:
    """Append a TIE gate and return its output net."""
    name = netlist.fresh_name(f"{prefix}{value}_")
    gid = netlist.add_gate(GateKind.TIE1 if value else GateKind.TIE0, (), name)
    return netlist.gates[gid].output


def transform_inv_buf(netlist: Netlist, fraction: float = 0.5, seed: int = 0,
                      gates=None) -> tuple[Netlist, list[TransformRecord]]:
    """Rewrite ``round(fraction * count)`` INV/BUF gates into two-input gates
    with one constant input; returns a new netlist and the rewrite log.

    ``gates`` restricts the eligible INV/BUF set (default: all of them).
    """
    out = netlist.copy()
    pool = [g.id for g in netlist.gates if g.kind in (GateKind.INV, GateKind.BUF)]
    if gates is not None:
        allowed = set(gates)
        pool = [g for g in pool if g in allowed]
    rng = _rng(seed, _S_TRANSFORM)
    n = round_half_up(fraction * len(pool))
    picked = sorted(pool[i] for i in rng.choice(len(pool), size=n, replace=False)) if n else []
    log = []
    for gid in picked:
        g = out.gates[gid]
        table = INV_REWRITES if g.kind is GateKind.INV else BUF_REWRITES
        kind, value = table[int(rng.integers(len(table)))]
        const_pin = int(rng.integers(2))
        tie = add_tie(out, value)
        ins = [g.inputs[0]]
        ins.insert(const_pin, tie)
        out.replace_gate(gid, kind=kind, inputs=ins)
        log.append(TransformRecord(gid, g.kind, kind, const_pin, value))
    return out, log


def insert_disguised_ties(netlist: Netlist, count: int, seed: int = 0) -> tuple[Netlist, list[DisguisedTie]]:
    """Append ``count`` two-input gates of random kind whose inputs are TIE cells.

    The outputs are constant; they only become connected once they are used
    as constant sources by :func:`apply_camouflage`.
    """
    if count < 0:
        raise ValueError("count must be >= 0")
    out = netlist.copy()
    rng = _rng(seed, _S_TIES)
    ties = []
    for _ in range(count):
        kind = TIE_KINDS[int(rng.integers(len(TIE_KINDS)))]
        vals = [int(v) for v in rng.integers(2, size=2)]
        ins = [add_tie(out, v) for v in vals]
        name = out.fresh_name("dtie")
        gid = out.add_gate(kind, ins, name)
        ties.append(DisguisedTie(gid, eval_kind(kind, vals)))
    return out, ties


# -- candidate lists ----------------------------------------------------------

REGULAR = -1


@dataclass(frozen=True)
class CandidateList:
    """Candidate sources of one gate input; ``tags[i]`` is ``-1`` for a
    regular net or the constant value carried by a TIE-like source."""
    gate: int
    pin: int
    candidates: tuple[int, ...]
    secret: int
    tags: tuple[int, ...]

    @property
    def real(self) -> int:
        return self.candidates[self.secret]

    def __len__(self):
        return len(self.candidates)


@dataclass
class CamouflagedNetlist:
    base: Netlist
    scheme: Scheme
    lists: list[CandidateList]
    gates: tuple[int, ...]
    transforms: list[TransformRecord] = field(default_factory=list)
    ties: list[DisguisedTie] = field(default_factory=list)
    seed: int = 0
    selection: SelectionSet | None = None
    options: dict = field(default_factory=dict)
    original: Netlist | None = None

    # -- resolution --------------------------------------------------------
    def secret_indices(self) -> np.ndarray:
        return np.array([cl.secret for cl in self.lists], dtype=np.int64)

    def sizes(self) -> np.ndarray:
        return np.array([len(cl) for cl in self.lists], dtype=np.int64)

    def n_assignments(self) -> int:
        return int(np.prod([len(cl) for cl in self.lists], dtype=object)) if self.lists else 1

    def resolve(self, indices) -> Netlist:
        """Plain netlist with every candidate list fixed to ``indices``."""
        indices = list(indices)
        if len(indices) != len(self.lists):
            raise ValueError(f"expected {len(self.lists)} indices, got {len(indices)}")
        out = self.base.copy()
        pins: dict[int, list[int]] = {}
        for cl, idx in zip(self.lists, indices):
            if not 0 <= idx < len(cl):
                raise ValueError(f"index {idx} out of range for list of {len(cl)}")
            ins = pins.setdefault(cl.gate, list(out.gates[cl.gate].inputs))
            ins[cl.pin] = cl.candidates[idx]
        for gid, ins in pins.items():
            out.replace_gate(gid, inputs=ins)
        return out

    # -- serialisation ---------------------------------------------------------
    def to_sidecar(self) -> dict:
        nm = self.base.net_names
        gname = lambda gid: nm[self.base.gates[gid].output]  # noqa: E731
        return {
            "format": SIDECAR_FORMAT,
            "version": SIDECAR_VERSION,
            "netlist": self.base.name,
            "scheme": self.scheme.to_dict(),
            "seed": self.seed,
            "options": self.options,
            "selection": self.selection.to_dict() if self.selection else None,
            "camouflaged": [gname(g) for g in self.gates],
            "transforms": [{"gate": gname(t.gate), "from": t.original.value, "to": t.new.value,
                            "const_pin": t.const_pin, "value": t.value} for t in self.transforms],
            "disguised_ties": [{"gate": gname(t.gate), "value": t.value} for t in self.ties],
            "lists": [{"gate": gname(cl.gate), "pin": cl.pin,
                       "candidates": [nm[c] for c in cl.candidates],
                       "tags": list(cl.tags), "secret": cl.secret} for cl in self.lists],
        }

    def sidecar_text(self) -> str:
        return json.dumps(self.to_sidecar(), indent=1) + "\n"

    def save(self, bench_path: str | Path, sidecar_path: str | Path) -> None:
        save_bench(self.base, bench_path, header=[f"camouflaged with {self.scheme.label}, seed {self.seed}"])
        Path(sidecar_path).write_text(self.sidecar_text())


def load_camouflaged(bench_path: str | Path, sidecar_path: str | Path) -> CamouflagedNetlist:
    base = read_bench(bench_path)
    d = json.loads(Path(sidecar_path).read_text())
    if d.get("format") != SIDECAR_FORMAT:
        raise NetlistError(f"{sidecar_path}: not a camouflage sidecar")
    if d.get("version") != SIDECAR_VERSION:
        raise NetlistError(f"{sidecar_path}: unsupported sidecar version {d.get('version')}")
    base.name = d.get("netlist", base.name)
    gid = lambda name: base.net_driver[base.net_id(name)]  # noqa: E731
    lists = [CandidateList(gid(e["gate"]), int(e["pin"]),
                           tuple(base.net_id(c) for c in e["candidates"]),
                           int(e["secret"]), tuple(int(t) for t in e["tags"])) for e in d["lists"]]
    return CamouflagedNetlist(
        base=base, scheme=Scheme.from_dict(d["scheme"]), lists=lists,
        gates=tuple(gid(g) for g in d["camouflaged"]),
        transforms=[TransformRecord(gid(t["gate"]), GateKind(t["from"]), GateKind(t["to"]),
                                    int(t["const_pin"]), int(t["value"])) for t in d["transforms"]],
        ties=[DisguisedTie(gid(t["gate"]), int(t["value"])) for t in d["disguised_ties"]],
        seed=int(d["seed"]),
        selection=SelectionSet.from_dict(d["selection"]) if d.get("selection") else None,
        options=d.get("options", {}))


# -- the flow -------------------------------------------------------------------

class DummyPicker:
    """Draws loop-free, per-gate unique dummy nets from a growing neighborhood.

    The neighborhood starts at ``radius`` hops, is doubled while it keeps
    growing, and finally falls back to all eligible nets.
    """

    def __init__(self, netlist: Netlist, dt: DynamicTopoOrder, eligible: np.ndarray,
                 rng: np.random.Generator, radius: int = 5):
        self.netlist = netlist
        self.dt = dt
        self.eligible = eligible
        self.rng = rng
        self.radius = radius
        self._cache: dict[tuple[int, int], list[int]] = {}

    def _pool(self, gate: int, r: int | None) -> list[int]:
        if r is None:
            return list(range(len(self.eligible)))
        key = (gate, r)
        pool = self._cache.get(key)
        if pool is None:
            pool = sorted(neighborhood_nets(self.netlist, gate, r))
            self._cache = {key: pool}           # pins of one gate are served together
        return pool

    def pick(self, gate: int, sink: int, k: int, used: set[int], what: str) -> list[int]:
        chosen: list[int] = []
        if k <= 0:
            return chosen
        tried: set[int] = set()
        r: int | None = self.radius
        last_size = -1
        while True:
            pool = self._pool(gate, r)
            cand = [n for n in pool if n not in tried and n not in used and self.eligible[n]]
            for i in self.rng.permutation(len(cand)):
                n = cand[i]
                tried.add(n)
                if self.dt.try_add_edge(n, sink):
                    chosen.append(n)
                    used.add(n)
                    if len(chosen) == k:
                        return chosen
            if r is None:
                raise CamouflageError(f"no loop-free unique dummy net left for {what}")
            if len(pool) == last_size:
                r = None
            else:
                last_size = len(pool)
                r *= 2


class _TiePool:
    """Plain TIE sources: spare (disconnected) ones are reused first."""

    def __init__(self, netlist: Netlist, dt: DynamicTopoOrder):
        self.netlist = netlist
        self.dt = dt
        self.spare: dict[int, list[int]] = {0: [], 1: []}

    def get(self, value: int, used: set[int]) -> int:
        for i, n in enumerate(self.spare[value]):
            if n not in used:
                return self.spare[value].pop(i)
        net = add_tie(self.netlist, value)
        node = self.dt.add_node()
        assert node == net
        return net


def apply_camouflage(netlist: Netlist, selection: SelectionSet, scheme: Scheme, seed: int = 0, *,
                     radius: int = 5, disguised_prob: float = 0.2, n_disguised: int | None = None,
                     transform_fraction: float = 0.5) -> CamouflagedNetlist:
    """Build candidate lists for every input of the selected gates.

    For the extended primitive the selection's INV/BUF gates are first
    rewritten (``transform_fraction`` of them), ``n_disguised`` disguised TIE
    cells are inserted (default ``max(2, 5%`` of the selection``)``) and
    camouflaged as well, and each constant candidate is drawn from a
    disguised TIE with probability ``disguised_prob`` (from a plain TIE cell
    otherwise).  Dummy nets are drawn via :class:`DummyPicker`.

    Raises
    ------
    CamouflageError
        When some pin cannot get enough unique loop-free dummy nets.
    """
    if not scheme.is_wiring:
        raise ValueError(f"{scheme.label} is a locking model; use lock.lock_prior_art")
    gates = sorted(set(selection.gates))
    for gid in gates:
        if not 0 <= gid < len(netlist.gates):
            raise NetlistError(f"selected gate {gid} does not exist")
        if netlist.gates[gid].kind.is_tie:
            raise NetlistError(f"selected gate {gid} is a TIE cell")
    options = {"radius": radius, "disguised_prob": disguised_prob,
               "transform_fraction": transform_fraction}
    base = netlist.copy()
    transforms: list[TransformRecord] = []
    ties: list[DisguisedTie] = []
    if scheme.uses_constants and gates:
        inv_buf = [g for g in gates if netlist.gates[g].kind in (GateKind.INV, GateKind.BUF)]
        base, transforms = transform_inv_buf(base, transform_fraction, seed, gates=inv_buf)
        nd = max(2, round_half_up(0.05 * len(gates))) if n_disguised is None else n_disguised
        base, ties = insert_disguised_ties(base, nd, seed)
        options["n_disguised"] = nd
    camo_gates = gates + [t.gate for t in ties]

    const_val = np.full(base.n_nets, -1, dtype=np.int8)
    for g in base.gates:
        if g.kind.is_tie:
            const_val[g.output] = 1 if g.kind is GateKind.TIE1 else 0
    for t in ties:
        const_val[base.gates[t.gate].output] = t.value
    eligible = const_val < 0

    dt = DynamicTopoOrder.from_netlist(base)
    picker = DummyPicker(base, dt, eligible, _rng(seed, _S_DUMMY), radius)
    n_dummy = {SchemeKind.TWO_TO_ONE: 1, SchemeKind.THREE_TO_ONE: 2}.get(scheme.kind, scheme.m - 1)

    # slots: per pin a list of [tag, net, is_secret]; constant nets filled later
    pending: list[tuple[int, int, list[list]]] = []
    used_by_gate: dict[int, set[int]] = {}
    for gid in camo_gates:
        g = base.gates[gid]
        used = set(g.inputs) | {g.output}
        used_by_gate[gid] = used
        for pin, real in enumerate(g.inputs):
            what = f"pin {pin} of gate {base.net_names[g.output]!r}"
            rv = int(const_val[real])
            if scheme.uses_constants:
                slots = [[0, None, rv == 0], [1, None, rv == 1]]
                if rv >= 0:
                    slots[rv][1] = real
                    k = scheme.m
                else:
                    slots.append([REGULAR, real, True])
                    k = scheme.m - 1
            else:
                slots = [[REGULAR, real, True]]
                k = n_dummy
            for d in picker.pick(gid, g.output, k, used, what):
                slots.append([REGULAR, d, False])
            pending.append((gid, pin, slots))

    if scheme.uses_constants:
        _assign_constants(base, dt, pending, ties, used_by_gate, disguised_prob, _rng(seed, _S_CONST))

    rng = _rng(seed, _S_ORDER)
    lists = []
    for gid, pin, slots in pending:
        perm = rng.permutation(len(slots))
        cands = tuple(int(slots[i][1]) for i in perm)
        tags = tuple(int(slots[i][0]) for i in perm)
        secret = next(j for j, i in enumerate(perm) if slots[i][2])
        lists.append(CandidateList(gid, pin, cands, secret, tags))
        assert base.gates[gid].inputs[pin] == cands[secret]
    _check_unique(base, lists)
    return CamouflagedNetlist(base, scheme, lists, tuple(camo_gates), transforms, ties, int(seed),
                              selection, options, netlist)


def _assign_constants(base, dt, pending, ties, used_by_gate, prob, rng):
    """Fill constant slots with disguised-TIE outputs or TIE cells.

    Every disguised TIE first gets one random slot of its value (if one can
    take it without a loop); afterwards each remaining slot picks a
    disguised TIE with probability ``prob``.
    """
    tie_nets = {0: [], 1: []}
    for t in ties:
        tie_nets[t.value].append(base.gates[t.gate].output)
    slots = [(p, s) for p, (_, _, sl) in enumerate(pending) for s in range(len(sl))
             if sl[s][0] != REGULAR and (sl[s][1] is None or sl[s][2])]
    pool = _TiePool(base, dt)

    def try_dtie(p, s, net):
        gid, pin, sl = pending[p]
        used = used_by_gate[gid]
        if net in used:
            return False
        if not dt.try_add_edge(net, base.gates[gid].output):
            return False
        old = sl[s][1]
        if sl[s][2]:
            # the constant is the real input: rewire and recycle the old TIE
            ins = list(base.gates[gid].inputs)
            ins[pin] = net
            base.replace_gate(gid, inputs=ins)
            if old is not None and ins.count(old) == 0:
                used.discard(old)
                if base.driver_gate(old) is not None and base.driver_gate(old).kind.is_tie \
                        and not base.sinks(old):
                    pool.spare[sl[s][0]].append(old)
        sl[s][1] = net
        used.add(net)
        return True

    done = set()
    for t in ties:
        net = base.gates[t.gate].output
        for i in rng.permutation(len(slots)):
            p, s = slots[i]
            if (p, s) in done or pending[p][2][s][0] != t.value or pending[p][0] == t.gate:
                continue
            if try_dtie(p, s, net):
                done.add((p, s))
                break
    for p, s in slots:
        if (p, s) in done:
            continue
        sl = pending[p][2]
        value = sl[s][0]
        if tie_nets[value] and rng.random() < prob:
            order = rng.permutation(len(tie_nets[value]))
            if any(try_dtie(p, s, tie_nets[value][j]) for j in order):
                continue
        if sl[s][1] is None:
            gid = pending[p][0]
            net = pool.get(value, used_by_gate[gid])
            dt.try_add_edge(net, base.gates[gid].output)
            sl[s][1] = net
            used_by_gate[gid].add(net)


def _check_unique(base: Netlist, lists: list[CandidateList]) -> None:
    per_gate: dict[int, list[int]] = {}
    for cl in lists:
        if len(set(cl.candidates)) != len(cl.candidates):
            raise CamouflageError(f"duplicate candidates on gate {cl.gate} pin {cl.pin}")
        per_gate.setdefault(cl.gate, []).extend(c for i, c in enumerate(cl.candidates) if i != cl.secret)
    for gid, dummies in per_gate.items():
        g = base.gates[gid]
        own = set(g.inputs) | {g.output}
        if len(set(dummies)) != len(dummies) or own & set(dummies):
            raise CamouflageError(f"candidate sources of gate {gid} are not unique")


# -- acyclicity over assignments -------------------------------------------------

@_jit.njit
def _acyclic_batch(n_nodes, fsrc, fdst, lptr, lcand, ldst, choice):
    n_s = choice.shape[0]
    n_l = ldst.shape[0]
    n_e = fsrc.shape[0] + n_l
    res = np.zeros(n_s, dtype=np.bool_)
    src = np.empty(n_e, dtype=np.int64)
    dst = np.empty(n_e, dtype=np.int64)
    nf = fsrc.shape[0]
    for i in range(nf):
        src[i] = fsrc[i]
        dst[i] = fdst[i]
    indeg = np.empty(n_nodes, dtype=np.int64)
    head = np.empty(n_nodes + 1, dtype=np.int64)
    adj = np.empty(n_e, dtype=np.int64)
    queue = np.empty(n_nodes, dtype=np.int64)
    for s in range(n_s):
        for j in range(n_l):
            src[nf + j] = lcand[lptr[j] + choice[s, j]]
            dst[nf + j] = ldst[j]
        head[:] = 0
        indeg[:] = 0
        for e in range(n_e):
            head[src[e] + 1] += 1
            indeg[dst[e]] += 1
        for v in range(n_nodes):
            head[v + 1] += head[v]
        fill = head[:n_nodes].copy()
        for e in range(n_e):
            adj[fill[src[e]]] = dst[e]
            fill[src[e]] += 1
        qh = 0
        qt = 0
        for v in range(n_nodes):
            if indeg[v] == 0:
                queue[qt] = v
                qt += 1
        while qh < qt:
            v = queue[qh]
            qh += 1
            for k in range(head[v], head[v + 1]):
                w = adj[k]
                indeg[w] -= 1
                if indeg[w] == 0:
                    queue[qt] = w
                    qt += 1
        res[s] = qt == n_nodes
    return res


def acyclic_under(camo: CamouflagedNetlist, choices: np.ndarray) -> np.ndarray:
    """For each row of candidate indices, whether the resolved netlist is acyclic."""
    base = camo.base
    choices = np.atleast_2d(np.asarray(choices, dtype=np.int64))
    owned = {(cl.gate, cl.pin) for cl in camo.lists}
    fsrc, fdst = [], []
    for g in base.gates:
        for pin, n in enumerate(g.inputs):
            if (g.id, pin) not in owned:
                fsrc.append(n)
                fdst.append(g.output)
    lptr = np.zeros(len(camo.lists) + 1, dtype=np.int64)
    lptr[1:] = np.cumsum([len(cl) for cl in camo.lists])
    lcand = np.array([c for cl in camo.lists for c in cl.candidates], dtype=np.int64)
    ldst = np.array([base.gates[cl.gate].output for cl in camo.lists], dtype=np.int64)
    return _acyclic_batch(base.n_nets, np.array(fsrc, dtype=np.int64), np.array(fdst, dtype=np.int64),
                          lptr, lcand, ldst, choices)


def random_assignments(camo: CamouflagedNetlist, n: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    sizes = camo.sizes()
    return (rng.random((n, len(sizes))) * sizes[None, :]).astype(np.int64)


def all_assignments(camo: CamouflagedNetlist) -> np.ndarray:
    sizes = [len(cl) for cl in camo.lists]
    return np.array(list(product(*[range(s) for s in sizes])), dtype=np.int64).reshape(-1, len(sizes))


# -- functionality counts ------------------------------------------------------------

def _pin_symbols(scheme: Scheme, pin: int) -> list[str]:
    first = "ab"[pin] if pin < 2 else f"p{pin}_"
    second = "wx"[pin] if pin < 2 else f"q{pin}_"
    names = [first, second] + [f"{first}{j}" for j in range(2, 16)]
    if scheme.kind is SchemeKind.EXTENDED:
        return ["0", "1"] + names[:scheme.m]
    return names[:scheme.regular_wires]


def realizable_functions(kind: GateKind, scheme: Scheme, arity: int = 2):
    """Distinct functions one camouflaged gate can realize.

    Candidate nets are treated as independent variables.  Returns
    ``(variables, functions)`` with each function a tuple of output bits
    over all ``2**len(variables)`` rows, row ``r`` assigning bit ``j`` of
    ``r`` to ``variables[j]``.
    """
    if not scheme.is_wiring:
        raise ValueError("functionality counts are defined for the wiring primitives")
    if kind.is_tie or not kind.check_arity(arity) or kind in (GateKind.INV, GateKind.BUF):
        raise ValueError(f"unsupported gate kind/arity {kind.value}/{arity}")
    pins = [_pin_symbols(scheme, p) for p in range(arity)]
    variables = [s for syms in pins for s in syms if s not in ("0", "1")]
    rows = np.arange(1 << len(variables), dtype=np.int64)
    col = {v: ((rows >> j) & 1).astype(np.int64) for j, v in enumerate(variables)}
    col["0"] = np.zeros_like(rows)
    col["1"] = np.ones_like(rows)
    funcs = set()
    for combo in product(*pins):
        funcs.add(tuple(int(b) for b in eval_kind(kind, [col[s] for s in combo])))
    return variables, funcs


def function_count(kind: GateKind, scheme: Scheme, arity: int = 2) -> int:
    """Number of distinct Boolean functions realizable by one camouflaged gate,
    by exhaustive enumeration of candidate assignments."""
    return len(realizable_functions(kind, scheme, arity)[1])
