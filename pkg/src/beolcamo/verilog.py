"""Minimal structural Verilog reader.

Understands a single flat module built from gate primitives
(``and nand or nor xor xnor not buf``) plus ``assign a = b;``,
``assign a = ~b;`` and constant assigns (``1'b0``/``1'b1``).  That is
enough for gate-level ISCAS-style netlists; anything else is rejected.
"""
from __future__ import annotations

import re
from pathlib import Path

from .netlist import GateKind, Netlist, NetlistError, topo_order

PRIMS = {
    "and": GateKind.AND, "nand": GateKind.NAND, "or": GateKind.OR, "nor": GateKind.NOR,
    "xor": GateKind.XOR, "xnor": GateKind.XNOR, "not": GateKind.INV, "buf": GateKind.BUF,
}
_IDENT = r"[A-Za-z_\\][A-Za-z0-9_$\[\]\.]*"


def _strip_comments(text: str) -> str:
    text = re.sub(r"/\*.*?\*/", " ", text, flags=re.S)
    return re.sub(r"//[^\n]*", " ", text)


def parse_verilog(text: str, name: str = "") -> Netlist:
    """Parse a flat gate-level module into a :class:`Netlist`.

    XOR/XNOR primitives with more than two inputs are decomposed into
    2-input chains.
    """
    body = _strip_comments(text)
    m = re.search(r"\bmodule\s+(" + _IDENT + r")", body)
    if m is None:
        raise NetlistError("no module found")
    mod_name = m.group(1)
    inputs: list[str] = []
    outputs: list[str] = []
    gates: list[tuple[GateKind, str, list[str]]] = []
    stmts = body[m.end():].split(";")
    for raw in stmts[1:]:          # stmts[0] is the port list
        s = " ".join(raw.split())
        if not s or s == "endmodule":
            continue
        if s.startswith("endmodule"):
            break
        word = s.split(" ", 1)[0]
        rest = s[len(word):].strip()
        if word in ("input", "output"):
            names = [x.strip() for x in rest.split(",") if x.strip()]
            if any("[" in x for x in names) or rest.startswith("["):
                raise NetlistError(f"vector ports are not supported: {s!r}")
            (inputs if word == "input" else outputs).extend(names)
        elif word == "wire":
            continue
        elif word == "assign":
            lhs, _, rhs = rest.partition("=")
            lhs, rhs = lhs.strip(), rhs.strip()
            if rhs in ("1'b0", "1'h0", "0"):
                gates.append((GateKind.TIE0, lhs, []))
            elif rhs in ("1'b1", "1'h1", "1"):
                gates.append((GateKind.TIE1, lhs, []))
            elif re.fullmatch(_IDENT, rhs):
                gates.append((GateKind.BUF, lhs, [rhs]))
            elif re.fullmatch(r"~\s*" + _IDENT, rhs):
                gates.append((GateKind.INV, lhs, [rhs[1:].strip()]))
            else:
                raise NetlistError(f"unsupported assign expression: {s!r}")
        elif word in PRIMS:
            pm = re.fullmatch(r"(?:" + _IDENT + r"\s*)?\((.*)\)", rest)
            if pm is None:
                raise NetlistError(f"malformed gate instance: {s!r}")
            pins = [x.strip() for x in pm.group(1).split(",")]
            out, ins = pins[0], pins[1:]
            kind = PRIMS[word]
            if kind in (GateKind.XOR, GateKind.XNOR) and len(ins) > 2:
                acc = ins[0]
                for i, x in enumerate(ins[1:-1]):
                    tmp = f"{out}__x{i}"
                    gates.append((GateKind.XOR, tmp, [acc, x]))
                    acc = tmp
                ins = [acc, ins[-1]]
            gates.append((kind, out, ins))
        else:
            raise NetlistError(f"unsupported statement: {s[:60]!r}")

    nl = Netlist(name or mod_name)
    for x in inputs:
        nl.add_input(x)
    for _, out, _ in gates:
        if nl.has_net(out):
            raise NetlistError(f"net {out!r} is multiply driven")
        nl.add_net(out)
    for kind, out, ins in gates:
        for x in ins:
            if not nl.has_net(x):
                raise NetlistError(f"undeclared net {x!r}")
        nl.add_gate(kind, [nl.net_id(x) for x in ins], nl.net_id(out))
    for x in outputs:
        if not nl.has_net(x):
            raise NetlistError(f"output {x!r} is never driven")
        nl.add_output(nl.net_id(x))
    topo_order(nl)
    return nl


def read_verilog(path: str | Path, name: str | None = None) -> Netlist:
    path = Path(path)
    return parse_verilog(path.read_text(), name=name if name is not None else path.stem)
