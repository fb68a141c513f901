"""BENCH netlist reader and writer.

Grammar (one statement per line, ``#`` starts a comment)::

    INPUT(name)
    OUTPUT(name)
    name = KIND(arg, ...)
    name = TIE0() | TIE1() | CONST0 | CONST1

Statements may appear in any order; nets are resolved after the whole file
has been read.  Names may start with a digit so the classic ISCAS-85 files
(``INPUT(1)``) load unchanged.
"""
from __future__ import annotations

import re
from pathlib import Path

from .netlist import GateKind, Netlist, NetlistError, topo_order

KEYWORDS = {
    "AND": GateKind.AND, "NAND": GateKind.NAND,
    "OR": GateKind.OR, "NOR": GateKind.NOR,
    "XOR": GateKind.XOR, "XNOR": GateKind.XNOR,
    "NOT": GateKind.INV, "INV": GateKind.INV,
    "BUF": GateKind.BUF, "BUFF": GateKind.BUF,
    "TIE0": GateKind.TIE0, "TIE1": GateKind.TIE1,
    "CONST0": GateKind.TIE0, "CONST1": GateKind.TIE1,
}
SEQUENTIAL = {"DFF", "DFFR", "DFFS", "LATCH", "FF"}

WRITE_NAME = {
    GateKind.INV: "NOT", GateKind.BUF: "BUFF",
}

_TOKEN = re.compile(r"\s*(?:(?P<name>[A-Za-z0-9_][A-Za-z0-9_.\[\]]*)|(?P<punct>[(),=]))")


class BenchSyntaxError(NetlistError):
    def __init__(self, msg: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {msg}")


def _tokenize(text: str, lineno: int) -> list[tuple[str, int]]:
    toks = []
    pos = 0
    end = len(text.rstrip())
    while pos < end:
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            col = pos + len(text[pos:]) - len(text[pos:].lstrip()) + 1
            raise BenchSyntaxError(f"unexpected character {text[col - 1]!r}", lineno, col)
        tok = m.group("name") or m.group("punct")
        toks.append((tok, m.start(m.lastgroup) + 1))
        pos = m.end()
    return toks


def _expect(toks, i, what, lineno):
    if i >= len(toks):
        col = toks[-1][1] + len(toks[-1][0]) if toks else 1
        raise BenchSyntaxError(f"expected {what!r} at end of line", lineno, col)
    tok, col = toks[i]
    if what == "name":
        if tok in "(),=":
            raise BenchSyntaxError(f"expected a net name, got {tok!r}", lineno, col)
    elif tok != what:
        raise BenchSyntaxError(f"expected {what!r}, got {tok!r}", lineno, col)
    return tok


def parse_bench(text: str, name: str = "") -> Netlist:
    """Parse BENCH text into a validated :class:`Netlist`.

    Raises
    ------
    BenchSyntaxError
        Malformed statement (with line and column).
    NetlistError
        Undeclared or multiply-driven nets, unsupported keyword or arity.
    CycleError
        The described circuit contains a combinational loop.
    """
    inputs: list[tuple[str, int]] = []
    outputs: list[tuple[str, int]] = []
    assigns: list[tuple[str, GateKind, list[str], int]] = []
    header_name = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line, _, comment = raw.partition("#")
        if not header_name and comment.strip().lower().startswith("netlist "):
            header_name = comment.strip()[8:].strip()
        if not line.strip():
            continue
        toks = _tokenize(line, lineno)
        head, col = toks[0]
        if head.upper() in ("INPUT", "OUTPUT") and len(toks) > 1 and toks[1][0] == "(":
            _expect(toks, 1, "(", lineno)
            net = _expect(toks, 2, "name", lineno)
            _expect(toks, 3, ")", lineno)
            if len(toks) > 4:
                raise BenchSyntaxError("trailing tokens", lineno, toks[4][1])
            (inputs if head.upper() == "INPUT" else outputs).append((net, lineno))
            continue
        _expect(toks, 0, "name", lineno)
        _expect(toks, 1, "=", lineno)
        kw = _expect(toks, 2, "name", lineno)
        kw_col = toks[2][1]
        kind = KEYWORDS.get(kw.upper())
        if kind is None:
            what = "sequential element" if kw.upper() in SEQUENTIAL else "gate keyword"
            raise BenchSyntaxError(f"unsupported {what} {kw!r}", lineno, kw_col)
        args: list[str] = []
        if len(toks) == 3:
            if not kind.is_tie:
                raise BenchSyntaxError(f"expected '(' after {kw}", lineno, kw_col + len(kw))
        else:
            _expect(toks, 3, "(", lineno)
            i = 4
            if i < len(toks) and toks[i][0] == ")":
                i += 1
            else:
                while True:
                    args.append(_expect(toks, i, "name", lineno))
                    i += 1
                    sep = _expect(toks, i, ")" if i >= len(toks) or toks[i][0] != "," else ",", lineno)
                    i += 1
                    if sep == ")":
                        break
            if i < len(toks):
                raise BenchSyntaxError("trailing tokens", lineno, toks[i][1])
        if not kind.check_arity(len(args)):
            if kind in (GateKind.XOR, GateKind.XNOR) and len(args) > 2:
                msg = f"{kw} with {len(args)} inputs is not supported; decompose to 2-input gates"
            else:
                msg = f"{kw} cannot take {len(args)} inputs"
            raise BenchSyntaxError(msg, lineno, kw_col)
        assigns.append((head, kind, args, lineno))

    nl = Netlist(name or header_name)
    for net, lineno in inputs:
        if nl.has_net(net):
            raise NetlistError(f"line {lineno}: input {net!r} declared twice")
        nl.add_input(net)
    for out, _, _, lineno in assigns:
        if nl.has_net(out):
            raise NetlistError(f"line {lineno}: net {out!r} is multiply driven")
        nl.add_net(out)
    for out, kind, args, lineno in assigns:
        ids = []
        for a in args:
            if not nl.has_net(a):
                raise NetlistError(f"line {lineno}: undeclared net {a!r}")
            ids.append(nl.net_id(a))
        nl.add_gate(kind, ids, nl.net_id(out))
    for net, lineno in outputs:
        if not nl.has_net(net):
            raise NetlistError(f"line {lineno}: undeclared output net {net!r}")
        nl.add_output(nl.net_id(net))
    topo_order(nl)
    return nl


def write_bench(netlist: Netlist, header: list[str] | tuple[str, ...] = ()) -> str:
    """Serialise ``netlist``; gates are emitted in id order, constants as ``TIE0()``/``TIE1()``."""
    names = netlist.net_names
    lines = []
    if netlist.name:
        lines.append(f"# netlist {netlist.name}")
    lines.extend(f"# {h}" for h in header)
    lines.extend(f"INPUT({names[n]})" for n in netlist.inputs)
    lines.append("")
    lines.extend(f"OUTPUT({names[n]})" for n in netlist.outputs)
    lines.append("")
    for g in netlist.gates:
        kw = WRITE_NAME.get(g.kind, g.kind.value)
        lines.append(f"{names[g.output]} = {kw}({', '.join(names[i] for i in g.inputs)})")
    return "\n".join(lines) + "\n"


def read_bench(path: str | Path, name: str | None = None) -> Netlist:
    path = Path(path)
    return parse_bench(path.read_text(), name=name if name is not None else path.stem)


def save_bench(netlist: Netlist, path: str | Path, header=()) -> None:
    Path(path).write_text(write_bench(netlist, header))
