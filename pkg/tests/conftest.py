from pathlib import Path

import numpy as np
import pytest

from beolcamo.bench import parse_bench, read_bench
from beolcamo.netlist import GateKind, Netlist

ROOT = Path(__file__).resolve().parents[1]
BENCH_DIR = ROOT / "benchmarks" / "iscas85"
ISCAS = ["c17", "c432", "c499", "c880", "c1355", "c1908", "c2670", "c3540", "c5315",
         "c6288", "c7552"]

C17 = """\
INPUT(1)
INPUT(2)
INPUT(3)
INPUT(6)
INPUT(7)
OUTPUT(22)
OUTPUT(23)
10 = NAND(1, 3)
11 = NAND(3, 6)
16 = NAND(2, 11)
19 = NAND(11, 7)
22 = NAND(10, 16)
23 = NAND(16, 19)
"""

_KINDS = [GateKind.AND, GateKind.NAND, GateKind.OR, GateKind.NOR, GateKind.XOR, GateKind.XNOR,
          GateKind.INV, GateKind.BUF]


def random_netlist(n_in: int, n_gates: int, seed: int, n_out: int = 3, ties: bool = False) -> Netlist:
    """Random combinational DAG; every gate reads earlier nets only."""
    rng = np.random.default_rng(seed)
    nl = Netlist(f"rand{seed}")
    nets = [nl.add_input(f"i{j}") for j in range(n_in)]
    kinds = _KINDS + ([GateKind.TIE0, GateKind.TIE1] if ties else [])
    for g in range(n_gates):
        k = kinds[rng.integers(len(kinds))]
        if k.is_tie:
            ins = []
        elif k in (GateKind.INV, GateKind.BUF):
            ins = [nets[rng.integers(len(nets))]]
        elif k in (GateKind.XOR, GateKind.XNOR):
            ins = list(rng.choice(len(nets), 2, replace=False)) if len(nets) > 1 else [0, 0]
            ins = [nets[i] for i in ins]
        else:
            ar = int(rng.integers(2, 5))
            ins = [nets[i] for i in rng.choice(len(nets), min(ar, len(nets)), replace=False)]
            if len(ins) < 2:
                ins = ins * 2
        gid = nl.add_gate(k, ins, f"g{g}")
        nets.append(nl.gates[gid].output)
    for o in nets[-n_out:]:
        nl.add_output(o)
    return nl


@pytest.fixture
def c17():
    return parse_bench(C17, name="c17")


@pytest.fixture(scope="session")
def iscas():
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = read_bench(BENCH_DIR / f"{name}.bench")
        return cache[name]
    return get


# acceptance verdicts, printed as one line per criterion at the end of the run
ACCEPTANCE: dict[str, str] = {}


def acceptance(label: str, ok: bool, detail: str) -> None:
    line = f"criterion {label:<3} {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[label] = line
    print(line)
    assert ok, line


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(ACCEPTANCE, key=lambda s: (int("".join(c for c in s if c.isdigit())), s)):
        terminalreporter.write_line(ACCEPTANCE[label])
