import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from beolcamo.bench import BenchSyntaxError, parse_bench, write_bench
from beolcamo.netlist import (CycleError, GateKind, Netlist, NetlistError, eval_kind, find_cycle,
                              neighborhood_nets, stats, topo_order, transitive_fanout)
from beolcamo.sim import exhaustive_patterns, simulate, simulate_nets, truth_table
from conftest import BENCH_DIR, ISCAS, random_netlist


def _eval_reference(nl, x):
    val = {}
    for j, i in enumerate(nl.inputs):
        val[i] = int(x[j])
    for gid in topo_order(nl):
        g = nl.gates[gid]
        val[g.output] = eval_kind(g.kind, [val[i] for i in g.inputs])
    return np.array([val[o] for o in nl.outputs], dtype=bool)


def test_eval_kind_table():
    rows = [(0, 0), (0, 1), (1, 0), (1, 1)]
    expect = {GateKind.AND: [0, 0, 0, 1], GateKind.NAND: [1, 1, 1, 0], GateKind.OR: [0, 1, 1, 1],
              GateKind.NOR: [1, 0, 0, 0], GateKind.XOR: [0, 1, 1, 0], GateKind.XNOR: [1, 0, 0, 1]}
    for k, tt in expect.items():
        assert [eval_kind(k, r) for r in rows] == tt
    assert eval_kind(GateKind.INV, [0]) == 1 and eval_kind(GateKind.BUF, [0]) == 0
    assert eval_kind(GateKind.TIE0, []) == 0 and eval_kind(GateKind.TIE1, []) == 1


def test_c17_stats(c17):
    s = stats(c17)
    assert (s.inputs, s.outputs, s.gates) == (5, 2, 6)
    assert s.per_kind["NAND"] == 6


def test_c17_truth_table_against_reference(c17):
    tt = truth_table(c17)
    for x in exhaustive_patterns(5):
        assert np.array_equal(simulate(c17, x), _eval_reference(c17, x))
    assert tt.shape == (32, 2)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 8), st.integers(1, 40), st.integers(0, 10**6))
def test_simulation_matches_reference(n_in, n_gates, seed):
    nl = random_netlist(n_in, n_gates, seed, ties=True)
    pats = exhaustive_patterns(n_in)
    got = simulate(nl, pats)
    for x, y in zip(pats, got):
        assert np.array_equal(y, _eval_reference(nl, x))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(0, 30), st.integers(0, 10**6))
def test_bench_round_trip(n_in, n_gates, seed):
    nl = random_netlist(n_in, n_gates, seed, n_out=2, ties=True)
    text = write_bench(nl)
    back = parse_bench(text)
    assert write_bench(back) == text
    pats = exhaustive_patterns(n_in)
    assert np.array_equal(simulate(nl, pats), simulate(back, pats))


def test_bench_statements_any_order():
    nl = parse_bench("OUTPUT(y)\ny = AND(a, t)\nt = NOT(b)\nINPUT(a)\nINPUT(b)\n")
    assert simulate(nl, [1, 0]).tolist() == [True]
    assert simulate(nl, [1, 1]).tolist() == [False]


def test_bench_constants_and_comments():
    nl = parse_bench("# header\nINPUT(a)\nOUTPUT(y)\nOUTPUT(z)\nk = TIE1()\nz = CONST0\n"
                     "y = AND(a, k)  # trailing\n")
    assert simulate(nl, [1]).tolist() == [True, False]


@pytest.mark.parametrize("text,line,col", [
    ("INPUT(a)\nOUTPUT(y)\ny = AND(a,\n", 3, 11),
    ("INPUT(a)\ny = FOO(a)\n", 2, 5),
    ("INPUT(a)\ny = DFF(a)\n", 2, 5),
    ("INPUT(a)\ny AND(a)\n", 2, 3),
    ("INPUT(a)\ny = AND(a, a) extra\n", 2, 15),
])
def test_bench_syntax_errors(text, line, col):
    with pytest.raises(BenchSyntaxError) as ei:
        parse_bench(text)
    assert (ei.value.line, ei.value.column) == (line, col)


def test_bench_semantic_errors():
    with pytest.raises(NetlistError, match="undeclared"):
        parse_bench("INPUT(a)\nOUTPUT(y)\ny = AND(a, b)\n")
    with pytest.raises(NetlistError, match="multiply driven"):
        parse_bench("INPUT(a)\nOUTPUT(y)\ny = NOT(a)\ny = BUFF(a)\n")
    with pytest.raises(NetlistError, match="3 inputs"):
        parse_bench("INPUT(a)\nINPUT(b)\nINPUT(c)\nOUTPUT(y)\ny = XOR(a, b, c)\n")


def test_cycle_detection_with_witness():
    with pytest.raises(CycleError) as ei:
        parse_bench("INPUT(a)\nOUTPUT(y)\ny = AND(a, z)\nz = NOT(y)\n")
    w = ei.value.witness
    assert len(w) == 2

    nl = Netlist()
    a = nl.add_input("a")
    nl.add_net("p")
    g0 = nl.add_gate(GateKind.BUF, [nl.net_id("p")], "q")
    nl.add_gate(GateKind.AND, [a, nl.gates[g0].output], "p")
    cyc = find_cycle(nl)
    assert sorted(cyc) == [0, 1]


def test_neighborhood_radius(c17):
    gid = c17.net_driver[c17.net_id("22")]
    r1 = {c17.net_names[n] for n in neighborhood_nets(c17, gid, 1)}
    # one hop from {10,16,22} through their other gates
    assert r1 == {"1", "3", "2", "11", "19", "23"}
    with pytest.raises(ValueError):
        neighborhood_nets(c17, gid, 0)
    assert neighborhood_nets(c17, gid, 1) <= neighborhood_nets(c17, gid, 2)


def test_transitive_fanout(c17):
    m = transitive_fanout(c17, [c17.net_id("7")])
    assert {c17.net_names[i] for i in np.nonzero(m)[0]} == {"7", "19", "23"}


def test_simulate_nets_shape(c17):
    v = simulate_nets(c17, exhaustive_patterns(5))
    assert v.shape == (32, c17.n_nets)
    with pytest.raises(NetlistError):
        simulate(c17, [0, 1])


@pytest.mark.parametrize("name", ISCAS)
def test_iscas_files_load(name):
    from beolcamo.bench import read_bench
    nl = read_bench(BENCH_DIR / f"{name}.bench")
    topo_order(nl)
    assert len(nl.inputs) > 0 and len(nl.outputs) > 0
