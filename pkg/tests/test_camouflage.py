import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from beolcamo.attack import equivalence_check
from beolcamo.bench import write_bench
from beolcamo.camouflage import (CamouflageError, Scheme, SelectionSet, acyclic_under,
                                 all_assignments, apply_camouflage, empty_selection, function_count,
                                 insert_disguised_ties, load_camouflaged, random_assignments,
                                 realizable_functions, round_half_up, select_gates,
                                 transform_inv_buf)
from beolcamo.dyntopo import DynamicTopoOrder
from beolcamo.netlist import CycleError, GateKind, topo_order
from beolcamo.sim import simulate_nets, truth_table
from conftest import random_netlist

FAMILY = [GateKind.AND, GateKind.NAND, GateKind.OR, GateKind.NOR]


def _tt(fn, variables):
    rows = range(1 << len(variables))
    return tuple(int(fn({v: (r >> j) & 1 for j, v in enumerate(variables)})) for r in rows)


@pytest.mark.parametrize("kind", FAMILY + [GateKind.XOR, GateKind.XNOR])
def test_counts_closed_form(kind):
    assert function_count(kind, Scheme.two_to_one()) == 4
    assert function_count(kind, Scheme.three_to_one()) == 9
    per = 7 if kind in (GateKind.XOR, GateKind.XNOR) else 5
    for m in (1, 2):
        assert function_count(kind, Scheme.extended(m)) == per * m


def test_counts_m3_enumerated():
    assert function_count(GateKind.AND, Scheme.extended(3)) == 17
    assert function_count(GateKind.XOR, Scheme.extended(3)) == 23


def test_xor_m2_function_set():
    variables, funcs = realizable_functions(GateKind.XOR, Scheme.extended(2))
    assert variables == ["a", "w", "b", "x"]
    expect = [lambda e: 0, lambda e: 1]
    for v in "awbx":
        expect += [lambda e, v=v: e[v], lambda e, v=v: 1 - e[v]]
    for p, q in [("a", "b"), ("a", "x"), ("w", "b"), ("w", "x")]:
        expect.append(lambda e, p=p, q=q: e[p] ^ e[q])
    assert funcs == {_tt(f, variables) for f in expect}
    assert len(funcs) == 14


def test_two_to_one_and_set():
    variables, funcs = realizable_functions(GateKind.AND, Scheme.two_to_one())
    want = {_tt(lambda e, p=p, q=q: e[p] & e[q], variables)
            for p, q in itertools.product("aw", "bx")}
    assert funcs == want


def test_counts_reject_locking_models():
    with pytest.raises(ValueError):
        function_count(GateKind.AND, Scheme.dummy_via(3))


def test_scheme_parse_labels():
    assert Scheme.parse("2to1").label == "TwoToOne"
    assert Scheme.parse("3to1").label == "ThreeToOne"
    assert Scheme.parse("ext1").label == "ExtendedFixed1"
    assert Scheme.parse("extended:m=3").label == "ExtendedFixed3"
    assert Scheme.parse("dummyvia:30").label == "DummyVia30"
    for s in ("2to1", "ext2", "ambiguous:XOR,NAND", "muxpair:input", "dummyvia:4"):
        sc = Scheme.parse(s)
        assert Scheme.from_dict(sc.to_dict()) == sc
    with pytest.raises(ValueError):
        Scheme.parse("magic")


def test_round_half_up():
    assert [round_half_up(x) for x in (0.5, 1.5, 2.5, 2.49)] == [1, 2, 3, 2]


def test_selection(iscas):
    nl = iscas("c432")
    a = select_gates(nl, 0.3, 5, "c432")
    b = select_gates(nl, 0.3, 5, "c432")
    assert a == b and len(a.gates) == round_half_up(0.3 * 171)
    assert len(set(a.gates)) == len(a.gates)
    assert select_gates(nl, 0.3, 6).gates != a.gates
    assert len(select_gates(nl, 1.0, 0).gates) == 171
    for bad in (0.0, -0.1, 1.5):
        with pytest.raises(ValueError):
            select_gates(nl, bad, 0)


def test_selection_file_round_trip(iscas, tmp_path):
    sel = select_gates(iscas("c880"), 0.2, 1, "c880")
    sel.save(tmp_path / "s.json")
    assert SelectionSet.load(tmp_path / "s.json") == sel


def test_selection_shared_across_schemes(iscas):
    nl = iscas("c432")
    sel = select_gates(nl, 0.2, 3)
    for sc in (Scheme.two_to_one(), Scheme.three_to_one(), Scheme.extended(1)):
        camo = apply_camouflage(nl, sel, sc, 3)
        assert set(sel.gates) <= set(camo.gates)
        assert camo.selection == sel


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 7), st.integers(5, 40), st.integers(0, 10**6))
def test_transform_inv_buf_preserves_function(n_in, n_gates, seed):
    nl = random_netlist(n_in, n_gates, seed)
    out, log = transform_inv_buf(nl, 0.5, seed)
    n_ib = sum(g.kind in (GateKind.INV, GateKind.BUF) for g in nl.gates)
    assert len(log) == round_half_up(0.5 * n_ib)
    for t in log:
        g = out.gates[t.gate]
        assert g.kind is t.new and len(g.inputs) == 2
    assert np.array_equal(truth_table(out), truth_table(nl))


def test_disguised_ties_are_constant(c17):
    out, ties = insert_disguised_ties(c17, 6, 0)
    vals = simulate_nets(out, np.zeros((1, 5), bool))[0]
    for t in ties:
        assert vals[out.gates[t.gate].output] == t.value
    assert np.array_equal(truth_table(out), truth_table(c17))


@pytest.mark.parametrize("scheme,size", [("2to1", 2), ("3to1", 3), ("ext1", 3), ("ext2", 4)])
def test_candidate_lists(iscas, scheme, size):
    nl = iscas("c880")
    sc = Scheme.parse(scheme)
    camo = apply_camouflage(nl, select_gates(nl, 0.3, 2), sc, 2)
    base = camo.base
    for cl in camo.lists:
        g = base.gates[cl.gate]
        assert len(cl.candidates) == size
        assert cl.candidates[cl.secret] == g.inputs[cl.pin]
        assert len(set(cl.candidates)) == size
        assert g.output not in cl.candidates
    for gid in camo.gates:
        pins = [c for cl in camo.lists if cl.gate == gid for c in cl.candidates
                if base.net_driver[c] < 0 or not base.gates[base.net_driver[c]].kind.is_tie]
        regular = [c for c in pins if c not in base.gates[gid].inputs]
        assert len(regular) == len(set(regular)), "dummy nets must be unique within a gate"
    if sc.uses_constants:
        tags = [cl.tags for cl in camo.lists]
        assert all(sorted(t)[-2:] == [0, 1] for t in tags)
        assert camo.ties and camo.transforms


def test_secret_resolution_is_equivalent(iscas):
    nl = iscas("c1908")
    for sc in ("2to1", "3to1", "ext1", "ext2"):
        camo = apply_camouflage(nl, select_gates(nl, 0.5, 1), Scheme.parse(sc), 1)
        assert equivalence_check(camo.resolve(camo.secret_indices()), nl).equivalent


@settings(max_examples=15, deadline=None)
@given(st.integers(3, 8), st.integers(10, 50), st.integers(0, 10**6),
       st.sampled_from(["2to1", "3to1", "ext1", "ext2"]), st.sampled_from([0.2, 0.5, 1.0]))
def test_random_resolutions_acyclic(n_in, n_gates, seed, scheme, fraction):
    nl = random_netlist(n_in, n_gates, seed)
    try:
        camo = apply_camouflage(nl, select_gates(nl, fraction, seed), Scheme.parse(scheme), seed)
    except CamouflageError:
        return
    choices = random_assignments(camo, 60, seed)
    flags = acyclic_under(camo, choices)
    assert flags.all()
    for ch in choices[:10]:
        topo_order(camo.resolve(ch))
    assert np.array_equal(truth_table(camo.resolve(camo.secret_indices())), truth_table(nl))


def test_acyclic_under_detects_cycles(c17):
    camo = apply_camouflage(c17, select_gates(c17, 0.5, 0), Scheme.two_to_one(), 0)
    # hand-made bad assignment: point a pin at the gate's own fanout
    base = camo.base
    cl = camo.lists[0]
    out = base.gates[cl.gate].output
    sink = next((gid for gid, _ in base.sinks(out)), None)
    if sink is None:
        pytest.skip("no fanout")
    from beolcamo.camouflage import CandidateList
    bad = CandidateList(cl.gate, cl.pin, (base.gates[sink].output, cl.candidates[cl.secret]), 1,
                        (-1, -1))
    camo.lists[0] = bad
    ch = camo.secret_indices().copy()
    ch[0] = 0
    assert not acyclic_under(camo, ch[None, :])[0]
    with pytest.raises(CycleError):
        topo_order(camo.resolve(ch))


def test_exhaustive_acyclicity_small(c17):
    camo = apply_camouflage(c17, select_gates(c17, 0.5, 1), Scheme.two_to_one(), 1)
    allc = all_assignments(camo)
    assert len(allc) == camo.n_assignments()
    assert acyclic_under(camo, allc).all()


def test_determinism_and_sidecar_round_trip(iscas, tmp_path):
    nl = iscas("c432")
    a = apply_camouflage(nl, select_gates(nl, 0.5, 7), Scheme.extended(2), 7)
    b = apply_camouflage(nl, select_gates(nl, 0.5, 7), Scheme.extended(2), 7)
    assert a.sidecar_text() == b.sidecar_text()
    assert write_bench(a.base) == write_bench(b.base)
    a.save(tmp_path / "x.bench", tmp_path / "x.json")
    back = load_camouflaged(tmp_path / "x.bench", tmp_path / "x.json")
    assert back.sidecar_text() == a.sidecar_text()
    c = apply_camouflage(nl, select_gates(nl, 0.5, 8), Scheme.extended(2), 8)
    assert c.sidecar_text() != a.sidecar_text()


def test_empty_selection_is_identity(iscas):
    nl = iscas("c432")
    camo = apply_camouflage(nl, empty_selection(nl), Scheme.extended(2), 0)
    assert camo.lists == [] and write_bench(camo.base) == write_bench(nl)


def test_exhausted_neighbourhood_raises(c17):
    with pytest.raises(CamouflageError):
        apply_camouflage(c17, select_gates(c17, 1.0, 0), Scheme.three_to_one(), 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 12), st.lists(st.tuples(st.integers(0, 11), st.integers(0, 11)),
                                    max_size=60))
def test_dynamic_topo_order_matches_brute_force(n, edges):
    dt = DynamicTopoOrder(n)
    adj = {i: set() for i in range(n)}

    def reach(u, v):
        seen, stack = {u}, [u]
        while stack:
            w = stack.pop()
            if w == v:
                return True
            for x in adj[w] - seen:
                seen.add(x)
                stack.append(x)
        return False

    for u, v in edges:
        u, v = u % n, v % n
        ok = dt.try_add_edge(u, v)
        assert ok == (u != v and not reach(v, u))
        if ok:
            adj[u].add(v)
        for a in range(n):
            for b in adj[a]:
                assert dt.ord[a] < dt.ord[b]
