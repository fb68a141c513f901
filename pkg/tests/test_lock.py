import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from beolcamo.attack import equivalence_check
from beolcamo.bench import parse_bench, write_bench
from beolcamo.camouflage import Scheme, apply_camouflage, select_gates
from beolcamo.lock import Key, LockedCircuit, key_width, lock, lock_prior_art, resolve
from beolcamo.netlist import GateKind, NetlistError, topo_order
from beolcamo.sim import exhaustive_patterns, simulate, truth_table
from conftest import random_netlist


def test_key_width():
    assert [key_width(c) for c in (1, 2, 3, 4, 5, 8, 9)] == [0, 1, 2, 2, 3, 3, 4]


def test_key_file_round_trip(tmp_path, c17):
    locked, key = lock(apply_camouflage(c17, select_gates(c17, 0.5, 0), Scheme.extended(1), 0))
    key.save(tmp_path / "k.json")
    back = Key.load(tmp_path / "k.json")
    assert back.bitstring() == key.bitstring() and back.elements == key.elements
    with pytest.raises(ValueError):
        Key.from_bitstring("01x")


def _apply_key(locked, key):
    """Locked-circuit response with the key bits driven as inputs."""
    ks = {k: j for j, k in enumerate(locked.key_inputs)}
    data = locked.data_inputs
    pats = exhaustive_patterns(len(data))
    full = np.zeros((len(pats), len(locked.netlist.inputs)), dtype=bool)
    for j, i in enumerate(locked.netlist.inputs):
        if i in ks:
            full[:, j] = key.bits[ks[i]]
        else:
            full[:, j] = pats[:, data.index(i)]
    return simulate(locked.netlist, full)


@pytest.mark.parametrize("scheme", ["2to1", "3to1", "ext1", "ext2"])
def test_correct_key_restores_function(iscas, scheme):
    nl = iscas("c880")
    locked, key = lock(apply_camouflage(nl, select_gates(nl, 0.3, 4), Scheme.parse(scheme), 4))
    assert locked.n_key == len(key) == sum(e.width for e in locked.elements)
    offs = [e.offset for e in locked.elements]
    assert offs == sorted(offs) and offs[0] == 0
    assert [locked.netlist.net_names[k] for k in locked.key_inputs] == \
        [f"keyinput{i}" for i in range(locked.n_key)]
    assert equivalence_check(resolve(locked, key), nl).equivalent


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 7), st.integers(5, 30), st.integers(0, 10**6),
       st.sampled_from(["2to1", "3to1", "ext1", "ext2", "ambiguous:XOR,NAND,NOR",
                        "ambiguous:AND,OR", "muxpair", "muxpair:input", "dummyvia:2"]))
def test_any_key_resolution_matches_locked_simulation(n_in, n_gates, seed, scheme):
    nl = random_netlist(n_in, n_gates, seed)
    sc = Scheme.parse(scheme)
    sel = select_gates(nl, 0.5, seed)
    try:
        locked, key = lock(apply_camouflage(nl, sel, sc, seed)) if sc.is_wiring \
            else lock_prior_art(nl, sel, sc, seed)
    except (ValueError, NetlistError):
        return
    assert np.array_equal(truth_table(resolve(locked, key)), truth_table(nl))
    rng = np.random.default_rng(seed)
    for _ in range(4):
        k = Key(rng.random(locked.n_key) < 0.5, locked.elements)
        r = resolve(locked, k)
        topo_order(r)
        assert [r.net_names[i] for i in r.inputs] == [nl.net_names[i] for i in nl.inputs]
        assert np.array_equal(truth_table(r), _apply_key(locked, k))


def test_code_aliasing_mod_choices(c17):
    locked, key = lock(apply_camouflage(c17, select_gates(c17, 1 / 6, 0), Scheme.three_to_one(), 0))
    el = locked.elements[0]
    assert el.width == 2 and len(el.choices) == 3
    bits = key.bits.copy()
    bits[el.offset:el.offset + 2] = [True, True]     # code 3 aliases choice 0
    k3 = Key(bits, locked.elements)
    bits0 = bits.copy()
    bits0[el.offset:el.offset + 2] = [False, False]
    k0 = Key(bits0, locked.elements)
    assert k3.choice(el) == 0
    assert write_bench(resolve(locked, k3)) == write_bench(resolve(locked, k0))


def test_locked_file_round_trip(tmp_path, iscas):
    nl = iscas("c432")
    locked, key = lock(apply_camouflage(nl, select_gates(nl, 0.1, 0), Scheme.two_to_one(), 0))
    locked.save(tmp_path / "l.bench")
    back = LockedCircuit.load(tmp_path / "l.bench")
    assert back.n_key == locked.n_key
    assert equivalence_check(resolve(back, Key(key.bits)), nl).equivalent


def test_key_input_gap_rejected():
    nl = parse_bench("INPUT(a)\nINPUT(keyinput1)\nOUTPUT(y)\ny = AND(a, keyinput1)\n")
    with pytest.raises(NetlistError):
        LockedCircuit.from_netlist(nl)


def test_key_name_clash_rejected():
    nl = parse_bench("INPUT(a)\nINPUT(keyinput0)\nOUTPUT(y)\ny = AND(a, keyinput0)\n")
    with pytest.raises(NetlistError):
        lock(apply_camouflage(nl, select_gates(nl, 1.0, 0), Scheme.two_to_one(), 0))


def test_dummy_via_key_length(iscas):
    nl = iscas("c5315")
    for n in (30, 36, 55):
        locked, key = lock_prior_art(nl, select_gates(nl, 0.1, 0), Scheme.dummy_via(n), 0)
        assert locked.n_key == n
        assert equivalence_check(resolve(locked, key), nl).equivalent
    with pytest.raises(ValueError):
        lock_prior_art(nl, select_gates(nl, 0.001, 0), Scheme.dummy_via(500), 0)


def test_ambiguous_only_matching_kinds(iscas):
    nl = iscas("c432")
    sel = select_gates(nl, 1.0, 0)
    locked, key = lock_prior_art(nl, sel, Scheme.ambiguous(("XOR", "NAND", "NOR")), 0)
    kinds = {nl.gates[nl.net_driver[nl.net_id(e.gate)]].kind for e in locked.elements}
    assert kinds <= {GateKind.NAND, GateKind.NOR, GateKind.XOR}
    assert all(e.kind == "function" and len(e.choices) == 3 for e in locked.elements)
    assert equivalence_check(resolve(locked, key), nl).equivalent


def test_resolve_sweeps_dead_logic(c17):
    locked, key = lock(apply_camouflage(c17, select_gates(c17, 0.5, 0), Scheme.two_to_one(), 0))
    r = resolve(locked, key)
    assert len(r.inputs) == len(c17.inputs)
    assert len(r.gates) == len(c17.gates)
    assert not any(n.startswith("sel") or n.startswith("keyinv") for n in
                   (r.net_names[g.output] for g in r.gates))
