import json
import math

import numpy as np
import pytest

from catalyst_towers import costmodel
from catalyst_towers.gadgets import (
    TowerSpec,
    build_ghz_fanin,
    build_ghz_fanout,
    build_in_circuit_tower,
    build_independent_tower,
    build_logical_and_compute,
    build_logical_and_uncompute,
    build_mct,
    copies_state,
    ghz_fanin,
    ghz_fanout,
    rus_teleport_enumerate,
    tower_expected_state,
    tower_input_state,
    tower_num_qubits,
    verify_all,
    verify_tower,
)
from catalyst_towers.statevec import (
    CircuitError,
    Gate,
    Measure,
    QuantumState,
    fidelity,
    ket0,
    partial_overlap,
    plus,
    random_qubit,
    random_state,
    rz_matrix,
    rz_resource,
    run_all_branches,
)

SQ2 = 1 / math.sqrt(2)


def _and_ideal(amps2):
    """|x>|y> -> |x>|y>|x AND y> written out by hand."""
    out = np.zeros(8, dtype=complex)
    for x in (0, 1):
        for y in (0, 1):
            out[4 * x + 2 * y + (x & y)] = amps2[2 * x + y]
    return QuantumState(out)


# --- logical AND --------------------------------------------------------------

@pytest.mark.parametrize("x,y", [(0, 0), (0, 1), (1, 0), (1, 1)])
def test_and_compute_basis(x, y):
    (br,) = run_all_branches(build_logical_and_compute(), QuantumState.basis([x, y, 0]))
    assert fidelity(br.final_state, QuantumState.basis([x, y, x & y])) > 1 - 1e-12


def test_and_compute_bell_input():
    bell = QuantumState([SQ2, 0, 0, SQ2])
    (br,) = run_all_branches(build_logical_and_compute(), QuantumState.product(bell, ket0()))
    ghz = np.zeros(8, dtype=complex)
    ghz[0] = ghz[7] = SQ2
    assert fidelity(br.final_state, QuantumState(ghz)) > 1 - 1e-12


def test_and_compute_uses_four_t():
    circ = build_logical_and_compute()
    assert circ.t_count == 4
    assert [op.name for op in circ.ops if isinstance(op, Gate) and op.name in ("t", "tdg")] \
        == ["t", "tdg", "tdg", "t"]


@pytest.mark.parametrize("x,y", [(0, 0), (0, 1), (1, 0), (1, 1)])
def test_and_uncompute_basis_both_branches(x, y):
    res = run_all_branches(build_logical_and_uncompute(), QuantumState.basis([x, y, x & y]))
    assert len(res) == 2
    for br in res:
        assert br.probability == pytest.approx(0.5)
        assert fidelity(br.final_state, QuantumState.basis([x, y, 0])) > 1 - 1e-12


def test_and_uncompute_superpositions(rng):
    circ = build_logical_and_uncompute()
    assert circ.t_count == 0
    for _ in range(20):
        inp = random_state(2, rng)
        for br in run_all_branches(circ, _and_ideal(inp.amplitudes)):
            assert fidelity(br.final_state, QuantumState.product(inp, ket0())) > 1 - 1e-10


# --- in-circuit towers ---------------------------------------------------------

def _two_layer_reference():
    """The 2-layer in-circuit tower written out gate by gate (a..g = 0..6)."""
    a, b, c, d, e, f, g = range(7)

    def and_compute(p, q, t):
        return [("h", (t,)), ("t", (t,)), ("cx", (p, t)), ("cx", (q, t)),
                ("fanout", (t, p, q)), ("tdg", (p,)), ("tdg", (q,)), ("t", (t,)),
                ("fanout", (t, p, q)), ("h", (t,)), ("s", (t,))]

    def and_uncompute(p, q, t):
        return [("h", (t,)), ("M", (t,)), ("cz", (p, q)), ("x", (t,))]

    return ([("x", (c,)), ("fanout", (a, b, c))] + and_compute(b, c, d) + [("cx", (a, d))]
            + [("x", (f,)), ("fanout", (d, e, f))] + and_compute(e, f, g) + [("cx", (d, g))]
            + [("rz", (g,))]
            + [("cx", (d, g))] + and_uncompute(e, f, g) + [("cx", (e, f)), ("fanout", (d, e, f)),
                                                            ("x", (f,))]
            + [("cx", (a, d))] + and_uncompute(b, c, d) + [("cx", (b, c)), ("fanout", (a, b, c)),
                                                            ("x", (c,))])


def test_two_layer_matches_reference_gate_for_gate():
    circ = build_in_circuit_tower(TowerSpec("in_circuit", 2, 0.3))
    got = [("M", (op.qubit,)) if isinstance(op, Measure) else (op.name, op.qubits)
           for op in circ.ops]
    assert got == _two_layer_reference()
    assert circ.labels["data"] == [(0, 0), (1, 0), (4, 1)]
    assert [line for line, _ in circ.labels["catalysts"]] == [2, 5]


@pytest.mark.parametrize("k", [0, 2])
def test_two_layer_outputs(rng, k):
    for _ in range(5):
        theta = rng.uniform(0, 2 * math.pi)
        spec = TowerSpec("in_circuit", 2, theta, k)
        circ = build_in_circuit_tower(spec)
        psi = [random_qubit(rng) for _ in range(3)]
        # expected outputs written out by hand for each line
        expected = QuantumState.product(
            rz_matrix(2**k * theta) @ psi[0], rz_matrix(2**k * theta) @ psi[1],
            rz_resource(2**k * theta), ket0(),
            rz_matrix(2 ** (k + 1) * theta) @ psi[2], rz_resource(2 ** (k + 1) * theta), ket0())
        res = run_all_branches(circ, tower_input_state(circ, psi))
        assert len(res) == 4
        assert abs(res.total_probability - 1) < 1e-10
        for br in res:
            assert fidelity(br.final_state, expected) > 1 - 1e-9


def test_one_layer_zero_angle_is_identity(rng):
    circ = build_in_circuit_tower(TowerSpec("in_circuit", 1, 0.0))
    psi = [random_qubit(rng), random_qubit(rng)]
    inp = tower_input_state(circ, psi)
    for br in run_all_branches(circ, inp):
        assert fidelity(br.final_state, inp) > 1 - 1e-12
        assert partial_overlap(br.final_state, [2], [plus()]) > 1 - 1e-12


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_in_circuit_t_accounting(m):
    circ = build_in_circuit_tower(TowerSpec("in_circuit", m, 0.1))
    assert circ.t_count == 4 * m
    assert circ.count("rz") == 1
    assert circ.num_measurements == m
    r_t = 25.0
    assert circ.t_count + circ.count("rz") * r_t == costmodel.in_circuit_tower_tcount(m, r_t)


@pytest.mark.parametrize("m", [3, 4])
def test_deeper_in_circuit_towers(rng, m):
    report = verify_tower(TowerSpec("in_circuit", m), list(rng.uniform(0, 6, 3)), rng)
    assert report.passed
    assert report.details["yields"] == [2] + [1] * (m - 1)


def test_qubit_ceiling():
    assert tower_num_qubits(TowerSpec("in_circuit", 6)) == 19
    with pytest.raises(CircuitError):
        build_in_circuit_tower(TowerSpec("in_circuit", 6))


def test_bad_specs():
    with pytest.raises(ValueError):
        TowerSpec("in_circuit", 0)
    with pytest.raises(ValueError):
        TowerSpec("sideways", 2)
    with pytest.raises(ValueError):
        build_independent_tower(TowerSpec("independent", 3), "bent")


# --- independent towers --------------------------------------------------------

def test_base_three_layer_yields_and_size():
    circ = build_independent_tower(TowerSpec("independent", 3, 0.2), "base")
    assert circ.num_qubits == 13
    assert circ.labels["yields"] == (2, 3)


def test_modified_three_layer_yields_and_size():
    circ = build_independent_tower(TowerSpec("independent", 3, 0.2), "modified")
    assert circ.num_qubits == 16 == 6 * 3 - 2
    assert circ.labels["yields"] == (4, 2)
    assert circ.t_count == 4 * (2 * 3 - 1)


@pytest.mark.parametrize("variant", ["base", "modified"])
def test_independent_tower_outputs(rng, variant):
    for theta in rng.uniform(0, 2 * math.pi, 3):
        circ = build_independent_tower(TowerSpec("independent", 3, theta, 1), variant)
        expected = tower_expected_state(circ)
        res = run_all_branches(circ, tower_input_state(circ))
        assert abs(res.total_probability - 1) < 1e-10
        for br in res:
            assert fidelity(br.final_state, expected) > 1 - 1e-9
            for line, level in circ.labels["data"]:
                target = rz_resource(2 ** (1 + level) * theta)
                assert partial_overlap(br.final_state, [line], [target]) > 1 - 1e-9


@pytest.mark.parametrize("variant", ["base", "modified"])
def test_independent_zero_angle_gives_plus(variant):
    circ = build_independent_tower(TowerSpec("independent", 3, 0.0), variant)
    for br in run_all_branches(circ, tower_input_state(circ)):
        for line, _ in circ.labels["data"]:
            assert partial_overlap(br.final_state, [line], [plus()]) > 1 - 1e-12


def test_small_modified_towers_match_planner_yields(rng):
    from catalyst_towers.planner import tower_yield
    for L in (1, 2, 3):
        circ = build_independent_tower(TowerSpec("independent", L), "modified")
        assert circ.labels["yields"] == tower_yield(L)
        assert circ.t_count == costmodel.independent_tower_tcount(L, 0)
        assert verify_tower(TowerSpec("independent_modified", L), [1.1, 2.9], rng).passed


# --- RUS ------------------------------------------------------------------------

def test_rus_round_one_and_two(rng):
    theta = 0.83
    psi = QuantumState(random_qubit(rng))
    target = QuantumState(rz_matrix(theta) @ psi.amplitudes)
    res = rus_teleport_enumerate(psi, theta, 2)
    by_bits = {b.outcome_bits: b for b in res}
    assert set(by_bits) == {"0", "10", "11"}
    assert by_bits["0"].probability == pytest.approx(0.5, abs=1e-12)
    assert by_bits["10"].probability == pytest.approx(0.25, abs=1e-12)
    assert by_bits["11"].probability == pytest.approx(0.25, abs=1e-12)
    assert fidelity(by_bits["0"].final_state, target) > 1 - 1e-10
    # fail leaves Rz(-theta); the doubled resource gives Rz(2 theta) Rz(-theta)
    manual = QuantumState(rz_matrix(2 * theta) @ rz_matrix(-theta) @ psi.amplitudes)
    assert fidelity(by_bits["10"].final_state, manual) > 1 - 1e-10
    assert fidelity(by_bits["10"].final_state, target) > 1 - 1e-10


def test_rus_geometric_probabilities(rng):
    for _ in range(5):
        theta = rng.uniform(0, 2 * math.pi)
        psi = QuantumState(random_qubit(rng))
        target = QuantumState(rz_matrix(theta) @ psi.amplitudes)
        res = rus_teleport_enumerate(psi, theta, 8)
        assert len(res) == 9
        for br in res:
            if br.outcome_bits.endswith("0"):
                assert br.probability == pytest.approx(2.0 ** -len(br.outcome_bits), abs=1e-12)
                assert fidelity(br.final_state, target) > 1 - 1e-10
        assert res[-1].outcome_bits == "1" * 8
        assert res[-1].probability == pytest.approx(2.0**-8, abs=1e-12)


def test_rus_zero_angle_identity(rng):
    psi = QuantumState(random_qubit(rng))
    for br in rus_teleport_enumerate(psi, 0.0, 4):
        assert fidelity(br.final_state, psi) > 1 - 1e-12


def test_rus_bad_rounds():
    with pytest.raises(ValueError):
        rus_teleport_enumerate(QuantumState(plus()), 0.1, 0)


# --- GHZ fan-out / fan-in ----------------------------------------------------------

def test_fanout_one_three_copies():
    res = ghz_fanout(QuantumState.basis("1"), 3)
    assert len(res.branches) == 2 and res.verdict
    for br in res.branches:
        # data, undistributed leg reset to 0, two copies
        assert fidelity(br.final_state, QuantumState.basis("1011")) > 1 - 1e-12


def test_fanout_plus_gives_bell():
    res = ghz_fanout(QuantumState(plus()), 2)
    bell = np.zeros(8, dtype=complex)
    bell[0b000] = bell[0b101] = SQ2
    for br in res.branches:
        assert fidelity(br.final_state, QuantumState(bell)) > 1 - 1e-12


def test_fanout_register_superposition(rng):
    for _ in range(5):
        assert ghz_fanout(random_state(2, rng), 2).verdict


def test_fanin_one():
    res = ghz_fanin(QuantumState.basis("111"), 1, 3)
    assert len(res.branches) == 4
    for br in res.branches:
        assert fidelity(br.final_state, QuantumState.basis("100")) > 1 - 1e-12


def test_fanin_superposition(rng):
    for _ in range(5):
        reg = random_state(2, rng)
        assert ghz_fanin(copies_state(reg, 3), 2, 3).verdict


def test_fanout_then_fanin_roundtrip(rng):
    reg = random_state(1, rng)
    out = ghz_fanout(reg, 3)
    for br in out.branches:
        # drop the reset GHZ leg and feed the copies to fan-in
        amps = br.final_state.tensor()[:, 0, :, :].reshape(-1)
        back = ghz_fanin(QuantumState(amps), 1, 3)
        assert back.verdict


def test_fan_circuits_need_k_two():
    with pytest.raises(ValueError):
        build_ghz_fanout(1, 1)
    with pytest.raises(ValueError):
        build_ghz_fanin(1, 1)


# --- multi-controlled Toffoli --------------------------------------------------------

def _ideal_mct(bits):
    *controls, t = bits
    return controls + [t ^ int(all(controls))]


def test_mct_two_is_toffoli():
    circ = build_mct(2)
    for br in run_all_branches(circ, QuantumState.basis("1100")):
        assert fidelity(br.final_state, QuantumState.basis("1110")) > 1 - 1e-12


@pytest.mark.parametrize("l", [2, 3, 4])
def test_mct_matches_permutation_on_basis(l):
    circ = build_mct(l)
    for idx in range(2 ** (l + 1)):
        bits = [int(b) for b in format(idx, f"0{l + 1}b")]
        expected = QuantumState.basis(_ideal_mct(bits) + [0] * (l - 1))
        for br in run_all_branches(circ, QuantumState.basis(bits + [0] * (l - 1))):
            assert fidelity(br.final_state, expected) > 1 - 1e-12


def test_mct_superposition(rng):
    l = 3
    circ = build_mct(l)
    inp = random_state(l + 1, rng)
    out = np.zeros(2 ** (l + 1), dtype=complex)
    for idx, a in enumerate(inp.amplitudes):
        bits = [int(b) for b in format(idx, f"0{l + 1}b")]
        out[int("".join(map(str, _ideal_mct(bits))), 2)] = a
    expected = QuantumState.product(QuantumState(out), QuantumState.zero(l - 1))
    for br in run_all_branches(circ, QuantumState.product(inp, QuantumState.zero(l - 1))):
        assert fidelity(br.final_state, expected) > 1 - 1e-10


def test_mct_resource_counts():
    circ = build_mct(4)
    assert circ.count("ccx") == 3
    assert len(circ.labels["ancillas"]) == 3
    with pytest.raises(ValueError):
        build_mct(1)
    with pytest.raises(ValueError):
        build_mct(7)


# --- batch ----------------------------------------------------------------------

def test_verify_all_reports_serialize():
    reports = verify_all(seed=1, trials=3)
    assert all(r.passed for r in reports), [r.name for r in reports if not r.passed]
    payload = json.loads(json.dumps([r.to_dict() for r in reports]))
    assert {r["name"] for r in payload} >= {"logical_and_compute", "rus_teleport", "mct_4"}
    for r in payload:
        assert 0 <= r["worst_fidelity"] <= 1 and 0 <= r["catalyst_fidelity"] <= 1
