"""Catalyst circuit gadgets and their verification by exact simulation.

Every tower is a binary tree of CT blocks.  A block at level ``j`` acts on
two lines ``(a, b)``, a catalyst ``|R_z(2^(k+j) theta)>`` and a logical-AND
ancilla.  It applies ``R_z(2^(k+j) theta)`` to both ``a`` and ``b`` provided
its ancilla receives ``R_z(2^(k+j+1) theta)`` while the AND is held open.
That seed is either the parent block (the ancilla is one of the parent's two
lines) or, at the root, an explicit ``Rz`` gate standing in for synthesis.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from . import costmodel
from .statevec import (
    MAX_QUBITS,
    BranchResult,
    BranchSet,
    Circuit,
    CircuitError,
    QuantumState,
    discard_qubits,
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

KINDS = ("in_circuit", "independent", "independent_modified")


@dataclass(frozen=True)
class TowerSpec:
    kind: str
    layers: int
    base_angle: float = 0.0
    base_exponent: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown tower kind {self.kind!r}")
        if self.layers < 1:
            raise ValueError("a tower needs at least one layer")
        if self.base_exponent < 0:
            raise ValueError("base_exponent must be non-negative")

    def level_angle(self, level: int) -> float:
        return 2 ** (self.base_exponent + level) * self.base_angle


@dataclass
class GadgetReport:
    name: str
    worst_fidelity: float
    catalyst_fidelity: float
    t_count: int
    measurement_count: int
    rotation_count: int = 0
    predicted_t_count: int | None = None
    passed: bool = False
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


# ---------------------------------------------------------------------------
# Logical AND
# ---------------------------------------------------------------------------

def _and_compute(circ: Circuit, a: int, b: int, anc: int) -> None:
    # anc starts in |0>; H then T prepares the |T> ancilla
    circ.h(anc).t(anc, tag="magic")
    circ.cx(a, anc).cx(b, anc)
    circ.fanout(anc, [a, b])
    circ.tdg(a).tdg(b).t(anc)
    circ.fanout(anc, [a, b])
    circ.h(anc).s(anc)


def _and_uncompute(circ: Circuit, a: int, b: int, anc: int) -> None:
    circ.h(anc)
    m = circ.measure(anc)
    circ.cz(a, b, condition=m)
    # return the measured ancilla to |0>
    circ.x(anc, condition=m)


def build_logical_and_compute() -> Circuit:
    """Lines ``(x, y, anc)``; ``|x>|y>|0> -> |x>|y>|x AND y>`` using one |T> state."""
    circ = Circuit(3, "logical_and_compute")
    _and_compute(circ, 0, 1, 2)
    circ.labels.update(inputs=(0, 1), ancilla=2)
    return circ


def build_logical_and_uncompute() -> Circuit:
    """Lines ``(x, y, anc)``; ``|x>|y>|x AND y> -> |x>|y>|0>`` on every branch."""
    circ = Circuit(3, "logical_and_uncompute")
    _and_uncompute(circ, 0, 1, 2)
    circ.labels.update(inputs=(0, 1), ancilla=2)
    return circ


# ---------------------------------------------------------------------------
# CT-block trees
# ---------------------------------------------------------------------------

@dataclass
class _Block:
    level: int
    children: tuple["_Block | None", "_Block | None"] = (None, None)
    lines: tuple[int, int] = (-1, -1)
    catalyst: int = -1
    ancilla: int = -1

    def walk(self):
        for child in self.children:
            if child is not None:
                yield from child.walk()
        yield self


def _chain(top: int) -> _Block:
    # blocks at levels top..0, each feeding its ancilla into the one above
    block = _Block(0)
    for level in range(1, top + 1):
        block = _Block(level, (block, None))
    return block


def _tower_tree(spec: TowerSpec) -> _Block:
    L = spec.layers
    if spec.kind == "in_circuit":
        return _chain(L - 1)
    if L == 1:
        return _Block(0)
    if spec.kind == "independent_modified":
        return _Block(L - 1, (_chain(L - 2), _chain(L - 2)))
    return _Block(L - 1, (_chain(L - 2), _Block(L - 2)))


def _allocate(block: _Block, counter: list[int], data: list[tuple[int, int]]) -> None:
    lines = []
    for child in block.children:
        if child is None:
            lines.append(counter[0])
            data.append((counter[0], block.level))
            counter[0] += 1
        else:
            _allocate(child, counter, data)
            lines.append(child.ancilla)
    block.lines = tuple(lines)
    block.catalyst, block.ancilla = counter[0], counter[0] + 1
    counter[0] += 2


def _open(circ: Circuit, block: _Block) -> None:
    for child in block.children:
        if child is not None:
            _open(circ, child)
    a, b = block.lines
    cat, anc = block.catalyst, block.ancilla
    circ.x(cat)
    circ.fanout(a, [b, cat])
    _and_compute(circ, b, cat, anc)
    circ.cx(a, anc)


def _close(circ: Circuit, block: _Block) -> None:
    a, b = block.lines
    cat, anc = block.catalyst, block.ancilla
    circ.cx(a, anc)
    _and_uncompute(circ, b, cat, anc)
    circ.cx(b, cat)
    circ.fanout(a, [b, cat])
    circ.x(cat)
    for child in reversed(block.children):
        if child is not None:
            _close(circ, child)


def tower_num_qubits(spec: TowerSpec) -> int:
    root = _tower_tree(spec)
    blocks = list(root.walk())
    free = sum(c is None for b in blocks for c in b.children)
    return 2 * len(blocks) + free


def build_tower(spec: TowerSpec, max_qubits: int = MAX_QUBITS) -> Circuit:
    """Full circuit for any tower kind.

    ``circuit.labels`` records ``data`` as ``(line, level)`` pairs, the
    ``catalysts`` likewise, the ``ancillas``, and the per-level ``yields``.
    """
    root = _tower_tree(spec)
    counter, data = [0], []
    _allocate(root, counter, data)
    n = counter[0]
    if n > max_qubits:
        raise CircuitError(f"{spec.kind} tower with {spec.layers} layers needs {n} "
                           f"qubits, above the ceiling of {max_qubits}")
    circ = Circuit(n, f"{spec.kind}_tower_L{spec.layers}")
    _open(circ, root)
    circ.rz(root.ancilla, spec.level_angle(root.level + 1), tag="seed")
    _close(circ, root)
    blocks = list(root.walk())
    yields = [0] * spec.layers
    for _, level in data:
        yields[level] += 1
    while yields and yields[-1] == 0:
        yields.pop()
    circ.labels.update(
        spec=spec,
        data=data,
        catalysts=[(b.catalyst, b.level) for b in blocks],
        ancillas=[b.ancilla for b in blocks],
        blocks=len(blocks),
        seed_level=root.level + 1,
        yields=tuple(yields),
    )
    return circ


def build_in_circuit_tower(spec: TowerSpec, max_qubits: int = MAX_QUBITS) -> Circuit:
    """``m``-layer in-circuit tower: a chain of CT blocks, one per layer, with
    the seed rotation on the innermost AND ancilla."""
    if spec.kind != "in_circuit":
        raise ValueError("build_in_circuit_tower needs kind='in_circuit'")
    return build_tower(spec, max_qubits)


def build_independent_tower(spec: TowerSpec, variant: str | None = None,
                            max_qubits: int = MAX_QUBITS) -> Circuit:
    """Independent tower; ``variant`` is ``"base"`` or ``"modified"``.

    The base three-layer tower yields 2 states at level ``k`` and 3 at
    ``k+1``.  The modified variant attaches an extra level-0 CT block to the
    last level-1 output line, giving 4 at level 0 and 2 at each level
    ``1..L-2``.
    """
    if variant is None:
        variant = "modified" if spec.kind == "independent_modified" else "base"
    kind = {"base": "independent", "modified": "independent_modified"}.get(variant)
    if kind is None:
        raise ValueError(f"unknown variant {variant!r}")
    if spec.kind == "in_circuit":
        raise ValueError("build_independent_tower needs an independent tower spec")
    return build_tower(TowerSpec(kind, spec.layers, spec.base_angle, spec.base_exponent),
                       max_qubits)


def tower_input_state(circ: Circuit, data_states: Sequence | None = None) -> QuantumState:
    """Data lines from ``data_states`` (default ``|+>``), catalysts at their
    level angle, ancillas in ``|0>``."""
    spec: TowerSpec = circ.labels["spec"]
    vectors: list = [ket0()] * circ.num_qubits
    for i, (line, _) in enumerate(circ.labels["data"]):
        vectors[line] = plus() if data_states is None else data_states[i]
    for line, level in circ.labels["catalysts"]:
        vectors[line] = rz_resource(spec.level_angle(level))
    return QuantumState.product(*vectors)


def tower_expected_state(circ: Circuit, data_states: Sequence | None = None) -> QuantumState:
    spec: TowerSpec = circ.labels["spec"]
    vectors: list = [ket0()] * circ.num_qubits
    for i, (line, level) in enumerate(circ.labels["data"]):
        psi = plus() if data_states is None else data_states[i]
        vectors[line] = rz_matrix(spec.level_angle(level)) @ psi
    for line, level in circ.labels["catalysts"]:
        vectors[line] = rz_resource(spec.level_angle(level))
    return QuantumState.product(*vectors)


def predicted_tower_t_count(spec: TowerSpec) -> int:
    """T states per run from the cost model (seed rotation excluded)."""
    if spec.kind == "in_circuit":
        return round(costmodel.in_circuit_tower_tcount(spec.layers, 0.0))
    if spec.kind == "independent_modified" or spec.layers <= 2:
        return round(costmodel.independent_tower_tcount(spec.layers, 0.0))
    # base topology has L + 1 blocks at 4 T each
    return 4 * (spec.layers + 1)


def verify_tower(spec: TowerSpec, angles: Sequence[float], rng: np.random.Generator,
                 tol: float = 1e-9) -> GadgetReport:
    """Check every branch against directly applied rotations.

    In-circuit towers get random data inputs; independent towers get ``|+>``.
    """
    worst, worst_cat = 1.0, 1.0
    circ = None
    for theta in angles:
        s = TowerSpec(spec.kind, spec.layers, theta, spec.base_exponent)
        circ = build_tower(s)
        ndata = len(circ.labels["data"])
        data = ([random_qubit(rng) for _ in range(ndata)] if s.kind == "in_circuit" else None)
        branches = run_all_branches(circ, tower_input_state(circ, data))
        expected = tower_expected_state(circ, data)
        cat_lines = [line for line, _ in circ.labels["catalysts"]]
        cat_vecs = [rz_resource(s.level_angle(level)) for _, level in circ.labels["catalysts"]]
        for br in branches:
            worst = min(worst, fidelity(br.final_state, expected))
            worst_cat = min(worst_cat, partial_overlap(br.final_state, cat_lines, cat_vecs))
        if abs(branches.total_probability - 1) > 1e-10:
            worst = 0.0
    predicted = predicted_tower_t_count(spec)
    return GadgetReport(
        name=f"{spec.kind}_tower_L{spec.layers}",
        worst_fidelity=worst,
        catalyst_fidelity=worst_cat,
        t_count=circ.t_count,
        measurement_count=circ.num_measurements,
        rotation_count=circ.count("rz"),
        predicted_t_count=predicted,
        passed=(worst > 1 - tol and worst_cat > 1 - tol and circ.t_count == predicted),
        details={"yields": list(circ.labels["yields"]), "qubits": circ.num_qubits,
                 "angles_tested": len(angles)},
    )


# ---------------------------------------------------------------------------
# Repeat-until-success teleportation
# ---------------------------------------------------------------------------

def _teleport_round() -> Circuit:
    circ = Circuit(2, "rz_teleport")
    circ.cx(0, 1)
    circ.measure(1)
    return circ


def rus_teleport_enumerate(target: QuantumState, theta: float, max_rounds: int) -> BranchSet:
    """All branches of the repeat-until-success chain for ``R_z(theta)``.

    Round ``j`` consumes ``|R_z(2^(j-1) theta)>``.  Outcome strings ending
    in ``0`` are successes; the all-ones string of length ``max_rounds`` is
    the branch still unfinished when the round budget runs out.  Final
    states are on the target qubit alone.
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be at least 1")
    if target.num_qubits != 1:
        raise CircuitError("target must be a single qubit")
    rnd = _teleport_round()
    out = BranchSet()
    bits, prob, state = "", 1.0, target
    for j in range(1, max_rounds + 1):
        resource = rz_resource(2 ** (j - 1) * theta)
        res = run_all_branches(rnd, QuantumState.product(state, resource))
        out.pruned_count += res.pruned_count
        out.pruned_probability += prob * res.pruned_probability
        cont = None
        for br in res:
            reduced = discard_qubits(br.final_state, [1])
            if br.outcome_bits == "0":
                out.branches.append(BranchResult(bits + "0", prob * br.probability, reduced))
            else:
                cont = (prob * br.probability, reduced)
        if cont is None:
            return out
        prob, state = cont
        bits += "1"
    out.branches.append(BranchResult(bits, prob, state))
    return out


def verify_rus(thetas: Sequence[float], rng: np.random.Generator, max_rounds: int = 6,
               tol: float = 1e-10) -> GadgetReport:
    worst = 1.0
    prob_err = 0.0
    for theta in thetas:
        psi = QuantumState(random_qubit(rng))
        expected = QuantumState(rz_matrix(theta) @ psi.amplitudes)
        res = rus_teleport_enumerate(psi, theta, max_rounds)
        for br in res:
            j = len(br.outcome_bits)
            if br.outcome_bits.endswith("0"):
                worst = min(worst, fidelity(br.final_state, expected))
                prob_err = max(prob_err, abs(br.probability - 2.0 ** -j))
            else:
                prob_err = max(prob_err, abs(br.probability - 2.0 ** -max_rounds))
    return GadgetReport(
        name="rus_teleport", worst_fidelity=worst, catalyst_fidelity=1.0, t_count=0,
        measurement_count=max_rounds, rotation_count=max_rounds, predicted_t_count=0,
        passed=worst > 1 - tol and prob_err < 1e-12,
        details={"max_probability_error": prob_err, "max_rounds": max_rounds},
    )


# ---------------------------------------------------------------------------
# GHZ fan-out / fan-in
# ---------------------------------------------------------------------------

def build_ghz_fanout(n: int, k: int) -> Circuit:
    """Copy an ``n``-qubit register into ``k`` copies through local GHZ states.

    Layout: data ``0..n-1``, then for each data qubit ``i`` one undistributed
    GHZ leg followed by its ``k-1`` distributed legs.
    """
    if k < 2:
        raise ValueError("fan-out needs k >= 2")
    nq = n + n * k
    if nq > MAX_QUBITS:
        raise CircuitError(f"fan-out needs {nq} qubits, above the ceiling of {MAX_QUBITS}")
    circ = Circuit(nq, f"ghz_fanout_n{n}_k{k}")
    legs = []
    for i in range(n):
        u = n + i * k
        copies = list(range(u + 1, u + k))
        legs.append((u, copies))
        circ.h(u).fanout(u, copies)
    for i, (u, copies) in enumerate(legs):
        circ.cx(i, u)
        m = circ.measure(u)
        for c in copies:
            circ.x(c, condition=m)
        circ.x(u, condition=m)
    circ.labels.update(n=n, k=k, legs=legs)
    return circ


def _copy_map(amps: np.ndarray, n: int, k: int, with_u: bool) -> np.ndarray:
    # basis |x> -> |x>(|0?>|x_i>^(k-1))_i
    per = k if with_u else k - 1
    out = np.zeros(2 ** (n + n * per), dtype=complex)
    for x in range(2**n):
        bits = [(x >> (n - 1 - i)) & 1 for i in range(n)]
        full = list(bits)
        for b in bits:
            full += ([0] if with_u else []) + [b] * (k - 1)
        out[int("".join(map(str, full)), 2)] = amps[x]
    return out


@dataclass
class FanResult:
    branches: BranchSet
    worst_fidelity: float
    verdict: bool


def ghz_fanout(x_register_state: QuantumState, k: int, tol: float = 1e-10) -> FanResult:
    n = x_register_state.num_qubits
    circ = build_ghz_fanout(n, k)
    inp = QuantumState.product(x_register_state, QuantumState.zero(n * k))
    branches = run_all_branches(circ, inp)
    expected = QuantumState(_copy_map(x_register_state.amplitudes, n, k, True))
    worst = min(fidelity(b.final_state, expected) for b in branches)
    return FanResult(branches, worst, worst > 1 - tol)


def build_ghz_fanin(n: int, k: int) -> Circuit:
    """Undo ``|x>|x>^(k-1) -> |x>|0>^(k-1)`` with X measurements and Z fix-ups.

    Layout: data ``0..n-1`` then ``k-1`` copies of each data qubit in turn.
    """
    if k < 2:
        raise ValueError("fan-in needs k >= 2")
    circ = Circuit(n + n * (k - 1), f"ghz_fanin_n{n}_k{k}")
    for i in range(n):
        copies = list(range(n + i * (k - 1), n + (i + 1) * (k - 1)))
        records = []
        for c in copies:
            m = circ.measure(c, "X")
            records.append(m)
            circ.z(c, condition=m)
            circ.h(c)
        circ.z(i, condition=tuple(records))
    circ.labels.update(n=n, k=k)
    return circ


def ghz_fanin(copied_state: QuantumState, n: int, k: int, tol: float = 1e-10) -> FanResult:
    circ = build_ghz_fanin(n, k)
    branches = run_all_branches(circ, copied_state)
    # read back the data amplitudes from the copy-consistent subspace
    tensor = copied_state.tensor()
    amps = np.zeros(2**n, dtype=complex)
    for x in range(2**n):
        idx = np.unravel_index(
            int("".join(map(str, _fanin_bits(x, n, k))), 2), tensor.shape)
        amps[x] = tensor[idx]
    expected = QuantumState.product(QuantumState(amps / np.linalg.norm(amps)),
                                    QuantumState.zero(n * (k - 1)))
    worst = min(fidelity(b.final_state, expected) for b in branches)
    return FanResult(branches, worst, worst > 1 - tol)


def _fanin_bits(x: int, n: int, k: int) -> list[int]:
    bits = [(x >> (n - 1 - i)) & 1 for i in range(n)]
    out = list(bits)
    for b in bits:
        out += [b] * (k - 1)
    return out


def copies_state(register: QuantumState, k: int) -> QuantumState:
    """``sum_x a_x |x> (x)_i |x_i>^(k-1)``, the input expected by fan-in."""
    return QuantumState(_copy_map(register.amplitudes, register.num_qubits, k, False))


# ---------------------------------------------------------------------------
# Multi-controlled Toffoli
# ---------------------------------------------------------------------------

def build_mct(l: int) -> Circuit:
    """``l``-controlled X from ``l-1`` Toffolis and ``l-1`` ancillae.

    Layout: controls ``0..l-1``, target ``l``, ancillae ``l+1..2l-1``.  The
    ancilla chain holds partial ANDs and is cleared by measurement.
    """
    if not 2 <= l <= 6:
        raise ValueError("l must be between 2 and 6")
    circ = Circuit(2 * l, f"mct_{l}")
    target = l
    anc = list(range(l + 1, 2 * l))
    pairs = [(0, 1)] + [(anc[j - 1], j + 1) for j in range(1, l - 1)]
    for (p, q), a in zip(pairs, anc):
        circ.ccx(p, q, a)
    circ.cx(anc[-1], target)
    for (p, q), a in reversed(list(zip(pairs, anc))):
        circ.h(a)
        m = circ.measure(a)
        circ.cz(p, q, condition=m)
        circ.x(a, condition=m)
    circ.labels.update(controls=list(range(l)), target=target, ancillas=anc)
    return circ


def mct_permutation(l: int) -> np.ndarray:
    """Ideal l-controlled X as an index permutation on ``l + 1`` qubits."""
    perm = np.arange(2 ** (l + 1))
    all_ones = (2**l - 1) << 1
    perm[all_ones], perm[all_ones | 1] = all_ones | 1, all_ones
    return perm


# ---------------------------------------------------------------------------
# Batch verification
# ---------------------------------------------------------------------------

def _verify_and(rng: np.random.Generator, trials: int) -> list[GadgetReport]:
    compute = build_logical_and_compute()
    uncompute = build_logical_and_uncompute()
    worst_c, worst_u = 1.0, 1.0
    inputs = [QuantumState.basis([x, y]) for x in (0, 1) for y in (0, 1)]
    inputs += [random_state(2, rng) for _ in range(trials)]
    for inp in inputs:
        a = inp.amplitudes
        ideal = np.zeros(8, dtype=complex)
        for xy in range(4):
            x, y = xy >> 1, xy & 1
            ideal[(xy << 1) | (x & y)] = a[xy]
        ideal_state = QuantumState(ideal)
        (br,) = run_all_branches(compute, QuantumState.product(inp, ket0())).branches
        worst_c = min(worst_c, fidelity(br.final_state, ideal_state))
        done = QuantumState.product(inp, ket0())
        for br in run_all_branches(uncompute, ideal_state):
            worst_u = min(worst_u, fidelity(br.final_state, done))
    return [
        GadgetReport("logical_and_compute", worst_c, 1.0, compute.t_count, 0,
                     predicted_t_count=4, passed=worst_c > 1 - 1e-10 and compute.t_count == 4),
        GadgetReport("logical_and_uncompute", worst_u, 1.0, uncompute.t_count, 1,
                     predicted_t_count=0, passed=worst_u > 1 - 1e-10 and uncompute.t_count == 0),
    ]


def _verify_fan(rng: np.random.Generator, trials: int) -> list[GadgetReport]:
    worst_out, worst_in = 1.0, 1.0
    cases = [(QuantumState.basis([b]), k) for b in (0, 1) for k in (2, 3)]
    cases += [(random_state(2, rng), 2) for _ in range(trials)]
    for reg, k in cases:
        worst_out = min(worst_out, ghz_fanout(reg, k).worst_fidelity)
        worst_in = min(worst_in, ghz_fanin(copies_state(reg, k), reg.num_qubits, k).worst_fidelity)
    return [
        GadgetReport("ghz_fanout", worst_out, 1.0, 0, 0, passed=worst_out > 1 - 1e-10),
        GadgetReport("ghz_fanin", worst_in, 1.0, 0, 0, passed=worst_in > 1 - 1e-10),
    ]


def verify_mct(l: int) -> GadgetReport:
    circ = build_mct(l)
    perm = mct_permutation(l)
    worst = 1.0
    for idx in range(2 ** (l + 1)):
        bits = [(idx >> (l - i)) & 1 for i in range(l + 1)]
        inp = QuantumState.basis(bits + [0] * (l - 1))
        out_bits = [(perm[idx] >> (l - i)) & 1 for i in range(l + 1)]
        expected = QuantumState.basis(out_bits + [0] * (l - 1))
        for br in run_all_branches(circ, inp):
            worst = min(worst, fidelity(br.final_state, expected))
    return GadgetReport(f"mct_{l}", worst, 1.0, 0, circ.num_measurements,
                        passed=worst > 1 - 1e-10 and circ.count("ccx") == l - 1,
                        details={"toffolis": circ.count("ccx"),
                                 "ancillas": len(circ.labels["ancillas"])})


def verify_all(seed: int = 0, trials: int = 20) -> list[GadgetReport]:
    """Run every gadget check; used by the ``verify`` command."""
    rng = np.random.default_rng(seed)
    angles = list(rng.uniform(0, 2 * math.pi, trials))
    reports = _verify_and(rng, trials)
    reports.append(verify_tower(TowerSpec("in_circuit", 2, base_exponent=1), angles, rng))
    reports.append(verify_tower(TowerSpec("independent", 3), angles, rng))
    reports.append(verify_tower(TowerSpec("independent_modified", 3), angles, rng))
    reports.append(verify_rus(angles, rng))
    reports += _verify_fan(rng, trials)
    reports += [verify_mct(l) for l in (2, 3, 4)]
    return reports
