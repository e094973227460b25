"""Dense statevector simulation with mid-circuit measurement.

Conventions used throughout the package:

* Qubit 0 is the most significant bit of the amplitude index (big-endian),
  so ``CNOT(0, 1)`` maps index ``0b10`` to ``0b11``.
* ``Rz(theta) = diag(exp(-i theta/2), exp(+i theta/2))`` and
  ``|T> = T|+> = (|0> + exp(i pi/4)|1>)/sqrt(2)``.

Measurements are handled by exhaustive branch enumeration: every outcome
sequence with non-negligible Born probability is followed to the end of the
circuit and reported with its probability and renormalized final state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

MAX_QUBITS = 16
NORM_TOL = 1e-10
PRUNE_THRESHOLD = 1e-14
DEFAULT_BRANCH_CAP = 2**16


class CircuitError(ValueError):
    """Malformed circuit, bad qubit index or incompatible state."""


class BranchLimitError(RuntimeError):
    """Raised when branch enumeration would exceed the configured cap."""


# ---------------------------------------------------------------------------
# Gate matrices
# ---------------------------------------------------------------------------

_SQ2 = 1 / math.sqrt(2)

_FIXED = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.diag([1, -1]).astype(complex),
    "h": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "s": np.diag([1, 1j]),
    "sdg": np.diag([1, -1j]),
    "t": np.diag([1, np.exp(1j * np.pi / 4)]),
    "tdg": np.diag([1, np.exp(-1j * np.pi / 4)]),
    "cx": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
    "cz": np.diag([1, 1, 1, -1]).astype(complex),
    "ccz": np.diag([1, 1, 1, 1, 1, 1, 1, -1]).astype(complex),
}
_ccx = np.eye(8, dtype=complex)
_ccx[6:, 6:] = _FIXED["x"]
_FIXED["ccx"] = _ccx

_ARITY = {"x": 1, "y": 1, "z": 1, "h": 1, "s": 1, "sdg": 1, "t": 1, "tdg": 1,
          "rz": 1, "cx": 2, "cz": 2, "ccz": 3, "ccx": 3}
_INVERSE_NAME = {"s": "sdg", "sdg": "s", "t": "tdg", "tdg": "t"}


def rz_matrix(angle: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * angle), np.exp(0.5j * angle)])


@dataclass(frozen=True)
class Gate:
    """A unitary circuit operation, optionally classically controlled.

    ``condition`` lists measurement-record indices; the gate fires when the
    parity of those outcomes is 1.  ``name == "fanout"`` is a multi-target
    CNOT with ``qubits = (control, *targets)``.
    """

    name: str
    qubits: tuple[int, ...]
    angle: float | None = None
    condition: tuple[int, ...] | None = None
    tag: str | None = None

    def matrix(self) -> np.ndarray:
        if self.name == "rz":
            return rz_matrix(self.angle)
        if self.name == "fanout":
            raise CircuitError("fanout has no fixed-size matrix")
        return _FIXED[self.name]

    def inverse(self) -> "Gate":
        if self.name == "rz":
            return Gate("rz", self.qubits, -self.angle, self.condition, self.tag)
        return Gate(_INVERSE_NAME.get(self.name, self.name), self.qubits,
                    None, self.condition, self.tag)


@dataclass(frozen=True)
class Measure:
    qubit: int
    basis: str = "Z"


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------

class QuantumState:
    """Normalized amplitude vector over ``num_qubits`` qubits (read-only)."""

    __slots__ = ("num_qubits", "amplitudes")

    def __init__(self, amplitudes, num_qubits: int | None = None, *, check: bool = True):
        amps = np.array(amplitudes, dtype=complex).reshape(-1)
        n = int(round(math.log2(amps.size))) if amps.size else 0
        if num_qubits is None:
            num_qubits = n
        if num_qubits < 1 or amps.size != 2**num_qubits:
            raise CircuitError(f"amplitude vector of length {amps.size} "
                               f"does not describe {num_qubits} qubits")
        if check:
            norm = np.linalg.norm(amps)
            if abs(norm - 1) > NORM_TOL:
                raise CircuitError(f"state is not normalized (norm={norm!r})")
        amps.setflags(write=False)
        self.num_qubits = num_qubits
        self.amplitudes = amps

    @classmethod
    def zero(cls, num_qubits: int) -> "QuantumState":
        amps = np.zeros(2**num_qubits, dtype=complex)
        amps[0] = 1
        return cls(amps, num_qubits)

    @classmethod
    def basis(cls, bits: Sequence[int] | str) -> "QuantumState":
        bits = [int(b) for b in bits]
        amps = np.zeros(2 ** len(bits), dtype=complex)
        amps[int("".join(map(str, bits)), 2)] = 1
        return cls(amps, len(bits))

    @classmethod
    def product(cls, *factors) -> "QuantumState":
        """Tensor product of single- or multi-qubit vectors/states, qubit 0 first."""
        amps = np.ones(1, dtype=complex)
        for f in factors:
            vec = f.amplitudes if isinstance(f, QuantumState) else np.asarray(f, dtype=complex)
            amps = np.kron(amps, vec)
        return cls(amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.num_qubits)

    def __repr__(self) -> str:
        return f"QuantumState(num_qubits={self.num_qubits})"


def ket0() -> np.ndarray:
    return np.array([1, 0], dtype=complex)


def ket1() -> np.ndarray:
    return np.array([0, 1], dtype=complex)


def plus() -> np.ndarray:
    return np.array([_SQ2, _SQ2], dtype=complex)


def t_state() -> np.ndarray:
    return _FIXED["t"] @ plus()


def rz_resource(angle: float) -> np.ndarray:
    """``|R_z(angle)> = Rz(angle)|+>``."""
    return rz_matrix(angle) @ plus()


def random_qubit(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return v / np.linalg.norm(v)


def random_state(num_qubits: int, rng: np.random.Generator) -> QuantumState:
    v = rng.normal(size=2**num_qubits) + 1j * rng.normal(size=2**num_qubits)
    return QuantumState(v / np.linalg.norm(v), num_qubits)


# ---------------------------------------------------------------------------
# Circuits
# ---------------------------------------------------------------------------

class Circuit:
    """Ordered list of gates and measurements on ``num_qubits`` lines.

    Gate methods return ``self`` for chaining; :meth:`measure` returns the
    index of the new measurement record, to be used in ``condition=``.
    """

    def __init__(self, num_qubits: int, name: str = ""):
        if num_qubits < 1:
            raise CircuitError("circuit needs at least one qubit")
        self.num_qubits = num_qubits
        self.name = name
        self.ops: list[Gate | Measure] = []
        self.num_measurements = 0
        self.labels: dict[str, object] = {}

    def _check_qubits(self, qubits: Iterable[int]) -> tuple[int, ...]:
        qubits = tuple(int(q) for q in qubits)
        for q in qubits:
            if not 0 <= q < self.num_qubits:
                raise CircuitError(f"qubit {q} out of range for {self.num_qubits} qubits")
        if len(set(qubits)) != len(qubits):
            raise CircuitError(f"repeated qubit in {qubits}")
        return qubits

    def append(self, op: Gate | Measure) -> "Circuit":
        if isinstance(op, Measure):
            self._check_qubits([op.qubit])
            if op.basis not in ("Z", "X"):
                raise CircuitError(f"unknown measurement basis {op.basis!r}")
            self.ops.append(op)
            self.num_measurements += 1
            return self
        qubits = self._check_qubits(op.qubits)
        if op.name == "fanout":
            if len(qubits) < 2:
                raise CircuitError("fanout needs a control and at least one target")
        elif op.name not in _ARITY:
            raise CircuitError(f"unknown gate {op.name!r}")
        elif _ARITY[op.name] != len(qubits):
            raise CircuitError(f"{op.name} acts on {_ARITY[op.name]} qubits, got {qubits}")
        if op.name == "rz" and op.angle is None:
            raise CircuitError("rz needs an angle")
        if op.condition is not None:
            cond = tuple(int(c) for c in op.condition)
            if not cond or any(not 0 <= c < self.num_measurements for c in cond):
                raise CircuitError(f"condition {cond} references a later or missing record")
            op = Gate(op.name, qubits, op.angle, cond, op.tag)
        self.ops.append(op)
        return self

    def _gate(self, name, qubits, angle=None, condition=None, tag=None) -> "Circuit":
        if condition is not None and isinstance(condition, int):
            condition = (condition,)
        return self.append(Gate(name, tuple(qubits), angle,
                                None if condition is None else tuple(condition), tag))

    def x(self, q, condition=None):
        return self._gate("x", [q], condition=condition)

    def y(self, q, condition=None):
        return self._gate("y", [q], condition=condition)

    def z(self, q, condition=None):
        return self._gate("z", [q], condition=condition)

    def h(self, q, condition=None):
        return self._gate("h", [q], condition=condition)

    def s(self, q, condition=None):
        return self._gate("s", [q], condition=condition)

    def sdg(self, q, condition=None):
        return self._gate("sdg", [q], condition=condition)

    def t(self, q, condition=None, tag=None):
        return self._gate("t", [q], condition=condition, tag=tag)

    def tdg(self, q, condition=None):
        return self._gate("tdg", [q], condition=condition)

    def rz(self, q, angle: float, condition=None, tag=None):
        return self._gate("rz", [q], float(angle), condition, tag)

    def cx(self, control, target, condition=None):
        return self._gate("cx", [control, target], condition=condition)

    def cz(self, a, b, condition=None):
        return self._gate("cz", [a, b], condition=condition)

    def ccz(self, a, b, c, condition=None):
        return self._gate("ccz", [a, b, c], condition=condition)

    def ccx(self, c0, c1, target, condition=None):
        return self._gate("ccx", [c0, c1, target], condition=condition)

    def fanout(self, control, targets, condition=None):
        return self._gate("fanout", [control, *targets], condition=condition)

    def measure(self, q: int, basis: str = "Z") -> int:
        self.append(Measure(int(q), basis))
        return self.num_measurements - 1

    def count(self, *names: str) -> int:
        return sum(1 for op in self.ops if isinstance(op, Gate) and op.name in names)

    @property
    def t_count(self) -> int:
        """Number of T and T-dagger gates (magic-state preparations included)."""
        return self.count("t", "tdg")

    def __len__(self) -> int:
        return len(self.ops)

    def __iter__(self) -> Iterator[Gate | Measure]:
        return iter(self.ops)

    def __repr__(self) -> str:
        return f"Circuit({self.num_qubits}, ops={len(self.ops)}, name={self.name!r})"


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------

def _apply_matrix(psi: np.ndarray, u: np.ndarray, qubits: tuple[int, ...]) -> np.ndarray:
    k = len(qubits)
    u = u.reshape((2,) * (2 * k))
    out = np.tensordot(u, psi, axes=(list(range(k, 2 * k)), list(qubits)))
    return np.moveaxis(out, list(range(k)), list(qubits))


def _apply_op(psi: np.ndarray, op: Gate) -> np.ndarray:
    if op.name == "fanout":
        control, *targets = op.qubits
        for t in targets:
            psi = _apply_matrix(psi, _FIXED["cx"], (control, t))
        return psi
    return _apply_matrix(psi, op.matrix(), op.qubits)


def apply_gate(state: QuantumState, op: Gate) -> QuantumState:
    """Apply one unconditional unitary operation to ``state``."""
    if not isinstance(op, Gate):
        raise CircuitError("apply_gate only accepts unitary gates")
    if op.condition is not None:
        raise CircuitError("classically controlled gates need run_all_branches")
    if abs(state.norm() - 1) > NORM_TOL:
        raise CircuitError("input state is not normalized")
    # validates indices and arity
    Circuit(state.num_qubits).append(op)
    psi = _apply_op(state.tensor(), op)
    return QuantumState(psi.reshape(-1), state.num_qubits)


@dataclass(frozen=True)
class BranchResult:
    outcome_bits: str
    probability: float
    final_state: QuantumState


@dataclass
class BranchSet:
    """All measurement branches of one run, in lexicographic outcome order."""

    branches: list[BranchResult] = field(default_factory=list)
    pruned_count: int = 0
    pruned_probability: float = 0.0

    def __iter__(self) -> Iterator[BranchResult]:
        return iter(self.branches)

    def __len__(self) -> int:
        return len(self.branches)

    def __getitem__(self, i) -> BranchResult:
        return self.branches[i]

    @property
    def total_probability(self) -> float:
        return float(sum(b.probability for b in self.branches))


def _project(psi: np.ndarray, qubit: int, outcome: int) -> np.ndarray:
    out = psi.copy()
    index = [slice(None)] * psi.ndim
    index[qubit] = 1 - outcome
    out[tuple(index)] = 0
    return out


def run_all_branches(
    circuit: Circuit,
    state: QuantumState | None = None,
    *,
    max_branches: int = DEFAULT_BRANCH_CAP,
    prune: float = PRUNE_THRESHOLD,
) -> BranchSet:
    """Enumerate every measurement-outcome branch of ``circuit``.

    Branches whose cumulative probability drops below ``prune`` are dropped
    and counted in the returned ``pruned_count`` / ``pruned_probability``.
    Raises :class:`BranchLimitError` rather than truncating when more than
    ``max_branches`` live branches would be needed.
    """
    if state is None:
        state = QuantumState.zero(circuit.num_qubits)
    if state.num_qubits != circuit.num_qubits:
        raise CircuitError(f"state has {state.num_qubits} qubits, "
                           f"circuit has {circuit.num_qubits}")
    h = _FIXED["h"]
    live = [("", 1.0, state.tensor().copy())]
    pruned_count = 0
    pruned_prob = 0.0
    for op in circuit.ops:
        if isinstance(op, Measure):
            nxt = []
            for bits, prob, psi in live:
                if op.basis == "X":
                    psi = _apply_matrix(psi, h, (op.qubit,))
                for m in (0, 1):
                    proj = _project(psi, op.qubit, m)
                    pm = float(np.vdot(proj, proj).real)
                    if prob * pm < prune:
                        pruned_count += 1
                        pruned_prob += prob * pm
                        continue
                    proj /= math.sqrt(pm)
                    if op.basis == "X":
                        proj = _apply_matrix(proj, h, (op.qubit,))
                    nxt.append((bits + str(m), prob * pm, proj))
            if len(nxt) > max_branches:
                raise BranchLimitError(f"{len(nxt)} branches exceed cap {max_branches}")
            live = nxt
            continue
        nxt = []
        for bits, prob, psi in live:
            if op.condition is not None:
                parity = sum(int(bits[c]) for c in op.condition) % 2
                if not parity:
                    nxt.append((bits, prob, psi))
                    continue
            nxt.append((bits, prob, _apply_op(psi, op)))
        live = nxt
    branches = [BranchResult(bits, prob, QuantumState(psi.reshape(-1), circuit.num_qubits))
                for bits, prob, psi in sorted(live, key=lambda b: b[0])]
    return BranchSet(branches, pruned_count, pruned_prob)


def simulate(circuit: Circuit, state: QuantumState | None = None) -> QuantumState:
    """Run a measurement-free circuit and return the final state."""
    if circuit.num_measurements:
        raise CircuitError("circuit has measurements; use run_all_branches")
    (branch,) = run_all_branches(circuit, state).branches
    return branch.final_state


def fidelity(a: QuantumState, b: QuantumState) -> float:
    """``|<a|b>|``; insensitive to global phase."""
    if a.num_qubits != b.num_qubits:
        raise CircuitError(f"dimension mismatch: {a.num_qubits} vs {b.num_qubits} qubits")
    return float(min(1.0, abs(np.vdot(a.amplitudes, b.amplitudes))))


def partial_overlap(state: QuantumState, qubits: Sequence[int], vectors: Sequence) -> float:
    """Fidelity of the reduced state on ``qubits`` with a product of pure vectors.

    Returns ``sqrt(<v|rho|v>)`` so that it agrees with :func:`fidelity` when
    the subsystem is pure.
    """
    psi = state.tensor()
    order = np.argsort(qubits)[::-1]
    # contract highest axes first so lower axis numbers stay valid
    for i in order:
        psi = np.tensordot(psi, np.conj(np.asarray(vectors[i], dtype=complex)),
                           axes=([qubits[i]], [0]))
    return float(min(1.0, math.sqrt(max(0.0, np.vdot(psi, psi).real))))


def discard_qubits(state: QuantumState, qubits: Sequence[int], tol: float = 1e-9) -> QuantumState:
    """Drop qubits that sit in a computational basis state.

    Raises :class:`CircuitError` if any dropped qubit is entangled or not in
    a basis state.
    """
    psi = state.tensor()
    keep = [q for q in range(state.num_qubits) if q not in set(qubits)]
    if not keep:
        raise CircuitError("cannot discard every qubit")
    moved = np.moveaxis(psi, list(qubits), list(range(len(qubits))))
    flat = moved.reshape(2 ** len(qubits), -1)
    weights = np.einsum("ij,ij->i", flat.conj(), flat).real
    idx = int(np.argmax(weights))
    if weights[idx] < 1 - tol:
        raise CircuitError(f"qubits {tuple(qubits)} are not in a basis state")
    rest = flat[idx]
    return QuantumState(rest / np.linalg.norm(rest), len(keep))
