"""Closed-form surface-code cost formulas.

Units: ``d`` is the code distance, a *time step* is ``d`` code cycles,
volumes are in qubit-cycles.  Each logical qubit costs ``2 d^2`` physical
qubits.  Factories are black boxes with a physical footprint and a cycle
count; production is treated as a continuous rate, so factory counts stay
fractional until they are turned into physical qubits.
"""
from __future__ import annotations

import configparser
import math
import warnings
from dataclasses import asdict, dataclass
from fractions import Fraction
from numbers import Rational

METHODS = ("synthesis", "in_circuit", "independent")


class UnreachableTargetError(ValueError):
    """No code distance can meet the requested failure budget."""


def _exact(x) -> Fraction:
    # floats are read as the decimal literal they print as, so 1e-4 is 1/10000
    if isinstance(x, Rational):
        return Fraction(x)
    return Fraction(repr(float(x)))


@dataclass(frozen=True)
class CodeParams:
    p: float
    d: int

    def __post_init__(self):
        if not 0 < self.p < 1:
            raise ValueError(f"physical error rate must lie in (0, 1), got {self.p}")
        if self.d < 3 or self.d % 2 == 0:
            raise ValueError(f"code distance must be an odd integer >= 3, got {self.d}")
        if 100 * self.p >= 1:
            warnings.warn(f"p={self.p} is at or above threshold; logical errors do not "
                          "decrease with distance", RuntimeWarning, stacklevel=3)


@dataclass(frozen=True)
class FactorySpec:
    name: str
    phys_qubits: int
    cycles: int
    output_error: float

    def __post_init__(self):
        if self.phys_qubits <= 0 or self.cycles <= 0 or self.output_error <= 0:
            raise ValueError("factory parameters must be positive")

    @property
    def volume(self) -> int:
        """Qubit-cycles spent per T state."""
        return self.phys_qubits * self.cycles


# (15-to-1)_{11,5,5}: 2070 qubits for 30 cycles.  The output error is the
# design target (< 1e-10), not a simulated value.
DEFAULT_FACTORY = FactorySpec("15-to-1_11_5_5", 2070, 30, 1e-10)


def factory_from_mapping(section) -> FactorySpec:
    return FactorySpec(
        name=str(section.get("name", DEFAULT_FACTORY.name)),
        phys_qubits=int(section.get("phys_qubits", DEFAULT_FACTORY.phys_qubits)),
        cycles=int(section.get("cycles", DEFAULT_FACTORY.cycles)),
        output_error=float(section.get("output_error", DEFAULT_FACTORY.output_error)),
    )


def load_factory(path, section: str = "factory") -> FactorySpec:
    """Read a factory from an INI-style file::

        [factory]
        name = 15-to-1_11_5_5
        phys_qubits = 2070
        cycles = 30
        output_error = 1e-10
    """
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_file(fh)
    if section not in parser:
        raise ValueError(f"no [{section}] section in {path}")
    return factory_from_mapping(parser[section])


@dataclass(frozen=True)
class CostReport:
    logical_qubits: int
    factory_phys: int
    total_phys: int
    volume: float
    t_steps: float
    tcount: float

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# Error rates and code distance
# ---------------------------------------------------------------------------

def _p_logical_exact(p, d: int) -> Fraction:
    return Fraction(1, 10) * (100 * _exact(p)) ** ((d + 1) // 2)


def logical_error_rate(params: CodeParams | float, d: int | None = None) -> float:
    """Logical error rate per logical qubit per code cycle, ``0.1 (100p)^((d+1)/2)``.

    Accepts a :class:`CodeParams` or ``(p, d)``.
    """
    if d is None:
        p, d = params.p, params.d
    else:
        p = params
    return float(_p_logical_exact(p, d))


def meets_failure_budget(n_logical, depth_cycles, p, d: int, target) -> bool:
    """``n_logical * depth_cycles * p_L(d) < target``, decided exactly."""
    return _exact(n_logical) * _exact(depth_cycles) * _p_logical_exact(p, d) < _exact(target)


def min_code_distance(n_logical, depth_cycles, p, target, d_max: int = 999) -> int:
    """Smallest odd ``d >= 3`` whose total failure probability is below ``target``."""
    if n_logical <= 0 or depth_cycles <= 0 or p <= 0 or not 0 < target < 1:
        raise ValueError("arguments must be positive with target in (0, 1)")
    if 100 * _exact(p) >= 1:
        raise UnreachableTargetError(f"p={p} is at or above threshold")
    for d in range(3, d_max + 1, 2):
        if meets_failure_budget(n_logical, depth_cycles, p, d, target):
            return d
    raise UnreachableTargetError(f"no odd d <= {d_max} meets the target {target}")


# ---------------------------------------------------------------------------
# T counts
# ---------------------------------------------------------------------------

def rt_fallback(epsilon: float) -> float:
    """Expected T count of fallback rotation synthesis at accuracy ``epsilon``."""
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon must lie in (0, 1]")
    return 1.03 * math.log2(1 / epsilon) + 5.75


def synthesis_tcount(n: int, r_t):
    return n * r_t


def in_circuit_tower_tcount(n: int, r_t):
    """Steady-state T count of an ``n``-layer in-circuit tower: seed plus 4 per layer."""
    return r_t + 4 * n


def in_circuit_depth_overhead(n: int) -> int:
    """Extra measurement depth of an ``n``-layer in-circuit tower over synthesis."""
    return 2 * n


def independent_tower_tcount(layers: int, r_t):
    """Steady-state T count per run of a modified independent tower."""
    return r_t + 4 * (2 * layers - 1)


def tower_tcount_total(layers: int, r_t, reps: int):
    """T states spent by one ``layers``-layer independent tower over ``reps`` runs.

    The first run also synthesizes every catalyst (``2L`` rotations in all).
    Works with ``Fraction`` inputs for exact arithmetic.
    """
    if layers < 1 or reps < 1:
        raise ValueError("layers and reps must be at least 1")
    blocks = 2 * layers - 1
    return 2 * layers * r_t + 4 * blocks + (reps - 1) * (r_t + 4 * blocks)


def tower_measurement_depth(layers: int, r_t):
    if layers < 1:
        raise ValueError("layers must be at least 1")
    return r_t + 2 * layers


# ---------------------------------------------------------------------------
# Logical and physical qubits
# ---------------------------------------------------------------------------

def ceil_log2(x: int) -> int:
    return (int(x) - 1).bit_length()


def poc_logical_qubits(method: str, S: int, n: int) -> int:
    """Logical qubits of the piecewise phase oracle for each rotation method."""
    if S < 1 or n < 1:
        raise ValueError("S and n must be at least 1")
    l = ceil_log2(S)
    data = 5 * (S + 1) * (2 * n + 2)
    if method == "synthesis":
        return data
    if method == "in_circuit":
        return 7 * S * (2 * n + l + 2) + 7 * (2 * n + 3)
    if method == "independent":
        return data + 4 * (6 * n + 1) * (S + 1) + 4 * 4 * S
    raise ValueError(f"unknown method {method!r}")


def factory_count(n_t, fac: FactorySpec, t_steps, d: int) -> Fraction:
    """Fractional number of factories running in parallel."""
    return _exact(n_t) * fac.cycles / (_exact(t_steps) * d)


def factory_phys_qubits(n_t, fac: FactorySpec, t_steps, d: int) -> int:
    if n_t < 0 or t_steps <= 0 or d <= 0:
        raise ValueError("n_t must be non-negative and t_steps, d positive")
    return math.ceil(factory_count(n_t, fac, t_steps, d) * fac.phys_qubits)


def data_phys_qubits(n_logical: int, d: int) -> int:
    return n_logical * 2 * d * d


def total_phys_qubits(n_t, fac: FactorySpec, t_steps, d: int, n_logical: int) -> int:
    return factory_phys_qubits(n_t, fac, t_steps, d) + data_phys_qubits(n_logical, d)


def spacetime_volume(n_t, fac: FactorySpec, t_steps, d: int, n_logical: int):
    """Qubit-cycles: factory volume per T state times ``n_t`` plus data volume."""
    return n_t * fac.volume + 2 * n_logical * t_steps * d**3


def cost_report(n_t, fac: FactorySpec, t_steps, d: int, n_logical: int) -> CostReport:
    factory = factory_phys_qubits(n_t, fac, t_steps, d)
    return CostReport(
        logical_qubits=n_logical,
        factory_phys=factory,
        total_phys=factory + data_phys_qubits(n_logical, d),
        volume=spacetime_volume(n_t, fac, t_steps, d, n_logical),
        t_steps=t_steps,
        tcount=n_t,
    )
