"""Independent-tower plans covering the RUS demand of N identical rotations.

Teleporting ``R_z(theta)`` by repeat-until-success needs, on average, ``N``
copies of ``|R_z(theta)>``, ``ceil(N/2)`` of ``|R_z(2 theta)>`` and so on up
to a single copy at level ``ceil(log2 N)``.  A modified ``L``-layer tower
yields 4 states at level 0 and 2 at each level ``1..L-2``; a one-layer
tower is a single CT block yielding 2 at level 0.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .costmodel import ceil_log2, tower_tcount_total

SCHEMES = ("control", "excess")


def tower_yield(layers: int) -> tuple[int, ...]:
    if layers < 1:
        raise ValueError("layers must be at least 1")
    if layers == 1:
        return (2,)
    return (4,) + (2,) * (layers - 2)


def demand(n: int) -> tuple[int, ...]:
    """Required resource states per level for ``n`` RUS rotations."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return tuple(-(-n // 2**i) for i in range(ceil_log2(n) + 1))


@dataclass
class TowerPlan:
    towers: dict[int, int]
    demand: tuple[int, ...]
    scheme: str
    multiplex: int = 1
    yields: tuple[int, ...] = field(init=False)
    excess: int = field(init=False)

    def __post_init__(self):
        self.towers = {L: c for L, c in sorted(self.towers.items()) if c}
        self.yields = plan_yields(self.towers, len(self.demand))
        padded = self.demand + (0,) * (len(self.yields) - len(self.demand))
        self.excess = sum(y - d for y, d in zip(self.yields, padded))

    @property
    def num_towers(self) -> int:
        return sum(self.towers.values())

    def physical_towers(self) -> dict[int, int]:
        """Towers that must exist at once when each runs ``multiplex`` times."""
        return {L: -(-c // self.multiplex) for L, c in self.towers.items()}

    def covers(self) -> bool:
        return all(y >= d for y, d in zip(self.yields, self.demand))

    def to_dict(self, r_t: float | None = None, reps: int | None = None,
                angles: int | None = None) -> dict:
        out = {
            "scheme": self.scheme,
            "towers": {str(L): c for L, c in self.towers.items()},
            "multiplex": self.multiplex,
            "demand": list(self.demand),
            "yields": list(self.yields),
            "excess": self.excess,
        }
        if r_t is not None and reps is not None and angles is not None:
            out["tcount_per_repetition"] = expected_tcount_per_repetition(self, r_t, reps, angles)
        return out

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(**kwargs))


def plan_yields(towers: dict[int, int], min_levels: int = 0) -> tuple[int, ...]:
    top = max([min_levels] + [len(tower_yield(L)) for L in towers])
    out = [0] * top
    for L, count in towers.items():
        for level, y in enumerate(tower_yield(L)):
            out[level] += count * y
    return tuple(out)


def _smallest_tower_reaching(level: int, remaining: int) -> int:
    if level > 0:
        return level + 2
    # level 0 only: one 2-layer tower (4 states) beats two 1-layer towers
    return 1 if remaining <= 2 else 2


def plan_towers(n: int, scheme: str = "control") -> TowerPlan:
    """Cover ``demand(n)`` with towers.

    ``control`` works down from the highest uncovered level, each time adding
    the smallest tower that reaches it.  ``excess`` runs ``ceil(n/4)`` copies
    of the single tower of height ``ceil(log2 n) + 2`` through one physical
    tower.
    """
    need = demand(n)
    if scheme == "excess":
        L = ceil_log2(n) + 2
        count = -(-n // 4)
        return TowerPlan({L: count}, need, "excess", multiplex=count)
    if scheme != "control":
        raise ValueError(f"unknown scheme {scheme!r}")
    remaining = list(need)
    towers: dict[int, int] = {}
    while any(r > 0 for r in remaining):
        level = max(i for i, r in enumerate(remaining) if r > 0)
        L = _smallest_tower_reaching(level, remaining[level])
        towers[L] = towers.get(L, 0) + 1
        for i, y in enumerate(tower_yield(L)):
            if i < len(remaining):
                remaining[i] -= y
    return TowerPlan(towers, need, "control")


def tcount_per_repetition(plan: TowerPlan, r_t, reps: int, angles: int = 1):
    """Unrounded amortized T count per repetition."""
    if reps < 1:
        raise ValueError("reps must be at least 1")
    per_angle = sum(c * tower_tcount_total(L, r_t, reps) for L, c in plan.towers.items())
    return angles * per_angle / reps


def expected_tcount_per_repetition(plan: TowerPlan, r_t, reps: int, angles: int = 1) -> int:
    """Each tower pays its catalyst start-up once, spread over ``reps`` runs."""
    return round(tcount_per_repetition(plan, r_t, reps, angles))


def synthesis_tcount_per_repetition(n: int, angles: int, r_t) -> int:
    return round(n * angles * r_t)


def rus_buffer_qubits(rotations: int, success: float = 0.5) -> int:
    """Logical qubits holding resource states while RUS teleportation runs."""
    return math.ceil(rotations / success)


def tower_logical_footprint(plan: TowerPlan, angles: int, context: str = "gaussian",
                            n: int | None = None, buffer: int = 0) -> int:
    """Logical qubits of the towers (routing included) plus ``buffer``.

    ``gaussian`` charges ``4(6L - 2)`` per physical tower of height ``L``;
    ``poc`` charges ``4(6n + 1)`` per tower for an ``n``-qubit register.
    """
    physical = plan.physical_towers()
    if context == "gaussian":
        per_angle = sum(c * 4 * (6 * L - 2) for L, c in physical.items())
    elif context == "poc":
        if n is None:
            raise ValueError("poc context needs the register size n")
        per_angle = sum(physical.values()) * 4 * (6 * n + 1)
    else:
        raise ValueError(f"unknown context {context!r}")
    return angles * per_angle + buffer
