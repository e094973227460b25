"""Resource estimates for continuous rotations on surface codes, plus exact
simulation of the catalyst gadgets behind them."""
from . import costmodel, gadgets, planner, rusdepth, scenarios, statevec
from .costmodel import CodeParams, CostReport, FactorySpec, DEFAULT_FACTORY
from .gadgets import GadgetReport, TowerSpec
from .planner import TowerPlan, demand, plan_towers
from .scenarios import ScenarioConfig, SweepRow, crossover, sweep
from .statevec import BranchResult, Circuit, QuantumState, fidelity, run_all_branches

__version__ = "0.1.0"
