"""
Checking the gadgets by exact simulation
========================================

Every gadget is built as a small circuit and simulated on a dense
statevector, following *every* measurement branch instead of sampling one.
"""
import numpy as np

from catalyst_towers import gadgets
from catalyst_towers.statevec import fidelity, partial_overlap, plus, run_all_branches

# %%
# A two-layer in-circuit tower acts on seven lines: three data qubits, two
# catalysts and two AND ancillas.  With the seed angle set to zero the whole
# circuit should be the identity, whatever happens at the two measurements.
spec = gadgets.TowerSpec("in_circuit", layers=2, base_angle=0.0)
circ = gadgets.build_in_circuit_tower(spec)
print(circ.num_qubits, "lines,", circ.t_count, "T gates,", circ.num_measurements, "measurements")

rng = np.random.default_rng(1)
inp = gadgets.tower_input_state(circ, [gadgets.random_qubit(rng) for _ in range(3)])
for branch in run_all_branches(circ, inp):
    print(branch.outcome_bits, round(branch.probability, 3), round(fidelity(branch.final_state, inp), 12))

# %%
# The modified independent tower with three layers fills 16 lines, the most
# the simulator accepts.  Its outputs are four copies of the level-0 resource
# state and two of level 1.
circ = gadgets.build_independent_tower(gadgets.TowerSpec("independent", 3, 0.0), "modified")
print(circ.labels["yields"])
branch = run_all_branches(circ, gadgets.tower_input_state(circ))[0]
print([round(partial_overlap(branch.final_state, [q], [plus()]), 12)
       for q, _ in circ.labels["data"]])

# %%
# The batch runner checks everything at once and reports worst-case
# fidelities.
for report in gadgets.verify_all(seed=0, trials=5):
    print(f"{report.name:32s} {report.worst_fidelity:.12f} passed={report.passed}")
