"""
How deep do many RUS rotations go?
==================================

Five rotations run side by side in each of seven layers, in sixty circuit
copies.  The algorithm waits for the slowest copy.
"""
from catalyst_towers import rusdepth

exact = rusdepth.exact_expected_max(5, 7, 60)
mc = rusdepth.mc_expected_max(5, 7, 60, samples=10000, seed=1)
print(f"exact {exact:.4f}, Monte Carlo {mc.estimate:.3f} +/- {mc.stderr:.3f}")
print(mc.to_json(exact))

# %%
# Waiting for more copies pushes the expected maximum up only slowly,
# roughly logarithmically in the number of copies.
for copies in (1, 10, 60, 600):
    print(copies, round(rusdepth.exact_expected_max(5, 7, copies), 3))
