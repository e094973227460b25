"""
Costs against code distance
===========================

The phase-oracle scenario compares synthesis, in-circuit towers and
independent towers across odd code distances.
"""
from catalyst_towers import scenarios

cfg = scenarios.scenario_defaults("poc")
for name, m in cfg.methods.items():
    print(f"{name:12s} N_T={m.n_t:6d} logical={m.n_logical:6d} depth={m.depth}")

# %%
# Physical qubits per method.  Small distances favour the towers; factories
# shrink as d grows while data patches grow as d^2.
rows = scenarios.sweep(cfg, 3, 25)
for d in range(3, 26, 2):
    line = {r.method: r.total_phys for r in rows if r.d == d}
    best = min(line, key=line.get)
    print(d, line, "->", best)

# %%
# Crossovers: the first distance where the first method stops being cheaper.
print(scenarios.crossover(cfg, "independent", "synthesis", "volume"))
gauss = scenarios.scenario_defaults("gaussian")
print(scenarios.crossover(gauss, "excess", "synthesis", "phys"))

# %%
# The same rows as CSV, ready for any plotting tool.
print(scenarios.rows_to_csv(scenarios.sweep(gauss, 3, 7)))
