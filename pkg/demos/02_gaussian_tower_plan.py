"""
Planning towers for a repeated state-preparation circuit
========================================================

Sixty copies of a small Ry/CNOT circuit share 35 distinct angles.  Each angle
is needed sixty times per repetition, and RUS failures ask for doubled
angles, so the demand halves at every level.
"""
from catalyst_towers import costmodel, planner

n, angles, reps = 60, 35, 200
r_t = costmodel.rt_fallback(2e-6)
print("demand per level:", planner.demand(n))
print(f"fallback synthesis costs {r_t:.4f} T per rotation")

# %%
# The control scheme keeps excess states low by mixing tower heights.
# The excess scheme runs a single tall tower over and over.
for scheme in planner.SCHEMES:
    plan = planner.plan_towers(n, scheme)
    t = planner.expected_tcount_per_repetition(plan, r_t, reps, angles)
    print(f"{scheme:8s} towers={plan.towers} excess={plan.excess} T/rep={t}")
print("synthesis T/rep =", planner.synthesis_tcount_per_repetition(n, angles, r_t))

# %%
# Tower start-up (synthesizing every catalyst once) is spread over the
# repetitions, so the per-repetition cost falls towards the steady state.
plan = planner.plan_towers(n, "control")
for r in (1, 10, 100, 1000):
    print(r, round(planner.tcount_per_repetition(plan, r_t, r, angles), 1))
