# %% [markdown]
# # How fast does the chain beat the classical limit?
#
# `t_q` is the first time the average fidelity exceeds 2/3 (plus a small
# margin).  Here we follow it as the interaction range `z` grows, for the
# short-range case `alpha = 2.3` at `lambda = 0.5`, `g = 0.7`, `N = 25`.

# %%
from xyqst import ModelParams, fidelity_trace
from xyqst.metrics import MetricsConfig, tq_over_z, tq_saturation_in_z

base = ModelParams(25, 1, falloff=2.3, anisotropy=0.5, field=0.7)
config = MetricsConfig(t_max=2000)
records = tq_over_z(base, config)
for r in records:
    bar = "#" * int(min(r.t_q, 120) / 2)
    print(f"z = {r.coordination:2d}  t_q = {r.t_q:8.2f}  {bar}")

# %% [markdown]
# A handful of ranges only graze 2/3 early on and cross much later.  The
# tail of the family settles down; the `z = N - 1` value is the saturated one.

# %%
sat = tq_saturation_in_z(base, config, records=records)
print(f"t_q(z=1) = {records[0].t_q:.2f}, t_q(z=2) = {records[1].t_q:.2f}, t_q(sat) = {sat.t_q_sat:.2f}, "
      f"saturated tail: {sat.saturated}")

# %% [markdown]
# At a weak field the nearest-neighbour chain is painfully slow, while the
# all-to-all chain with slowly decaying couplings gets there in tens of units.

# %%
from xyqst.metrics import find_tq

slow = find_tq(ModelParams(25, 1, 0.0, 0.5, 0.2), MetricsConfig(t_max=3e5))
fast = find_tq(ModelParams(25, 24, 0.5, 0.5, 0.2), MetricsConfig(t_max=500))
print(f"g = 0.2: t_q(z=1) = {slow:.1f}   t_q(z=24, alpha=0.5) = {fast:.2f}")

# %% [markdown]
# The fidelity itself, sampled around the nearest-neighbour crossing:

# %%
trace = fidelity_trace(base, t_max=40, dt=1.0)
for t, f in zip(trace.times[25:36], trace.f[25:36]):
    print(f"t = {t:4.0f}  f = {f:.4f}{'  > 2/3' if f > 2 / 3 else ''}")
