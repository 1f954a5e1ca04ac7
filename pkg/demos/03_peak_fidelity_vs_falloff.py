# %% [markdown]
# # The first fidelity peak and the fall-off exponent
#
# `f*` is the first local maximum of the fidelity after it crosses 2/3.  With
# all-to-all couplings (`z = N - 1`) the peak depends non-monotonically on
# `alpha`: it is highest for intermediate decay and settles to a lower value
# once the couplings are effectively nearest-neighbour.

# %%
import numpy as np

from xyqst import ModelParams
from xyqst.metrics import MetricsConfig, delta_fstar, evaluate

for alpha in (10.0, 2.7):
    rec = evaluate(ModelParams(25, 24, alpha, 1.0, 1.7))
    print(f"N = 25, alpha = {alpha:4.1f}: f* = {rec.f_star:.4f} at t* = {rec.t_star:.2f}")

# %% [markdown]
# The gain over the short-range plateau is `Delta = f*_max - f*_sat`.

# %%
for lam in (0.0, 1.0, 1.3):
    d = delta_fstar(ModelParams(20, 19, 1.0, lam, 1.7), MetricsConfig(t_max=400))
    print(f"lambda = {lam:3.1f}: f*_max = {d.f_star_max:.4f} at alpha = {d.alpha_at_max:.2f}, "
          f"f*_sat = {d.f_star_sat:.4f}, Delta = {d.delta:.4f}")

# %% [markdown]
# A coarse look at the `lambda = 1` curve:

# %%
d = delta_fstar(ModelParams(20, 19, 1.0, 1.0, 1.7), MetricsConfig(t_max=400))
for rec in d.records[::5]:
    print(f"alpha = {rec.falloff:5.2f}  f* = {rec.f_star:.4f}  " + "#" * int(200 * (rec.f_star - 0.6)))
