# %% [markdown]
# # Closed-form bounds
#
# The bounds module evaluates constants and tail probabilities for the
# scaling factors of a random matrix whose entries lie in a known envelope.

# %%
import numpy as np

from scalex import (
    EnsembleBounds,
    Marginals,
    lemma1_bounds,
    lemma2_tail,
    lemma3_bound,
    rho_profile,
    sinkhorn_knopp,
    theorem2_report,
)

# %% [markdown]
# ## Factor ratios are boxed in by the entry range
# For entries in [a, b], every x_i / r_bar_i and y_j / c_bar_j lies in
# [sqrt(a)/b, sqrt(b)/a].

# %%
rng = np.random.default_rng(1)
A = rng.uniform(1.5, 2.5, (30, 40))
m = Marginals(np.ones(30), np.full(40, 30 / 40))
lo, hi = lemma1_bounds(EnsembleBounds.constant(30, 40, 1.5, 2.5))
sol = sinkhorn_knopp(A, m)
ratios = np.concatenate([sol.x / m.r_bar, sol.y / m.c_bar])
print(f"interval [{lo:.4f}, {hi:.4f}], observed [{ratios.min():.4f}, {ratios.max():.4f}]")

# %% [markdown]
# ## Shape quantities of the marginals
# rho1 measures spread (l2 over l1), rho2 the smallest target, rho3 the
# largest.

# %%
print(rho_profile(Marginals(np.ones(100), np.ones(100)), 100, 100))
print(rho_profile(Marginals(np.array([3.0, 3.0]), np.array([2.0, 2.0, 2.0])), 2, 3))

# %% [markdown]
# ## Concentration of the factors
# A negative probability floor is reported as is: the bound is vacuous there.

# %%
env = EnsembleBounds.constant(100, 100, 1.0, 2.0)
ds = Marginals(np.ones(100), np.ones(100))
for delta in (0.1, 0.5, 1.0):
    print(theorem2_report(env, ds, 100, 100, delta).to_json())

# %% [markdown]
# ## Row-sum tails and approximate scalings

# %%
for eps in (0.1, 0.3, 0.5):
    print(f"eps={eps}: tail bound {lemma2_tail(env, ds, eps, 'row', 0):.3e}")
print("stability bound:", lemma3_bound(0.1, 1, 1, 4, 4, 1, 4, 1, 1, 1))
