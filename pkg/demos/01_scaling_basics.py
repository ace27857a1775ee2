# %% [markdown]
# # Scaling a positive matrix
#
# Find positive vectors x, y so that diag(x) A diag(y) has prescribed row and
# column sums. The factors are only defined up to (alpha x, y / alpha); the
# solver returns the representative with equal l1 norms.

# %%
import math

import numpy as np

from scalex import Marginals, margin_residual, normalize_gauge, operator_norm, sinkhorn_knopp

# %% [markdown]
# ## A 2x2 example with a closed form
# For doubly-stochastic targets the limit is [[p, 1-p], [1-p, p]] with
# p = sqrt(A11 A22) / (sqrt(A11 A22) + sqrt(A12 A21)).

# %%
A = np.array([[1.0, 2.0], [3.0, 4.0]])
m = Marginals(np.ones(2), np.ones(2))
sol = sinkhorn_knopp(A, m)
p = 2 / (2 + math.sqrt(6))
print("scaled matrix:\n", sol.scaled)
print("closed form p:", p)
print("iterations:", sol.iterations, "residual:", sol.final_margin_error)

# %% [markdown]
# ## Rectangular targets
# Row and column targets only need the same total mass.

# %%
rng = np.random.default_rng(0)
A = rng.uniform(1, 3, (4, 6))
r = np.array([1.0, 2.0, 3.0, 4.0])
c = np.full(6, r.sum() / 6)
sol = sinkhorn_knopp(A, Marginals(r, c))
print("row sums:", sol.scaled.sum(1))
print("col sums:", sol.scaled.sum(0))
print("margin residual:", margin_residual(sol.scaled, Marginals(r, c)))
print("||x||_1 =", sol.x.sum(), " ||y||_1 =", sol.y.sum())

# %% [markdown]
# ## The gauge
# Any rescaling (alpha x, y / alpha) gives the same scaled matrix;
# normalize_gauge picks the balanced one back.

# %%
x2, y2 = normalize_gauge(5.0 * sol.x, sol.y / 5.0)
print("recovered factors match:", np.allclose(x2, sol.x), np.allclose(y2, sol.y))

# %% [markdown]
# ## Spectral norm of a doubly-stochastic matrix
# Both the all-ones vectors are singular vectors with value 1, and nothing is
# larger.

# %%
B = rng.uniform(1.5, 2.5, (200, 200))
P = sinkhorn_knopp(B, Marginals(np.ones(200), np.ones(200))).scaled
print("power iteration:", operator_norm(P))
print("lanczos:        ", operator_norm(P, method="lanczos"))
