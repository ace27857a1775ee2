# %% [markdown]
# # Convergence rates on random matrices
#
# Draw A with entries uniform on [1.5, 2.5] and a noisy copy with entries
# uniform on [A - 0.5, A + 0.5]. Scale both and compare. As N grows the
# factor error and the relative spectral error should shrink like
# sqrt(log N / N) for the doubly-stochastic and random-sum scenarios, and
# like sqrt(log N) / N^(1/4) for the sqrt scenario.
#
# This demo uses a small grid and 5 trials so it runs in seconds; the CLI
# (`scalex experiment`) runs the full 64..4096 grid with 20 trials.

# %%
import math
import tempfile

from scalex.experiments import ScenarioConfig, run_scenario, write_curve

GRID = (32, 64, 128, 256, 512)

# %%
for scenario in ("a", "b", "c"):
    curve = run_scenario(ScenarioConfig(scenario, GRID, trials=5))
    en, op = curve.slope_en(), curve.slope_operr()
    print(f"\n{curve.scenario}")
    for row in curve.rows():
        print(f"  N={row['N']:4d} M={row['M']:5d}  E_N={row['mean_en']:.4f}  op={row['mean_operr']:.4f}")
    print(f"  slope E_N {en.slope:.3f}, slope op {op.slope:.3f}")

# %% [markdown]
# Reference slopes of the predicted rates on the same grid:

# %%
from scalex.experiments import fit_loglog_slope

print("sqrt(log N / N):", fit_loglog_slope(GRID, [math.sqrt(math.log(n) / n) for n in GRID]).slope)
print("sqrt(log N) / N^0.25:", fit_loglog_slope(GRID, [math.sqrt(math.log(n)) / n**0.25 for n in GRID]).slope)

# %% [markdown]
# Curves serialize to CSV, JSON and a gnuplot script.

# %%
out = tempfile.mkdtemp()
print(write_curve(curve, out))
