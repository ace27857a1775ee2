"""One test per acceptance criterion; each prints a PASS/FAIL line.

Criteria 4 to 8 share the full-grid experiment runs (about five minutes on
one core); run ``pytest tests/test_acceptance.py -s`` to watch the lines as
they are produced.
"""

import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from scalex import (
    EnsembleBounds,
    Marginals,
    error_measure,
    lemma1_bounds,
    lemma2_tail,
    margin_residual,
    normalize_gauge,
    rho_profile,
    scaled_matrix,
    sinkhorn_knopp,
    theorem2_report,
)
from scalex.ensembles import gen_population
from scalex.experiments import (
    ScenarioConfig,
    binomial_margin,
    empirical_tail_check,
    run_scenario,
)
from scalex.rng import derive_seed, philox


def check(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def random_marginals(rng, M, N):
    r = rng.uniform(0.1, 1.0, M)
    c = rng.uniform(0.1, 1.0, N)
    return Marginals(r, c * r.sum() / c.sum())


def test_1_two_by_two_closed_form():
    rng = philox(derive_seed(1, "acceptance"))
    m = Marginals(np.ones(2), np.ones(2))
    start = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        A = rng.uniform(0.5, 4.0, (2, 2))
        g, h = math.sqrt(A[0, 0] * A[1, 1]), math.sqrt(A[0, 1] * A[1, 0])
        p = g / (g + h)
        P = sinkhorn_knopp(A, m).scaled
        worst = max(worst, float(np.max(np.abs(P - [[p, 1 - p], [1 - p, p]]))))
    elapsed = time.perf_counter() - start
    check(1, worst <= 1e-10 and elapsed < 1.0, f"max deviation {worst:.2e}, {elapsed:.3f} s")


def test_2_factor_interval_suite():
    rng = philox(derive_seed(2, "acceptance"))
    slack, worst = 1e-9, -math.inf
    for _ in range(1000):
        M, N = (int(k) for k in rng.integers(1, 51, size=2))
        a = rng.uniform(0.05, 5.0)
        b = a * rng.uniform(1.0, 10.0)
        A = rng.uniform(a, b, (M, N))
        m = random_marginals(rng, M, N)
        lo, hi = lemma1_bounds(EnsembleBounds.constant(M, N, a, b))
        sol = sinkhorn_knopp(A, m)
        ratios = np.concatenate([sol.x / m.r_bar, sol.y / m.c_bar])
        # positive means outside the slackened interval
        worst = max(worst, lo - slack - ratios.min(), ratios.max() - hi - slack)
    check(2, worst <= 0, f"largest excursion beyond slack {worst:.2e}")


def test_3_uniqueness_and_gauge():
    rng = philox(derive_seed(3, "acceptance"))
    worst_p = worst_x = 0.0
    for _ in range(200):
        M, N = (int(k) for k in rng.integers(1, 21, size=2))
        A = rng.uniform(0.5, 4.0, (M, N))
        m = random_marginals(rng, M, N)
        s1 = sinkhorn_knopp(A, m)
        s2 = sinkhorn_knopp(A, m, y0=rng.uniform(0.01, 100.0, N))
        worst_p = max(worst_p, float(np.max(np.abs(s1.scaled - s2.scaled))))
        ratio = np.concatenate([s1.x / s2.x, s2.y / s1.y])
        worst_x = max(worst_x, float(ratio.max() - ratio.min()))
    check(3, worst_p <= 1e-10 and worst_x <= 1e-9, f"P gap {worst_p:.2e}, factor ratio spread {worst_x:.2e}")


@pytest.fixture(scope="module")
def curves():
    return {sc: run_scenario(ScenarioConfig(sc)) for sc in "abc"}


def _in(v, lo, hi):
    return lo <= v <= hi


def test_4_scenario_a_rate(curves):
    fit = curves["a"].slope_en()
    check(4, _in(fit.slope, -0.60, -0.40), f"E_N slope {fit.slope:.4f} (r2 {fit.r_squared:.4f})")


def test_5_scenario_b_rate(curves):
    fit = curves["b"].slope_en()
    check(5, _in(fit.slope, -0.60, -0.40), f"E_N slope {fit.slope:.4f} (r2 {fit.r_squared:.4f})")


def test_6_scenario_c_rate(curves):
    fit = curves["c"].slope_en()
    check(6, _in(fit.slope, -0.35, -0.15), f"E_N slope {fit.slope:.4f} (r2 {fit.r_squared:.4f})")


def test_7_operator_norm_rates(curves):
    s = {sc: curves[sc].slope_operr().slope for sc in "abc"}
    ok = _in(s["a"], -0.60, -0.35) and _in(s["b"], -0.60, -0.35) and _in(s["c"], -0.40, -0.15)
    check(7, ok, f"slopes a {s['a']:.4f}, b {s['b']:.4f}, c {s['c']:.4f}")


def test_8_doubly_stochastic_norm(curves):
    recs = [r for r in curves["a"].records if r.converged]
    worst = max(abs(r.p_norm - 1.0) for r in recs)
    check(8, len(recs) == len(curves["a"].records) and worst <= 1e-8,
          f"{len(recs)} converged trials, max | ||P||_2 - 1 | = {worst:.2e}")


def test_9_row_sum_tail():
    N, trials = 100, 2000
    A = gen_population(N, N, 1.5, 2.5, derive_seed(9, "population"))
    env = EnsembleBounds.around(A, 0.5)
    m = Marginals(np.ones(N), np.ones(N))
    rate_half, bound_half = empirical_tail_check(env, m, N, N, 0.5, trials, derive_seed(9, "tail"))
    # the quoted 7.45e-6 is the constant [1, 2] envelope with unit widths
    quoted = lemma2_tail(EnsembleBounds.constant(N, N, 1.0, 2.0), m, 0.5, "row", 0)
    eps = 0.3
    rate, bound = empirical_tail_check(env, m, N, N, eps, trials, derive_seed(9, "tail", 2))
    margin = binomial_margin(bound, trials)
    ok = (rate_half == 0.0 and abs(quoted - 7.45e-6) < 1e-8
          and 0.01 < bound < 0.5 and rate <= bound + margin)
    check(9, ok, f"eps 0.5: {rate_half:.0f} violations (bound {bound_half:.2e}, constant-envelope {quoted:.3e}); "
                 f"eps {eps}: rate {rate:.4f} <= {bound:.4f} + {margin:.4f}")


def test_10_property_suite():
    rng = philox(derive_seed(10, "acceptance"))
    failures = []
    for k in range(100):
        M, N = (int(v) for v in rng.integers(1, 12, size=2))
        A = rng.uniform(0.2, 5.0, (M, N))
        m = random_marginals(rng, M, N)
        sol = sinkhorn_knopp(A, m)
        tol = 1e-12
        if not (sol.converged and margin_residual(sol.scaled, m) <= tol):
            failures.append(f"margin fidelity #{k}")
        alpha = float(rng.uniform(0.01, 100.0))
        if not np.allclose(scaled_matrix(A, alpha * sol.x, sol.y / alpha), sol.scaled, rtol=1e-14, atol=0):
            failures.append(f"gauge invariance #{k}")
        tr = sinkhorn_knopp(A.T, Marginals(m.c, m.r))
        if np.max(np.abs(tr.scaled.T - sol.scaled)) > 10 * tol:
            failures.append(f"transpose symmetry #{k}")
        xt, yt = normalize_gauge(sol.x * rng.uniform(0.9, 1.1, M), sol.y * rng.uniform(0.9, 1.1, N))
        e0 = error_measure(xt, yt, sol.x, sol.y)
        e1 = error_measure(alpha * xt, yt / alpha, alpha * sol.x, sol.y / alpha)
        if abs(e1 - e0) > 1e-9 * max(e0, 1e-300):
            failures.append(f"error_measure gauge #{k}")
        p = rho_profile(m, M, N)
        if p.rho1 < max(M**-0.5, N**-0.5) * (1 - 1e-12) or p.rho2 < 1 - 1e-12:
            failures.append(f"rho lower bounds #{k}")
        env = EnsembleBounds.constant(M, N, 0.2, 5.0)
        d1, d2 = sorted(rng.uniform(0.01, 1.0, 2))
        r1, r2 = theorem2_report(env, m, M, N, d1), theorem2_report(env, m, M, N, d2)
        if r2.probability_floor < r1.probability_floor or not math.isclose(
            r2.row_rel_error_bound, r1.row_rel_error_bound * d2 / d1, rel_tol=1e-12
        ):
            failures.append(f"concentration report monotonicity #{k}")
    check(10, not failures, "all properties hold on 100 instances" if not failures else ", ".join(failures[:5]))
