"""Random-matrix convergence experiments.

For each matrix width ``N`` on a grid, a population matrix ``A`` with entries
uniform on ``[1.5, 2.5]`` and an observation ``A~`` uniform on
``[A - 0.5, A + 0.5]`` are drawn, both are scaled to the scenario's
marginals, and two errors are recorded:

* ``e_n``: max entrywise relative error between the gauge-normalized
  factors of ``A~`` and of ``A``;
* ``op_err``: ``||P~ - P||_2 / ||P||_2`` for the scaled matrices.

Trial results are averaged per ``N`` and the log-log slope of the averages
is compared with the predicted rate.

Scenarios (``M`` rows, ``N`` columns):

``doubly_stochastic`` (``a``)
    ``M = N``, all targets 1.
``rect_random_sums`` (``b``)
    ``M = 3N``, targets uniform on ``[0.1, 1]``, each side normalized to sum 1.
``rect_sqrt`` (``c``)
    ``M = round(10 sqrt(N))``, row targets ``N``, column targets ``M``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from statistics import NormalDist

import numpy as np

from scalex.bounds import EnsembleBounds, error_measure, lemma2_tail, rho_profile, theorem2_report
from scalex.core import InvalidInputError, Marginals, operator_norm, sinkhorn_knopp
from scalex.ensembles import gen_observation, gen_population
from scalex.rng import derive_seed, philox

SCENARIOS = ("doubly_stochastic", "rect_random_sums", "rect_sqrt")
SCENARIO_ALIASES = {"a": "doubly_stochastic", "b": "rect_random_sums", "c": "rect_sqrt"}
DEFAULT_GRID = (64, 128, 256, 512, 1024, 2048, 4096)
CSV_FIELDS = (
    "scenario", "N", "M", "mean_en", "std_en", "mean_operr", "std_operr",
    "bound_en", "bound_operr", "trials", "failures",
)


class ScenarioAborted(RuntimeError):
    """Too many trials of a scenario failed to converge; ``curve`` holds the partial result."""

    def __init__(self, message: str, curve: "ErrorCurve"):
        super().__init__(message)
        self.curve = curve


def resolve_scenario(name: str) -> str:
    name = SCENARIO_ALIASES.get(name, name)
    if name not in SCENARIOS:
        raise InvalidInputError(f"unknown scenario {name!r}; expected a, b, c or one of {SCENARIOS}")
    return name


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    N_values: tuple = DEFAULT_GRID
    trials: int = 20
    base_seed: int = 0
    tol: float = 1e-12
    max_iters: int = 10**6
    low: float = 1.5
    high: float = 2.5
    half_width: float = 0.5
    opnorm_tol: float = 1e-8
    max_failure_fraction: float = 0.05

    def __post_init__(self):
        object.__setattr__(self, "scenario", resolve_scenario(self.scenario))
        Ns = tuple(int(n) for n in self.N_values)
        if not Ns:
            raise InvalidInputError("N_values must be non-empty")
        if any(b <= a for a, b in zip(Ns, Ns[1:])):
            raise InvalidInputError(f"N_values must be strictly increasing, got {Ns}")
        if Ns[0] < 2:
            raise InvalidInputError("every N must be at least 2")
        object.__setattr__(self, "N_values", Ns)
        if self.trials < 1:
            raise InvalidInputError(f"trials must be >= 1, got {self.trials}")
        if not (0 < self.low < self.high):
            raise InvalidInputError("population interval needs 0 < low < high")
        if not (0 <= self.half_width < self.low):
            raise InvalidInputError("half_width must lie in [0, low)")
        if not self.tol > 0:
            raise InvalidInputError("tol must be positive")


def scenario_rows(scenario: str, N: int) -> int:
    scenario = resolve_scenario(scenario)
    if scenario == "doubly_stochastic":
        return N
    if scenario == "rect_random_sums":
        return 3 * N
    return int(round(10 * math.sqrt(N)))


def make_marginals(scenario: str, N: int, seed: int) -> tuple[int, Marginals]:
    """Row count ``M`` and target marginals of ``scenario`` at width ``N``.

    ``seed`` is only consumed by ``rect_random_sums``.
    """
    scenario = resolve_scenario(scenario)
    if N < 2:
        raise InvalidInputError(f"N must be at least 2, got {N}")
    M = scenario_rows(scenario, N)
    if scenario == "doubly_stochastic":
        return M, Marginals(np.ones(M), np.ones(N))
    if scenario == "rect_random_sums":
        rng = philox(seed)
        r = rng.uniform(0.1, 1.0, M)
        c = rng.uniform(0.1, 1.0, N)
        return M, Marginals(r / r.sum(), c / c.sum())
    return M, Marginals(np.full(M, float(N)), np.full(N, float(M)))


def attainable_tol(tol: float, m: Marginals) -> float:
    """``tol`` floored at the float64 resolution of the largest target sum.

    An absolute tolerance of 1e-12 is below one ulp once targets reach a few
    thousand (``rect_sqrt`` at large ``N``); the floor keeps the stopping test
    meaningful without changing it anywhere it was attainable.
    """
    big = max(float(m.r.max()), float(m.c.max()))
    return max(tol, 64 * np.finfo(np.float64).eps * big)


def trial_seed(base_seed: int, scenario: str, N: int, t: int) -> int:
    return derive_seed(base_seed, resolve_scenario(scenario), N, t)


@dataclass(frozen=True)
class TrialResult:
    N: int
    M: int
    trial: int
    e_n: float
    op_err: float
    converged: bool
    p_norm: float = math.nan
    bound_en: float = math.nan
    iterations: tuple = (0, 0)


def run_trial(scenario: str, N: int, seed: int, cfg: ScenarioConfig, trial: int = 0) -> TrialResult:
    """One draw of ``(A, A~)``: scale both, return ``e_n`` and ``op_err``.

    Non-converged solves give ``converged=False`` with NaN errors.
    """
    M, m = make_marginals(scenario, N, derive_seed(seed, "marginals"))
    prof = rho_profile(m, M, N)
    bound_en = prof.rho1 * prof.rho2 * math.sqrt(math.log(max(M, N)))
    tol = attainable_tol(cfg.tol, m)

    A = gen_population(M, N, cfg.low, cfg.high, derive_seed(seed, "population"))
    if cfg.half_width > 0:
        At = gen_observation(A, cfg.half_width, derive_seed(seed, "observation"))
    else:
        At = A
    sol = sinkhorn_knopp(A, m, tol=tol, max_iters=cfg.max_iters)
    sol_t = sinkhorn_knopp(At, m, tol=tol, max_iters=cfg.max_iters)
    del A, At
    iters = (sol.iterations, sol_t.iterations)
    if not (sol.converged and sol_t.converged):
        return TrialResult(N, M, trial, math.nan, math.nan, False, bound_en=bound_en, iterations=iters)

    e_n = error_measure(sol_t.x, sol_t.y, sol.x, sol.y)
    p_norm = operator_norm(sol.scaled, tol=cfg.opnorm_tol, method="lanczos")
    diff = np.subtract(sol_t.scaled, sol.scaled)
    del sol_t
    d_norm = operator_norm(diff, tol=cfg.opnorm_tol, method="lanczos")
    return TrialResult(N, M, trial, e_n, d_norm / p_norm, True, p_norm, bound_en, iters)


@dataclass
class ErrorCurve:
    scenario: str
    N_values: list
    M_values: list
    mean_en: list
    std_en: list
    mean_operr: list
    std_operr: list
    bound_en: list
    bound_operr: list
    trials: list
    failures: list
    records: list = field(default_factory=list, repr=False)

    def rows(self) -> list[dict]:
        out = []
        for k, N in enumerate(self.N_values):
            out.append({
                "scenario": self.scenario, "N": N, "M": self.M_values[k],
                "mean_en": self.mean_en[k], "std_en": self.std_en[k],
                "mean_operr": self.mean_operr[k], "std_operr": self.std_operr[k],
                "bound_en": self.bound_en[k], "bound_operr": self.bound_operr[k],
                "trials": self.trials[k], "failures": self.failures[k],
            })
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        for row in self.rows():
            w.writerow({k: format(v, ".17g") if isinstance(v, float) else v for k, v in row.items()})
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"scenario": self.scenario, "rows": self.rows()}, indent=2)

    def slope_en(self) -> "SlopeFit":
        return fit_loglog_slope(self.N_values, self.mean_en)

    def slope_operr(self) -> "SlopeFit":
        return fit_loglog_slope(self.N_values, self.mean_operr)


def _reduce(cfg: ScenarioConfig, results: list[TrialResult]) -> ErrorCurve:
    curve = ErrorCurve(cfg.scenario, [], [], [], [], [], [], [], [], [], [], records=results)
    for N in cfg.N_values:
        group = [r for r in results if r.N == N]
        ok = [r for r in group if r.converged]
        M = scenario_rows(cfg.scenario, N)
        en = np.array([r.e_n for r in ok])
        op = np.array([r.op_err for r in ok])
        curve.N_values.append(N)
        curve.M_values.append(M)
        curve.mean_en.append(float(en.mean()) if ok else math.nan)
        curve.std_en.append(float(en.std()) if ok else math.nan)
        curve.mean_operr.append(float(op.mean()) if ok else math.nan)
        curve.std_operr.append(float(op.std()) if ok else math.nan)
        curve.bound_en.append(float(np.mean([r.bound_en for r in group])))
        curve.bound_operr.append(math.sqrt(math.log(max(M, N)) / min(M, N)))
        curve.trials.append(len(group))
        curve.failures.append(len(group) - len(ok))
    return curve


def default_workers() -> int:
    env = os.environ.get("SCALEX_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_scenario(cfg: ScenarioConfig, workers: int | None = None) -> ErrorCurve:
    """Run every ``(N, trial)`` of ``cfg`` and average per ``N``.

    Trials may run on ``workers`` threads (default: ``SCALEX_THREADS`` or the
    CPU count); results are always reduced in ``(N, trial)`` order so the
    curve does not depend on scheduling.

    Raises
    ------
    ScenarioAborted
        If more than ``cfg.max_failure_fraction`` of all trials failed.
    """
    jobs = [(N, t) for N in cfg.N_values for t in range(cfg.trials)]
    workers = default_workers() if workers is None else max(1, int(workers))

    def job(nt):
        N, t = nt
        return run_trial(cfg.scenario, N, trial_seed(cfg.base_seed, cfg.scenario, N, t), cfg, t)

    if workers == 1:
        results = [job(nt) for nt in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, jobs))
    curve = _reduce(cfg, results)
    failed = sum(curve.failures)
    if failed > cfg.max_failure_fraction * len(jobs):
        raise ScenarioAborted(
            f"{failed} of {len(jobs)} trials failed to converge in scenario {cfg.scenario}", curve
        )
    return curve


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    r_squared: float


def fit_loglog_slope(N_values, means) -> SlopeFit:
    """Least-squares line through ``(log N, log mean)``."""
    N = np.asarray(N_values, dtype=np.float64)
    y = np.asarray(means, dtype=np.float64)
    if N.shape != y.shape or N.ndim != 1:
        raise InvalidInputError("N_values and means must be 1-D of equal length")
    if N.size < 3:
        raise InvalidInputError(f"need at least 3 points for a slope fit, got {N.size}")
    if not (np.all(N > 0) and np.all(y > 0)):
        raise InvalidInputError("slope fit needs strictly positive N values and means")
    lx, ly = np.log(N), np.log(y)
    X = np.column_stack([lx, np.ones_like(lx)])
    (slope, intercept), *_ = np.linalg.lstsq(X, ly, rcond=None)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(resid @ resid) / ss_tot
    return SlopeFit(float(slope), float(intercept), min(1.0, max(0.0, r2)))


def binomial_margin(p: float, n: int, confidence: float = 0.99) -> float:
    """Normal-approximation half-width of a two-sided binomial interval for rate ``p`` over ``n`` trials."""
    p = min(max(p, 0.0), 1.0)
    z = NormalDist().inv_cdf(0.5 + confidence / 2)
    return z * math.sqrt(p * (1 - p) / n)


def empirical_tail_check(
    env: EnsembleBounds,
    m: Marginals,
    M: int,
    N: int,
    eps: float,
    trials: int,
    seed: int,
    axis: str = "row",
    index: int = 0,
) -> tuple[float, float]:
    """Monte-Carlo rate of a relative line-sum deviation above ``eps`` and its Hoeffding bound.

    The random matrix has independent entries uniform on the envelope, so its
    mean is the envelope midpoint; the factors ``(x, y)`` are those of the
    mean. Only the selected row (or column) is resampled per trial.
    """
    if env.shape != (M, N) or (m.M, m.N) != (M, N):
        raise InvalidInputError(f"envelope {env.shape} / marginals ({m.M}, {m.N}) do not match ({M}, {N})")
    if trials < 1:
        raise InvalidInputError(f"trials must be >= 1, got {trials}")
    bound = lemma2_tail(env, m, eps, axis, index)
    mean = 0.5 * (env.lower + env.upper)
    sol = sinkhorn_knopp(mean, m)
    rng = philox(seed)
    if axis == "row":
        lo, w = env.lower[index], env.widths[index]
        draws = lo + w * rng.random((trials, N))
        sums = sol.x[index] * (draws @ sol.y)
        target = m.r[index]
    else:
        lo, w = env.lower[:, index], env.widths[:, index]
        draws = lo + w * rng.random((trials, M))
        sums = (draws @ sol.x) * sol.y[index]
        target = m.c[index]
    violations = np.abs(sums / target - 1.0) > eps
    return float(violations.mean()), bound


def theorem2_coverage_check(
    N: int,
    delta: float,
    trials: int,
    seed: int,
    low: float,
    high: float,
    half_width: float,
    M: int | None = None,
) -> tuple[float, "object"]:
    """Fraction of trials whose ``e_n`` exceeds the concentration error bound.

    The population ``A`` (uniform on ``[low, high]``) is fixed and only the
    observation is redrawn, so the envelope ``[A - h, A + h]`` is fixed too.
    Doubly-stochastic targets when ``M`` is ``None``.
    """
    M = N if M is None else M
    m = Marginals(np.ones(M), np.full(N, M / N))
    A = gen_population(M, N, low, high, derive_seed(seed, "population"))
    env = EnsembleBounds.around(A, half_width)
    report = theorem2_report(env, m, M, N, delta)
    threshold = max(report.row_rel_error_bound, report.col_rel_error_bound)
    ref = sinkhorn_knopp(A, m)
    exceed = 0
    for t in range(trials):
        At = gen_observation(A, half_width, derive_seed(seed, "observation", t))
        sol = sinkhorn_knopp(At, m)
        if error_measure(sol.x, sol.y, ref.x, ref.y) > threshold:
            exceed += 1
    return exceed / trials, report


def write_plot_script(path, csv_name: str, scenario: str) -> None:
    """gnuplot script drawing both error curves against their predicted rates, log-log."""
    text = f"""# gnuplot script; run with: gnuplot {Path(path).name}
set datafile separator ","
set terminal pngcairo size 1100,450
set output "{scenario}.png"
set logscale xy
set xlabel "N"
set key bottom left
set multiplot layout 1,2 title "{scenario}"
set title "scaling-factor error"
plot "{csv_name}" using 2:4 skip 1 with linespoints title "mean E_N", \\
     "{csv_name}" using 2:8 skip 1 with lines dashtype 2 title "rho1*rho2*sqrt(log max(M,N))"
set title "relative operator-norm error"
plot "{csv_name}" using 2:6 skip 1 with linespoints title "mean ||P~-P||/||P||", \\
     "{csv_name}" using 2:9 skip 1 with lines dashtype 2 title "sqrt(log max(M,N)/min(M,N))"
unset multiplot
"""
    Path(path).write_text(text)


def write_curve(curve: ErrorCurve, out_dir) -> dict:
    """Write ``<scenario>.csv``, ``<scenario>.json`` and ``<scenario>.gp`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "csv": out / f"{curve.scenario}.csv",
        "json": out / f"{curve.scenario}.json",
        "plot": out / f"{curve.scenario}.gp",
    }
    paths["csv"].write_text(curve.to_csv())
    paths["json"].write_text(curve.to_json() + "\n")
    write_plot_script(paths["plot"], paths["csv"].name, curve.scenario)
    return paths


def trial_records(curve: ErrorCurve) -> list[dict]:
    return [asdict(r) for r in curve.records]
