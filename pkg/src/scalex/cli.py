"""Command-line entry point: ``scalex {scale,bounds,experiment,tail-check}``.

Exit codes: 0 success, 1 invalid input or I/O error, 2 numerical failure
(non-convergence, too many failed trials).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from scalex import bounds as B
from scalex.core import InvalidInputError, Marginals, sinkhorn_knopp
from scalex.ensembles import gen_population
from scalex.experiments import (
    ScenarioAborted,
    ScenarioConfig,
    binomial_margin,
    empirical_tail_check,
    run_scenario,
    write_curve,
)
from scalex.io import read_matrix, read_vector, write_matrix, write_vector
from scalex.rng import derive_seed

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2


def _dump(obj) -> str:
    return json.dumps(obj, indent=2)


def _grid(text: str) -> tuple[int, ...]:
    items = [t for t in text.split(",") if t.strip()]
    try:
        return tuple(int(t) for t in items)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must be comma-separated integers, got {text!r}")


def _marginals_from_args(args) -> Marginals:
    if args.row_sums or args.col_sums:
        if not (args.row_sums and args.col_sums):
            raise InvalidInputError("--row-sums and --col-sums must be given together")
        m = Marginals(read_vector(args.row_sums), read_vector(args.col_sums))
        if (m.M, m.N) != (args.M, args.N):
            raise InvalidInputError(f"marginal files have lengths ({m.M}, {m.N}), expected ({args.M}, {args.N})")
        return m
    return Marginals.uniform(args.M, args.N)


def cmd_scale(args) -> int:
    A = read_matrix(args.matrix)
    m = Marginals(read_vector(args.row_sums), read_vector(args.col_sums))
    sol = sinkhorn_knopp(A, m, tol=args.tol, max_iters=args.max_iters)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.format == "json":
        payload = {
            "x": sol.x.tolist(),
            "y": sol.y.tolist(),
            "scaled": sol.scaled.tolist(),
            "iterations": sol.iterations,
            "final_margin_error": sol.final_margin_error,
            "converged": sol.converged,
        }
        (out / "solution.json").write_text(_dump(payload) + "\n")
    else:
        write_vector(out / "x.csv", sol.x)
        write_vector(out / "y.csv", sol.y)
        write_matrix(out / "P.csv", sol.scaled)
    print(f"iterations: {sol.iterations}")
    print(f"final_margin_error: {sol.final_margin_error:.17g}")
    print(f"converged: {str(sol.converged).lower()}")
    return EXIT_OK if sol.converged else EXIT_NUMERIC


def cmd_bounds(args) -> int:
    report = args.report
    if report == "constants":
        c_p, c_e = B.concentration_constants(args.a, args.b, args.d)
        result = {"c_p": c_p, "c_e": c_e}
    elif report == "lemma1":
        lo, hi = B.lemma1_bounds(B.EnsembleBounds.from_scalars(1, 1, args.a, args.b, args.b - args.a))
        result = {"lower": lo, "upper": hi}
    elif report == "rho":
        p = B.rho_profile(_marginals_from_args(args), args.M, args.N)
        result = {"rho1": p.rho1, "rho2": p.rho2, "rho3": p.rho3, "M": p.M, "N": p.N}
    elif report == "theorem2":
        env = B.EnsembleBounds.from_scalars(args.M, args.N, args.a, args.b, args.d)
        result = B.theorem2_report(env, _marginals_from_args(args), args.M, args.N, args.delta).to_dict()
    elif report == "lemma2":
        env = B.EnsembleBounds.from_scalars(args.M, args.N, args.a, args.b, args.d)
        m = _marginals_from_args(args)
        result = {"axis": args.axis, "index": args.index, "eps": args.eps,
                  "bound": B.lemma2_tail(env, m, args.eps, args.axis, args.index)}
    else:
        row, col = B.lemma3_bound(args.eps, args.a, args.b, args.s, args.M, args.min_r,
                                  args.N, args.min_c, args.c1, args.c2)
        result = {"row_bound": row, "col_bound": col}
    print(_dump(result))
    return EXIT_OK


def cmd_experiment(args) -> int:
    if not args.grid:
        raise InvalidInputError("--grid must list at least one N")
    cfg = ScenarioConfig(
        scenario=args.scenario,
        N_values=args.grid,
        trials=args.trials,
        base_seed=args.seed,
        tol=args.tol,
        max_iters=args.max_iters,
    )
    code = EXIT_OK
    try:
        curve = run_scenario(cfg)
    except ScenarioAborted as exc:
        print(f"aborted: {exc}", file=sys.stderr)
        curve, code = exc.curve, EXIT_NUMERIC
    paths = write_curve(curve, args.out)
    for kind in ("csv", "json", "plot"):
        print(f"wrote {paths[kind].name}")
    if len(curve.N_values) >= 3 and code == EXIT_OK:
        en, op = curve.slope_en(), curve.slope_operr()
        print(f"slope_en: {en.slope:.6f} (r2 {en.r_squared:.4f})")
        print(f"slope_operr: {op.slope:.6f} (r2 {op.r_squared:.4f})")
    else:
        print("slopes: n/a (need >= 3 grid points and a complete run)")
    return code


def cmd_tail_check(args) -> int:
    A = gen_population(args.N, args.N, args.low, args.high, derive_seed(args.seed, "population"))
    env = B.EnsembleBounds.around(A, args.half_width)
    m = Marginals.uniform(args.N, args.N)
    rate, bound = empirical_tail_check(env, m, args.N, args.N, args.eps, args.trials,
                                       derive_seed(args.seed, "tail"), args.axis, args.index)
    margin = binomial_margin(bound, args.trials)
    print(_dump({
        "eps": args.eps, "trials": args.trials, "violation_rate": rate, "bound": bound,
        "margin_99": margin, "consistent": bool(bound >= 1 or rate <= bound + margin),
    }))
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    # usage errors are invalid input (exit 1), not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="scalex", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("scale", help="scale a CSV matrix to CSV row/column sums")
    s.add_argument("matrix")
    s.add_argument("row_sums")
    s.add_argument("col_sums")
    s.add_argument("--tol", type=float, default=1e-12)
    s.add_argument("--max-iters", type=int, default=10**6)
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_scale)

    b = sub.add_parser("bounds", help="evaluate a closed-form bound, printed as JSON")
    b.add_argument("report", choices=("rho", "constants", "theorem2", "lemma1", "lemma2", "lemma3"))
    b.add_argument("--a", type=float, default=1.0, help="envelope minimum")
    b.add_argument("--b", type=float, default=2.0, help="envelope maximum")
    b.add_argument("--d", type=float, default=1.0, help="largest envelope width")
    b.add_argument("--M", type=int, default=100)
    b.add_argument("--N", type=int, default=100)
    b.add_argument("--row-sums", help="CSV vector; default all ones")
    b.add_argument("--col-sums", help="CSV vector; default M/N each")
    b.add_argument("--delta", type=float, default=1.0)
    b.add_argument("--eps", type=float, default=0.1)
    b.add_argument("--axis", choices=("row", "col"), default="row")
    b.add_argument("--index", type=int, default=0)
    b.add_argument("--s", type=float, default=1.0, help="total mass (lemma3)")
    b.add_argument("--min-r", type=float, default=1.0)
    b.add_argument("--min-c", type=float, default=1.0)
    b.add_argument("--c1", type=float, default=1.0)
    b.add_argument("--c2", type=float, default=1.0)
    b.set_defaults(func=cmd_bounds)

    e = sub.add_parser("experiment", help="run a convergence-rate scenario")
    e.add_argument("--scenario", choices=("a", "b", "c"), default="a")
    e.add_argument("--grid", type=_grid, default=(64, 128, 256, 512, 1024, 2048, 4096))
    e.add_argument("--trials", type=int, default=20)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--tol", type=float, default=1e-12)
    e.add_argument("--max-iters", type=int, default=10**6)
    e.add_argument("--out", required=True, help="output directory")
    e.set_defaults(func=cmd_experiment)

    t = sub.add_parser("tail-check", help="Monte-Carlo check of the row-sum tail bound")
    t.add_argument("--N", type=int, default=100)
    t.add_argument("--eps", type=float, default=0.5)
    t.add_argument("--trials", type=int, default=2000)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--low", type=float, default=1.5)
    t.add_argument("--high", type=float, default=2.5)
    t.add_argument("--half-width", type=float, default=0.5)
    t.add_argument("--axis", choices=("row", "col"), default="row")
    t.add_argument("--index", type=int, default=0)
    t.set_defaults(func=cmd_tail_check)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
