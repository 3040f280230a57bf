"""Command-line interface.

Subcommands:

* ``reduce``    — one algorithm, one horizon, prints the result row.
* ``bench``     — run a JSON benchmark spec (all algorithm/horizon pairs).
* ``verify``    — run a structural check suite on seeded synthetic systems.
* ``residuals`` — print the optimality residuals of a stored reduced model.

``--seed`` falls back to the MORTAU_SEED environment variable, then 0.
Exit status: 0 success, 1 any failed row or failed check, 2 usage error.
"""

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import verification
from .benchmarks import load_model, load_reduced_model, save_system
from .exceptions import MortauError
from .harness import (
    ALGORITHMS,
    BenchmarkSpec,
    format_row,
    run_benchmark,
    run_single,
    write_rows_csv,
    write_rows_json,
    write_trajectory,
)
from .metrics import optimality_residuals

#: CLI names for the verify suites; content names plus short compatibility keys.
SUITES = {
    "prop1": "moment-identities",
    "moment-identities": "moment-identities",
    "theorem2": "tangential-error-formulas",
    "tangential-error-formulas": "tangential-error-formulas",
    "theorem3": "subspace-equivalence",
    "subspace-equivalence": "subspace-equivalence",
    "trend": "residual-trend",
    "residual-trend": "residual-trend",
    "all": "all",
}


def _default_seed():
    env = os.environ.get("MORTAU_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise SystemExit(f"MORTAU_SEED must be an integer, got {env!r}")
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="mortau",
        description="Time-limited H2-optimal model order reduction harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    reduce_p = sub.add_parser("reduce", help="reduce one model with one algorithm")
    reduce_p.add_argument("--model", required=True,
                          help="builtin name (fom/beam/iss) or path to a model directory")
    reduce_p.add_argument("--order", required=True, type=int, help="reduced order r")
    reduce_p.add_argument("--tau", type=float, default=None,
                          help="horizon end time (required for lt-irka and tl-tsia)")
    reduce_p.add_argument("--algo", default="lt-irka", choices=ALGORITHMS)
    reduce_p.add_argument("--tol", type=float, default=1e-5)
    reduce_p.add_argument("--max-iters", type=int, default=200)
    reduce_p.add_argument("--seed", type=int, default=None)
    reduce_p.add_argument("--out", default=None, help="directory for result files")
    reduce_p.add_argument("--format", choices=("csv", "json"), default="csv",
                          help="result table format when --out is given")

    bench_p = sub.add_parser("bench", help="run a benchmark spec file")
    bench_p.add_argument("spec", help="JSON file with BenchmarkSpec fields")
    bench_p.add_argument("--out", default=None, help="override the spec's output_path")

    verify_p = sub.add_parser("verify", help="run a structural check suite")
    verify_p.add_argument("--suite", default="all", choices=sorted(SUITES))
    verify_p.add_argument("--seed", type=int, default=None)

    resid_p = sub.add_parser("residuals",
                             help="optimality residuals of a stored reduced model")
    resid_p.add_argument("--model", required=True, help="full model source")
    resid_p.add_argument("--reduced", required=True,
                         help="directory holding the stored reduced model")
    resid_p.add_argument("--tau", required=True, type=float)
    return parser


def _cmd_reduce(args):
    if args.algo in ("lt-irka", "tl-tsia") and args.tau is None:
        print(f"error: --tau is required for {args.algo}", file=sys.stderr)
        return 2
    seed = args.seed if args.seed is not None else _default_seed()
    tau = args.tau if args.tau is not None else 1.0
    system = load_model(args.model)
    if not 1 <= args.order <= system.order:
        print(f"error: --order must lie in [1, {system.order}]", file=sys.stderr)
        return 2
    row, model, trajectory = run_single(
        system, args.algo, args.order, tau,
        tol=args.tol, max_iter=args.max_iters, seed=seed,
    )
    print(format_row(row))
    if row.detail:
        print(f"  detail: {row.detail}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        if args.format == "json":
            write_rows_json([row], out / "results.json")
        else:
            write_rows_csv([row], out / "results.csv")
        if trajectory is not None:
            name = f"trajectory__{row.model}__{row.algorithm}__tau{row.tau:g}.csv"
            write_trajectory(out / name, *trajectory)
        if model is not None:
            save_system(model.system, out / "reduced_model")
        print(f"results written to {out}")
    return 0 if row.status == "ok" else 1


def _cmd_bench(args):
    spec = BenchmarkSpec.from_file(args.spec)
    if args.out is not None:
        spec = BenchmarkSpec(
            model_source=spec.model_source,
            reduced_order=spec.reduced_order,
            horizons=spec.horizons,
            algorithms=spec.algorithms,
            tolerance=spec.tolerance,
            max_iterations=spec.max_iterations,
            seed=spec.seed,
            output_path=args.out,
        )
    rows = run_benchmark(spec)
    for row in rows:
        print(format_row(row))
    return 0 if all(row.status == "ok" for row in rows) else 1


def _run_verify_suite(suite, seed):
    results = []
    systems = verification.synthetic_suite(seed=seed)
    rng = np.random.default_rng(seed)
    if suite in ("moment-identities", "all"):
        for k, system in enumerate(systems[:5]):
            mu = complex(-rng.uniform(0.2, 2.0), rng.uniform(-2.0, 2.0))
            b = rng.standard_normal(system.n_inputs)
            c = rng.standard_normal(system.n_outputs)
            results.append(
                verification.check_moment_identities(system, mu, b, c, tau=0.5 + 0.25 * k)
            )
    if suite in ("tangential-error-formulas", "all"):
        for k, system in enumerate(systems[:5]):
            data = verification.random_conjugate_data(
                4, system.n_inputs, system.n_outputs, seed=seed + k
            )
            results.append(
                verification.check_tangential_error_formulas(system, data, tau=0.8)
            )
    if suite in ("subspace-equivalence", "all"):
        for k, system in enumerate(systems[:3]):
            results.append(
                verification.check_subspace_equivalence(
                    system, order=4, tau=1.0, seed=seed + k
                )
            )
    if suite in ("residual-trend", "all"):
        # multi-input systems: very short horizons collapse single-input
        # interpolation spaces onto span{B}
        mimo = [s for s in systems if s.n_inputs > 1]
        for k, system in enumerate(mimo[:2]):
            results.append(
                verification.check_residual_trend(
                    system, order=4, tau_small=0.01, tau_large=5.0, seed=seed + k
                )
            )
    return results


def _cmd_verify(args):
    seed = args.seed if args.seed is not None else _default_seed()
    suite = SUITES[args.suite]
    results = _run_verify_suite(suite, seed)
    for result in results:
        print(result)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 0 if not failed else 1


def _cmd_residuals(args):
    system = load_model(args.model)
    reduced = load_reduced_model(args.reduced)
    residuals = optimality_residuals(system, reduced, args.tau)
    print(f"optimality residuals at tau={args.tau:g} "
          f"({reduced.order} shifts, conjugate duplicates included)")
    print(f"{'shift':>28}  {'right':>12}  {'left':>12}  {'bitangential':>12}")
    for k in range(reduced.order):
        sigma = residuals.shifts[k]
        print(
            f"{sigma.real:>14.6g}{sigma.imag:>+13.6g}j "
            f"{residuals.right_tangential[k]:>12.4e}  "
            f"{residuals.left_tangential[k]:>12.4e}  "
            f"{residuals.bitangential[k]:>12.4e}"
        )
    max_rt, max_lt, max_d = residuals.summary()
    print(f"max: right={max_rt:.4e} left={max_lt:.4e} bitangential={max_d:.4e}")
    return 0


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "reduce": _cmd_reduce,
        "bench": _cmd_bench,
        "verify": _cmd_verify,
        "residuals": _cmd_residuals,
    }
    try:
        return handlers[args.command](args)
    except MortauError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
