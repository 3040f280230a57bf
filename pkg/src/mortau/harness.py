"""Benchmark orchestration and result serialization.

A benchmark spec names a model source, a reduced order, horizons, and the
algorithms to run; ``run_benchmark`` produces one row per (algorithm,
horizon) with absolute/relative horizon errors, iteration counts, and the
maxima of the three optimality-residual vectors, and writes a delimited
table, a JSON document, and one impulse-error trajectory file per run.

CSV column order (also the documented header):

    schema_version,model,algorithm,tau,order,absolute_error,relative_error,
    iterations,converged,max_right_residual,max_left_residual,
    max_bitangential_residual,status,detail,wall_time_s

Runs are deterministic for a fixed spec and seed; only ``wall_time_s``
varies between repeats.
"""

import csv
import json
import math
import time
from dataclasses import asdict, dataclass
from pathlib import Path

from .benchmarks import load_model
from .exceptions import MortauError, NoConvergence
from .metrics import error_trajectory, h2tau_error, optimality_residuals
from .reducers import irka, lt_irka, tl_tsia

__all__ = [
    "ALGORITHMS",
    "BenchmarkSpec",
    "ResultRow",
    "format_row",
    "read_rows_csv",
    "run_benchmark",
    "run_single",
    "write_rows_csv",
    "write_rows_json",
    "write_trajectory",
]

SCHEMA_VERSION = "1"
ALGORITHMS = ("lt-irka", "irka", "tl-tsia")

CSV_COLUMNS = [
    "schema_version",
    "model",
    "algorithm",
    "tau",
    "order",
    "absolute_error",
    "relative_error",
    "iterations",
    "converged",
    "max_right_residual",
    "max_left_residual",
    "max_bitangential_residual",
    "status",
    "detail",
    "wall_time_s",
]


@dataclass(frozen=True)
class BenchmarkSpec:
    """Declarative description of a benchmark batch."""

    model_source: object
    reduced_order: int
    horizons: tuple
    algorithms: tuple = ALGORITHMS
    tolerance: float = 1e-5
    max_iterations: int = 200
    seed: int = 0
    output_path: str = ""

    def __post_init__(self):
        horizons = tuple(float(t) for t in self.horizons)
        if not horizons:
            raise ValueError("at least one horizon is required")
        if any(t <= 0 for t in horizons):
            raise ValueError(f"horizons must be positive, got {horizons}")
        algorithms = tuple(str(a).lower() for a in self.algorithms)
        if not algorithms:
            raise ValueError("at least one algorithm is required")
        unknown = set(algorithms) - set(ALGORITHMS)
        if unknown:
            raise ValueError(f"unknown algorithms {sorted(unknown)}; valid: {ALGORITHMS}")
        object.__setattr__(self, "horizons", horizons)
        object.__setattr__(self, "algorithms", algorithms)

    @classmethod
    def from_file(cls, path):
        """Read a spec from a JSON file whose keys match the field names."""
        raw = json.loads(Path(path).read_text())
        known = {
            "model_source",
            "reduced_order",
            "horizons",
            "algorithms",
            "tolerance",
            "max_iterations",
            "seed",
            "output_path",
        }
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown spec keys {sorted(unknown)}; valid: {sorted(known)}")
        return cls(**raw)


@dataclass(frozen=True)
class ResultRow:
    """One (model, algorithm, horizon) outcome."""

    model: str
    algorithm: str
    tau: float
    order: int
    absolute_error: float
    relative_error: float
    iterations: int
    converged: bool
    max_right_residual: float
    max_left_residual: float
    max_bitangential_residual: float
    status: str = "ok"
    detail: str = ""
    wall_time_s: float = 0.0
    schema_version: str = SCHEMA_VERSION

    def to_mapping(self):
        data = asdict(self)
        return {key: data[key] for key in CSV_COLUMNS}

    @classmethod
    def from_mapping(cls, mapping):
        return cls(
            model=str(mapping["model"]),
            algorithm=str(mapping["algorithm"]),
            tau=float(mapping["tau"]),
            order=int(mapping["order"]),
            absolute_error=float(mapping["absolute_error"]),
            relative_error=float(mapping["relative_error"]),
            iterations=int(mapping["iterations"]),
            converged=_parse_bool(mapping["converged"]),
            max_right_residual=float(mapping["max_right_residual"]),
            max_left_residual=float(mapping["max_left_residual"]),
            max_bitangential_residual=float(mapping["max_bitangential_residual"]),
            status=str(mapping["status"]),
            detail=str(mapping.get("detail", "")),
            wall_time_s=float(mapping.get("wall_time_s", 0.0)),
            schema_version=str(mapping.get("schema_version", SCHEMA_VERSION)),
        )


def _parse_bool(value):
    if isinstance(value, bool):
        return value
    return str(value).strip().lower() in ("true", "1", "yes")


def _fmt(value):
    """Deterministic text form for table cells."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.17g}"
    return str(value)


def _run_algorithm(algorithm, system, order, tau, tol, max_iter, seed, irka_cache):
    """Dispatch one reduction; returns (model, iterations, converged, detail)."""
    if algorithm == "irka":
        if "model" not in irka_cache:
            model, trace = irka(system, order, tol=tol, max_iter=max_iter, seed=seed)
            irka_cache.update(model=model, trace=trace)
        return irka_cache["model"], irka_cache["trace"].n_iterations, True, ""
    if algorithm == "lt-irka":
        model, trace = lt_irka(system, order, tau, tol=tol, max_iter=max_iter, seed=seed)
        return model, trace.n_iterations, True, ""
    if algorithm == "tl-tsia":
        if "model" not in irka_cache:
            model, trace = irka(system, order, tol=tol, max_iter=max_iter, seed=seed)
            irka_cache.update(model=model, trace=trace)
        model, trace = tl_tsia(
            system, order, tau, tol=tol, max_iter=max_iter, seed=seed,
            initial=irka_cache["model"],
        )
        return model, trace.n_iterations, True, ""
    raise ValueError(f"unknown algorithm {algorithm!r}")


def run_single(system, algorithm, order, tau, tol=1e-5, max_iter=200, seed=0,
               irka_cache=None):
    """Run one algorithm at one horizon and assemble a ResultRow.

    Driver failures are captured in the row (status ``failed``); when a
    best-so-far model is available its error metrics are still reported.
    Returns ``(row, model_or_None, trajectory_or_None)``.
    """
    irka_cache = {} if irka_cache is None else irka_cache
    started = time.perf_counter()
    model = None
    status, detail = "ok", ""
    iterations, converged = 0, False
    try:
        model, iterations, converged, detail = _run_algorithm(
            algorithm, system, order, tau, tol, max_iter, seed, irka_cache
        )
    except NoConvergence as exc:
        status, detail = "failed", f"no convergence: {exc}"
        model = exc.best_model
        iterations = exc.trace.n_iterations if exc.trace is not None else max_iter
    except MortauError as exc:
        status, detail = "failed", f"{type(exc).__name__}: {exc}"
        model = getattr(exc, "best_model", None)
        trace = getattr(exc, "trace", None)
        iterations = trace.n_iterations if trace is not None else 0
    wall = time.perf_counter() - started

    nan = float("nan")
    absolute = relative = max_rt = max_lt = max_d = nan
    trajectory = None
    if model is not None:
        err = h2tau_error(system, model, tau)
        absolute, relative = err.absolute, err.relative
        residuals = optimality_residuals(system, model, tau)
        max_rt, max_lt, max_d = residuals.summary()
        trajectory = error_trajectory(system, model, tau)
    row = ResultRow(
        model=system.label or "system",
        algorithm=algorithm,
        tau=float(tau),
        order=int(order),
        absolute_error=absolute,
        relative_error=relative,
        iterations=int(iterations),
        converged=bool(converged and status == "ok"),
        max_right_residual=max_rt,
        max_left_residual=max_lt,
        max_bitangential_residual=max_d,
        status=status,
        detail=detail,
        wall_time_s=wall,
    )
    return row, model, trajectory


def run_benchmark(spec, system=None):
    """Run a full benchmark spec; one row per (algorithm, horizon).

    A failing run never aborts the batch: its row records the failure and
    the remaining runs proceed.  When ``spec.output_path`` is set, writes
    ``results.csv``, ``results.json``, and per-run trajectory files there.
    """
    if system is None:
        system = load_model(spec.model_source)
    rows = []
    trajectories = {}
    irka_cache = {}
    for algorithm in spec.algorithms:
        for tau in spec.horizons:
            row, model, trajectory = run_single(
                system, algorithm, spec.reduced_order, tau,
                tol=spec.tolerance, max_iter=spec.max_iterations,
                seed=spec.seed, irka_cache=irka_cache,
            )
            rows.append(row)
            if trajectory is not None:
                trajectories[(algorithm, tau)] = trajectory
    if spec.output_path:
        out = Path(spec.output_path)
        out.mkdir(parents=True, exist_ok=True)
        write_rows_csv(rows, out / "results.csv")
        write_rows_json(rows, out / "results.json")
        for (algorithm, tau), (ts, values) in trajectories.items():
            name = f"trajectory__{system.label or 'system'}__{algorithm}__tau{tau:g}.csv"
            write_trajectory(out / name, ts, values)
    return rows


def write_rows_csv(rows, path):
    path = Path(path)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            mapping = row.to_mapping()
            writer.writerow([_fmt(mapping[col]) for col in CSV_COLUMNS])
    return path


def read_rows_csv(path):
    with open(path, newline="") as handle:
        return [ResultRow.from_mapping(record) for record in csv.DictReader(handle)]


def write_rows_json(rows, path):
    path = Path(path)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "rows": [
            {key: (None if _is_nan(value) else value) for key, value in row.to_mapping().items()}
            for row in rows
        ],
    }
    path.write_text(json.dumps(payload, indent=2) + "\n")
    return path


def _is_nan(value):
    return isinstance(value, float) and math.isnan(value)


def write_trajectory(path, ts, values):
    """Two-column (t, error_norm) file for plotting."""
    path = Path(path)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["t", "error_norm"])
        for t, v in zip(ts, values):
            writer.writerow([_fmt(float(t)), _fmt(float(v))])
    return path


def format_row(row):
    """Human-readable one-line summary of a result row."""
    return (
        f"{row.model:<12} {row.algorithm:<8} tau={row.tau:<8g} r={row.order:<4d} "
        f"rel_err={row.relative_error:.3e} abs_err={row.absolute_error:.3e} "
        f"iters={row.iterations:<4d} converged={str(row.converged).lower():<5} "
        f"residuals(max rt/lt/d)={row.max_right_residual:.2e}/"
        f"{row.max_left_residual:.2e}/{row.max_bitangential_residual:.2e} "
        f"[{row.status}]"
    )
