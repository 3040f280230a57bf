"""Reduction drivers: fixed-point rational Krylov iterations and the
Sylvester-based two-sided iteration, with shared convergence logic.

Each driver repeats project-then-reflect: build right/left spaces from the
current interpolation data, project, and reset the data to the reflected
poles and residue directions of the new reduced matrix, until the sorted
shift set stops moving.  The two-sided variant instead solves a pair of
finite-horizon Sylvester equations per sweep and projects with their
solutions; its converged spans coincide with the rational Krylov spans.

Drivers are exposed both as plain functions and as scikit-learn style
estimators (hyperparameters in the constructor, ``fit`` on a system,
fitted artifacts in trailing-underscore attributes).
"""

import inspect
import time
from dataclasses import dataclass

import numpy as np

from .exceptions import (
    DimensionMismatch,
    IllConditionedProjection,
    InvalidInterpolationData,
    NoConvergence,
    NonDiagonalizable,
    OverflowRisk,
    RankCollapse,
    SingularShift,
    SylvesterFailure,
)
from .linalg import HorizonCache, ShiftedSolver, eigendecompose, matrix_exponential
from .projection import (
    InterpolationData,
    build_standard_spaces,
    build_time_limited_spaces,
    petrov_galerkin,
    _oblique_reduce,
)
from .systems import ReducedModel, StateSpaceSystem

__all__ = [
    "IRKA",
    "IterationRecord",
    "IterationTrace",
    "LTIRKA",
    "TLTSIA",
    "irka",
    "lt_irka",
    "random_interpolation_data",
    "shift_change_metric",
    "tl_tsia",
]

_SYLVESTER_RESIDUAL_RTOL = 1e-8

_RECOVERABLE = (
    RankCollapse,
    IllConditionedProjection,
    NonDiagonalizable,
    SingularShift,
    InvalidInterpolationData,
    SylvesterFailure,
    OverflowRisk,
)


@dataclass(frozen=True)
class IterationRecord:
    """One sweep of a reduction driver."""

    index: int
    shifts: np.ndarray
    shift_change: float
    projection_condition: float
    wall_time_s: float


@dataclass(frozen=True)
class IterationTrace:
    """Per-iteration records plus the final status of a driver run."""

    records: tuple
    status: str  # 'converged' | 'max_iterations' | 'failed'
    reason: str = ""

    @property
    def n_iterations(self):
        return len(self.records)

    @property
    def final_change(self):
        return self.records[-1].shift_change if self.records else float("inf")

    @property
    def converged(self):
        return self.status == "converged"

    @property
    def total_wall_time_s(self):
        return float(sum(rec.wall_time_s for rec in self.records))


def shift_change_metric(previous, current):
    """Relative 2-norm change between two shift sets after canonical sorting."""
    prev = np.atleast_1d(np.asarray(previous, dtype=complex))
    cur = np.atleast_1d(np.asarray(current, dtype=complex))
    if prev.shape != cur.shape:
        raise DimensionMismatch(f"shift sets differ in length: {prev.shape} vs {cur.shape}")
    prev = prev[np.lexsort((prev.imag, prev.real))]
    cur = cur[np.lexsort((cur.imag, cur.real))]
    denom = np.linalg.norm(prev)
    diff = np.linalg.norm(cur - prev)
    if denom == 0.0:
        return 0.0 if diff == 0.0 else float("inf")
    return float(diff / denom)


def random_interpolation_data(order, n_inputs, n_outputs, rng):
    """Random conjugate-closed starting data.

    Shift moduli are log-uniform over [1e-1, 1e3]; conjugate pairs get a
    uniform angle in (0, pi/2) so every shift starts in the open right
    half-plane, where resolvents of stable systems are well conditioned.
    Directions are real unit vectors, shared inside each pair.
    """
    n_pairs, n_real = divmod(order, 2)
    shifts = np.empty(order, dtype=complex)
    right = np.empty((order, n_inputs), dtype=complex)
    left = np.empty((order, n_outputs), dtype=complex)

    def unit(k):
        v = rng.standard_normal(k)
        norm = np.linalg.norm(v)
        while norm < 1e-12:
            v = rng.standard_normal(k)
            norm = np.linalg.norm(v)
        return v / norm

    pos = 0
    for _ in range(n_pairs):
        modulus = 10.0 ** rng.uniform(-1.0, 3.0)
        angle = rng.uniform(0.0, np.pi / 2.0)
        sigma = modulus * np.exp(1j * angle)
        b_dir, c_dir = unit(n_inputs), unit(n_outputs)
        for s in (sigma, np.conjugate(sigma)):
            shifts[pos] = s
            right[pos] = b_dir
            left[pos] = c_dir
            pos += 1
    for _ in range(n_real):
        shifts[pos] = 10.0 ** rng.uniform(-1.0, 3.0)
        right[pos] = unit(n_inputs)
        left[pos] = unit(n_outputs)
        pos += 1
    return InterpolationData(shifts, right, left)


def _resolve_initial_data(system, order, init, seed):
    if isinstance(init, InterpolationData):
        if init.order != order:
            raise DimensionMismatch(
                f"initial data has {init.order} shifts, expected {order}"
            )
        return init
    if isinstance(init, ReducedModel):
        if init.order != order:
            raise DimensionMismatch(
                f"initial model has order {init.order}, expected {order}"
            )
        return InterpolationData.from_reduced_model(init)
    if init == "random":
        rng = np.random.default_rng(seed)
        return random_interpolation_data(order, system.n_inputs, system.n_outputs, rng)
    raise ValueError(f"unsupported initialization {init!r}")


def _validate_run(system, order, tol, max_iter):
    if not isinstance(system, StateSpaceSystem):
        raise TypeError(f"expected a StateSpaceSystem, got {type(system).__name__}")
    if not 1 <= order <= system.order:
        raise ValueError(f"order must lie in [1, {system.order}], got {order}")
    if tol <= 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be at least 1, got {max_iter}")


def _attach_failure(exc, iteration, records, best_model):
    exc.iteration = iteration
    exc.trace = IterationTrace(tuple(records), "failed", reason=f"iteration {iteration}: {exc}")
    exc.best_model = best_model
    return exc


def _reflection_data(model):
    """Reflected poles and residue directions of a reduced model."""
    dec = eigendecompose(model.a)
    right = dec.inverse_right_vectors @ model.b
    left = (model.c @ dec.right_vectors).T
    return dec, InterpolationData(-dec.values, right, left)


def _projection_iteration(system, data0, tau, tol, max_iter, limited):
    cache = HorizonCache(system.a, tau) if limited else None
    data = data0
    prev_shifts = data.shifts
    records = []
    best_change = np.inf
    best_model = None
    for it in range(1, max_iter + 1):
        started = time.perf_counter()
        try:
            if limited:
                pair = build_time_limited_spaces(system, data, tau, cache)
            else:
                pair = build_standard_spaces(system, data)
            model = petrov_galerkin(system, pair)
            _, data = _reflection_data(model)
        except _RECOVERABLE as exc:
            raise _attach_failure(exc, it, records, best_model)
        change = shift_change_metric(prev_shifts, data.shifts)
        records.append(
            IterationRecord(
                index=it,
                shifts=np.sort_complex(data.shifts),
                shift_change=change,
                projection_condition=pair.reduction_condition(),
                wall_time_s=time.perf_counter() - started,
            )
        )
        if change < best_change:
            best_change, best_model = change, model
        if change <= tol:
            return model, IterationTrace(tuple(records), "converged"), data
        prev_shifts = data.shifts
    raise NoConvergence(
        f"no convergence after {max_iter} iterations (best change {best_change:.3e})",
        trace=IterationTrace(tuple(records), "max_iterations"),
        best_model=best_model,
    )


def lt_irka(system, order, tau, tol=1e-5, max_iter=200, seed=None, init="random"):
    """Horizon-restricted fixed-point reduction.

    Iterates projection onto the time-limited rational Krylov spaces and
    reflection of the reduced poles into new interpolation data until the
    sorted shift set moves by less than ``tol`` in relative 2-norm.

    Returns
    -------
    (ReducedModel, IterationTrace)

    Raises
    ------
    NoConvergence
        After ``max_iter`` sweeps; carries the trace and best-so-far model.
    """
    _validate_run(system, order, tol, max_iter)
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    data0 = _resolve_initial_data(system, order, init, seed)
    model, trace, _ = _projection_iteration(system, data0, tau, tol, max_iter, limited=True)
    return model, trace


def irka(system, order, tol=1e-5, max_iter=200, seed=None, init="random"):
    """Unrestricted fixed-point reduction (exact tangential interpolation).

    Same loop as ``lt_irka`` on the standard rational Krylov spaces; at a
    fixed point the reduced transfer function tangentially interpolates the
    full one at the reflected reduced poles.
    """
    _validate_run(system, order, tol, max_iter)
    data0 = _resolve_initial_data(system, order, init, seed)
    model, trace, _ = _projection_iteration(
        system, data0, tau=None, tol=tol, max_iter=max_iter, limited=False
    )
    return model, trace


def _tsia_projectors(system, model, dec, tau, cache):
    """Solve the two finite-horizon Sylvester equations column-wise.

    Diagonalizing the reduced matrix turns each equation into r shifted
    solves with the full matrix; the assembled solutions are real up to
    roundoff and are returned with their equation residuals.
    """
    a, b, c = system.a, system.b, system.c
    ah, bh, ch = model.a, model.b, model.c
    n, r = system.order, model.order
    lam = dec.values
    s_mat = dec.right_vectors
    s_inv = dec.inverse_right_vectors
    b_dirs = s_inv @ bh  # rows
    c_dirs = (ch @ s_mat).T  # rows
    shifts = -lam
    p_hat = np.empty((n, r), dtype=complex)
    q_hat = np.empty((n, r), dtype=complex)
    done = np.zeros(r, dtype=bool)
    for k in range(r):
        if done[k]:
            continue
        sigma = shifts[k]
        rhs_p = b @ b_dirs[k]
        rhs_q = c.T @ c_dirs[k]
        rhs_p = rhs_p - cache.shifted_action(sigma, rhs_p)
        rhs_q = rhs_q - cache.shifted_action(sigma, rhs_q, transpose=True)
        try:
            solver = ShiftedSolver(a, sigma)
        except SingularShift as exc:
            raise SylvesterFailure(f"column solve singular at shift {sigma}: {exc}")
        p_hat[:, k] = solver.solve(rhs_p)
        q_hat[:, k] = solver.solve_transposed(rhs_q)
        done[k] = True
        scale = max(1.0, abs(sigma))
        if abs(sigma.imag) > 1e-12 * scale:
            for j in range(k + 1, r):
                if not done[j] and abs(shifts[j] - np.conjugate(sigma)) <= 1e-10 * scale:
                    p_hat[:, j] = np.conjugate(p_hat[:, k])
                    q_hat[:, j] = np.conjugate(q_hat[:, k])
                    done[j] = True
                    break
    p = (p_hat @ s_mat.T).real
    q = (q_hat @ s_inv).real

    exp_at_b = cache.exp_a_tau @ b
    exp_aht_bh = matrix_exponential(ah * tau) @ bh
    res_p = np.linalg.norm(a @ p + p @ ah.T + b @ bh.T - exp_at_b @ exp_aht_bh.T)
    scale_p = max(np.linalg.norm(b @ bh.T), 1e-300)
    exp_at_ct = cache.exp_a_tau.T @ c.T
    ch_exp = ch @ matrix_exponential(ah * tau)
    res_q = np.linalg.norm(a.T @ q + q @ ah + c.T @ ch - exp_at_ct @ ch_exp)
    scale_q = max(np.linalg.norm(c.T @ ch), 1e-300)
    return p, q, res_p / scale_p, res_q / scale_q


def tl_tsia(system, order, tau, tol=1e-5, max_iter=200, seed=None, initial=None):
    """Two-sided iteration driven by finite-horizon Sylvester equations.

    Each sweep solves A P + P Ah^T + B Bh^T - e^{A tau} B Bh^T e^{Ah^T tau} = 0
    and its dual for Q, then projects with right basis P and left factor
    (Q^T P)^{-1} Q^T.  Initialization defaults to an unrestricted fixed-point
    run (``irka``) with the same seed.
    """
    _validate_run(system, order, tol, max_iter)
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    if initial is None:
        initial, _ = irka(system, order, tol=tol, max_iter=max_iter, seed=seed)
    if initial.order != order:
        raise DimensionMismatch(f"initial model has order {initial.order}, expected {order}")
    cache = HorizonCache(system.a, tau)
    model = initial
    records = []
    best_change = np.inf
    best_model = None
    try:
        dec = eigendecompose(model.a)
    except NonDiagonalizable as exc:
        raise _attach_failure(exc, 0, records, None)
    prev_shifts = -dec.values
    for it in range(1, max_iter + 1):
        started = time.perf_counter()
        try:
            p, q, res_p, res_q = _tsia_projectors(system, model, dec, tau, cache)
            if max(res_p, res_q) > _SYLVESTER_RESIDUAL_RTOL:
                raise SylvesterFailure(
                    f"Sylvester residuals {res_p:.2e}/{res_q:.2e} exceed "
                    f"{_SYLVESTER_RESIDUAL_RTOL:.0e}"
                )
            a_r, b_r, c_r, condition = _oblique_reduce(system, p, q)
            label = f"{system.label or 'sys'}[r={order}]"
            model = ReducedModel(StateSpaceSystem(a_r, b_r, c_r, label=label), order=order)
            dec = eigendecompose(model.a)
        except _RECOVERABLE as exc:
            raise _attach_failure(exc, it, records, best_model)
        shifts = -dec.values
        change = shift_change_metric(prev_shifts, shifts)
        records.append(
            IterationRecord(
                index=it,
                shifts=np.sort_complex(shifts),
                shift_change=change,
                projection_condition=condition,
                wall_time_s=time.perf_counter() - started,
            )
        )
        if change < best_change:
            best_change, best_model = change, model
        if change <= tol:
            return model, IterationTrace(tuple(records), "converged")
        prev_shifts = shifts
    raise NoConvergence(
        f"no convergence after {max_iter} iterations (best change {best_change:.3e})",
        trace=IterationTrace(tuple(records), "max_iterations"),
        best_model=best_model,
    )


class BaseReducer:
    """Minimal scikit-learn style base: introspected params, fit artifacts."""

    @classmethod
    def _param_names(cls):
        signature = inspect.signature(cls.__init__)
        return [name for name in signature.parameters if name != "self"]

    def get_params(self, deep=True):
        return {name: getattr(self, name) for name in self._param_names()}

    def set_params(self, **params):
        valid = set(self._param_names())
        for key, value in params.items():
            if key not in valid:
                raise ValueError(f"invalid parameter {key!r} for {type(self).__name__}")
            setattr(self, key, value)
        return self

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.get_params().items())
        return f"{type(self).__name__}({args})"

    def _store_fit(self, model, trace):
        self.model_ = model
        self.trace_ = trace
        self.n_iterations_ = trace.n_iterations
        self.converged_ = trace.converged
        return self


class LTIRKA(BaseReducer):
    """Estimator form of :func:`lt_irka`.

    Parameters
    ----------
    order : int
        Reduced order r.
    tau : float
        Horizon end time.
    tol : float
        Relative shift-change tolerance.
    max_iter : int
        Sweep cap; exceeding it raises ``NoConvergence``.
    seed : int or None
        Seed for the random initial interpolation data.
    init : 'random' or InterpolationData or ReducedModel
        Starting point.

    Attributes
    ----------
    model_ : ReducedModel
    trace_ : IterationTrace
    n_iterations_ : int
    converged_ : bool
    """

    def __init__(self, order, tau, tol=1e-5, max_iter=200, seed=None, init="random"):
        self.order = order
        self.tau = tau
        self.tol = tol
        self.max_iter = max_iter
        self.seed = seed
        self.init = init

    def fit(self, system):
        model, trace = lt_irka(
            system,
            self.order,
            self.tau,
            tol=self.tol,
            max_iter=self.max_iter,
            seed=self.seed,
            init=self.init,
        )
        return self._store_fit(model, trace)


class IRKA(BaseReducer):
    """Estimator form of :func:`irka` (horizon-free baseline)."""

    def __init__(self, order, tol=1e-5, max_iter=200, seed=None, init="random"):
        self.order = order
        self.tol = tol
        self.max_iter = max_iter
        self.seed = seed
        self.init = init

    def fit(self, system):
        model, trace = irka(
            system,
            self.order,
            tol=self.tol,
            max_iter=self.max_iter,
            seed=self.seed,
            init=self.init,
        )
        return self._store_fit(model, trace)


class TLTSIA(BaseReducer):
    """Estimator form of :func:`tl_tsia`.

    ``initial=None`` seeds the sweep with an ``irka`` run using the same
    seed and tolerances.
    """

    def __init__(self, order, tau, tol=1e-5, max_iter=200, seed=None, initial=None):
        self.order = order
        self.tau = tau
        self.tol = tol
        self.max_iter = max_iter
        self.seed = seed
        self.initial = initial

    def fit(self, system):
        model, trace = tl_tsia(
            system,
            self.order,
            self.tau,
            tol=self.tol,
            max_iter=self.max_iter,
            seed=self.seed,
            initial=self.initial,
        )
        return self._store_fit(model, trace)
