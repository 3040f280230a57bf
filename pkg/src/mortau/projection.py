"""Rational Krylov projection spaces for finite-horizon interpolation.

The right space collects vectors (sigma_i I - A)^{-1}(I - e^{(A - sigma_i I) tau}) B b_i,
the left space the analogous vectors built on A^T and C^T c_i.  Conjugate
shift pairs are replaced by real and imaginary parts so the projected model
is exactly real, then both bases are orthonormalized (the reduced model is
invariant under basis changes inside the spans, and orthonormal bases keep
W^T V well behaved).

``verify_interpolation_errors`` evaluates, for each interpolation point, the
closed-form expressions for the right, left, and bi-tangential deviation of
the reduced horizon transfer function from the full one, alongside the
directly computed deviations.  The bi-tangential error is produced in two
independent decompositions (one obtained by differentiating the right-error
expansion, one the left-error expansion); both must agree with each other
and with the direct value.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    IllConditionedProjection,
    InvalidInterpolationData,
    RankCollapse,
)
from .linalg import HorizonCache, ShiftedSolver, matrix_exponential, orthonormal_basis
from .systems import ReducedModel, StateSpaceSystem, _limited_values

__all__ = [
    "InterpolationData",
    "ProjectionPair",
    "TangentialErrorCheck",
    "build_standard_spaces",
    "build_time_limited_spaces",
    "petrov_galerkin",
    "verify_interpolation_errors",
]

_SHIFT_MATCH_RTOL = 1e-8
_DUPLICATE_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class InterpolationData:
    """Shifts with paired right/left tangential directions.

    ``right_directions[i]`` (length m) and ``left_directions[i]`` (length p)
    belong to ``shifts[i]``.  Directions are unconjugated and apply via plain
    transposition.  The data must be closed under complex conjugation so a
    real basis exists, and no two conditions may coincide.
    """

    shifts: np.ndarray
    right_directions: np.ndarray
    left_directions: np.ndarray
    _partners: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        shifts = np.atleast_1d(np.asarray(self.shifts, dtype=complex))
        right = np.atleast_2d(np.asarray(self.right_directions, dtype=complex))
        left = np.atleast_2d(np.asarray(self.left_directions, dtype=complex))
        r = shifts.shape[0]
        if right.shape[0] != r or left.shape[0] != r:
            raise InvalidInterpolationData(
                f"need one right and one left direction per shift: "
                f"{r} shifts, {right.shape[0]} right, {left.shape[0]} left"
            )
        object.__setattr__(self, "shifts", shifts)
        object.__setattr__(self, "right_directions", right)
        object.__setattr__(self, "left_directions", left)
        object.__setattr__(self, "_partners", _pair_conjugates(shifts, right, left))
        _check_distinct(shifts, right, left)

    @property
    def order(self):
        return self.shifts.shape[0]

    @classmethod
    def from_pole_residue(cls, form):
        """Reflect poles into shifts, keeping the residue directions."""
        return cls(-form.poles, form.right_directions, form.left_directions)

    @classmethod
    def from_reduced_model(cls, model):
        from .systems import pole_residue

        return cls.from_pole_residue(pole_residue(model))


def _is_real_shift(sigma):
    return abs(sigma.imag) <= 1e-12 * max(1.0, abs(sigma))


def _is_real_direction(vec):
    scale = max(float(np.abs(vec).max()), 1e-300)
    return float(np.abs(vec.imag).max()) <= _SHIFT_MATCH_RTOL * scale


def _pair_conjugates(shifts, right, left):
    """Match conjugate conditions; partner index per entry, -1 for self-conjugate."""
    r = shifts.shape[0]
    partners = np.full(r, -2, dtype=int)
    for i in range(r):
        if partners[i] != -2:
            continue
        s = shifts[i]
        if _is_real_shift(s) and _is_real_direction(right[i]) and _is_real_direction(left[i]):
            partners[i] = -1
            continue
        scale = max(1.0, abs(s))
        found = False
        for j in range(i + 1, r):
            if partners[j] != -2:
                continue
            if (
                abs(shifts[j] - np.conjugate(s)) <= _SHIFT_MATCH_RTOL * scale
                and _close(right[j], np.conjugate(right[i]))
                and _close(left[j], np.conjugate(left[i]))
            ):
                partners[i] = j
                partners[j] = i
                found = True
                break
        if not found:
            raise InvalidInterpolationData(
                f"shift {s} has no conjugate partner; interpolation data must be "
                "closed under conjugation to admit a real basis"
            )
    return partners


def _close(x, y):
    scale = max(np.abs(x).max(), np.abs(y).max(), 1.0)
    return np.abs(x - y).max() <= _SHIFT_MATCH_RTOL * scale


def _check_distinct(shifts, right, left):
    r = shifts.shape[0]
    for i in range(r):
        for j in range(i + 1, r):
            scale = max(1.0, abs(shifts[i]))
            if abs(shifts[i] - shifts[j]) > _DUPLICATE_RTOL * scale:
                continue
            same_right = np.abs(right[i] - right[j]).max() <= _DUPLICATE_RTOL * max(
                1.0, np.abs(right[i]).max()
            )
            same_left = np.abs(left[i] - left[j]).max() <= _DUPLICATE_RTOL * max(
                1.0, np.abs(left[i]).max()
            )
            if same_right and same_left:
                raise InvalidInterpolationData(
                    f"shifts {i} and {j} coincide with identical directions"
                )


@dataclass(frozen=True, eq=False)
class ProjectionPair:
    """Real orthonormal right/left bases spanning the interpolation spaces."""

    v: np.ndarray
    w: np.ndarray
    v_retained: np.ndarray
    w_retained: np.ndarray

    @property
    def order(self):
        return self.v.shape[1]

    def reduction_condition(self):
        """Condition number of W^T V governing the oblique projection."""
        return float(np.linalg.cond(self.w.T @ self.v))


def _realify(columns, is_pair):
    """Conjugate-pair representatives contribute (Re, Im); real shifts just Re."""
    out = []
    for col, paired in zip(columns, is_pair):
        out.append(col.real)
        if paired:
            out.append(col.imag)
    return np.column_stack(out)


def _build_spaces(system, data, column_rhs):
    """Common core: solve per unique shift, realify, orthonormalize."""
    a = system.a
    r = data.order
    cols_v, cols_w = [], []
    is_pair = []
    consumed = np.zeros(r, dtype=bool)
    for i in range(r):
        if consumed[i]:
            continue
        sigma = data.shifts[i]
        rhs_v, rhs_w = column_rhs(sigma, data.right_directions[i], data.left_directions[i])
        solver = ShiftedSolver(a, sigma)
        cols_v.append(solver.solve(rhs_v))
        cols_w.append(solver.solve_transposed(rhs_w))
        is_pair.append(data._partners[i] >= 0)
        if data._partners[i] >= 0:
            consumed[data._partners[i]] = True
        consumed[i] = True
    v_raw = _realify(cols_v, is_pair)
    w_raw = _realify(cols_w, is_pair)
    basis_v = orthonormal_basis(v_raw)
    basis_w = orthonormal_basis(w_raw)
    if basis_v.rank < r or basis_w.rank < r:
        raise RankCollapse(
            f"projection spaces lost rank: kept {basis_v.rank} right / "
            f"{basis_w.rank} left of {r}",
            retained_rank=min(basis_v.rank, basis_w.rank),
        )
    return ProjectionPair(basis_v.matrix, basis_w.matrix, basis_v.retained, basis_w.retained)


def build_time_limited_spaces(system, data, tau, cache=None):
    """Right/left spaces for horizon-restricted tangential interpolation.

    Column i of the right space solves
    (sigma_i I - A) v = (I - e^{(A - sigma_i I) tau}) B b_i; the left space
    uses A^T and C^T c_i.  The exponential correction is evaluated in its
    combined shifted form, which stays balanced for shifts deep in the
    right half-plane.
    """
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    if cache is None:
        cache = HorizonCache(system.a, tau)

    def column_rhs(sigma, b_dir, c_dir):
        rv = system.b @ b_dir
        rw = system.c.T @ c_dir
        return rv - cache.shifted_action(sigma, rv), rw - cache.shifted_action(
            sigma, rw, transpose=True
        )

    return _build_spaces(system, data, column_rhs)


def build_standard_spaces(system, data):
    """Unrestricted rational Krylov spaces (exact tangential interpolation)."""

    def column_rhs(sigma, b_dir, c_dir):
        return system.b @ b_dir, system.c.T @ c_dir

    return _build_spaces(system, data, column_rhs)


def petrov_galerkin(system, pair, cond_limit=1e12):
    """Oblique projection (W^T V)^{-1} W^T A V, (W^T V)^{-1} W^T B, C V."""
    a_r, b_r, c_r, _ = _oblique_reduce(system, pair.v, pair.w, cond_limit=cond_limit)
    label = f"{system.label or 'sys'}[r={pair.order}]"
    reduced = StateSpaceSystem(a_r, b_r, c_r, label=label)
    return ReducedModel(reduced, order=pair.order, realified=True)


def _oblique_reduce(system, v, w, cond_limit=1e12):
    gram = w.T @ v
    condition = float(np.linalg.cond(gram))
    if not np.isfinite(condition) or condition >= cond_limit:
        raise IllConditionedProjection(
            f"cond(W^T V) = {condition:.3e} exceeds {cond_limit:.1e}; "
            "left and right spaces are nearly orthogonal",
            condition=condition,
        )
    zt = np.linalg.solve(gram, w.T)
    return zt @ (system.a @ v), zt @ system.b, system.c @ v, condition


@dataclass(frozen=True, eq=False)
class TangentialErrorCheck:
    """Direct vs closed-form interpolation deviations at one shift.

    ``bitangential_right_split`` and ``bitangential_left_split`` are the two
    closed-form decompositions of the same derivative deviation; they must
    agree with each other and with ``bitangential_direct``.
    """

    shift: complex
    right_direct: np.ndarray
    right_formula: np.ndarray
    left_direct: np.ndarray
    left_formula: np.ndarray
    bitangential_direct: complex
    bitangential_right_split: complex
    bitangential_left_split: complex
    right_scale: float
    left_scale: float
    bitangential_scale: float

    def discrepancies(self, floor_factor=1e-12):
        """Relative mismatches of each direct/closed-form pairing."""
        return {
            "right": _pair_discrepancy(
                self.right_direct, self.right_formula, floor_factor * self.right_scale
            ),
            "left": _pair_discrepancy(
                self.left_direct, self.left_formula, floor_factor * self.left_scale
            ),
            "bitangential_right_split": _pair_discrepancy(
                self.bitangential_direct,
                self.bitangential_right_split,
                floor_factor * self.bitangential_scale,
            ),
            "bitangential_left_split": _pair_discrepancy(
                self.bitangential_direct,
                self.bitangential_left_split,
                floor_factor * self.bitangential_scale,
            ),
            "split_consistency": _pair_discrepancy(
                self.bitangential_right_split,
                self.bitangential_left_split,
                floor_factor * self.bitangential_scale,
            ),
        }

    def max_discrepancy(self, floor_factor=1e-12):
        return max(self.discrepancies(floor_factor).values())


def _pair_discrepancy(x, y, floor):
    nx = np.linalg.norm(np.atleast_1d(x))
    ny = np.linalg.norm(np.atleast_1d(y))
    scale = max(nx, ny)
    if scale <= floor:
        return 0.0
    return float(np.linalg.norm(np.atleast_1d(x - y)) / scale)


def verify_interpolation_errors(system, model, pair, data, tau):
    """Per-shift closed-form vs direct interpolation deviations.

    Returns one ``TangentialErrorCheck`` per interpolation condition,
    including both conjugate partners.
    """
    a, b, c = system.a, system.b, system.c
    ah, bh, ch = model.a, model.b, model.c
    n = a.shape[0]
    r = model.order
    eye_n = np.eye(n)
    eye_r = np.eye(r)
    gram = pair.w.T @ pair.v
    zt = np.linalg.solve(gram, pair.w.T)
    pi = pair.v @ zt
    exp_at = matrix_exponential(a * tau)
    exp_api = matrix_exponential(a @ pi * tau)
    exp_pia = matrix_exponential(pi @ a * tau)
    cache_full = HorizonCache(system.a, tau)
    cache_red = HorizonCache(ah, tau)
    checks = []
    for i in range(data.order):
        sigma = data.shifts[i]
        b_dir = data.right_directions[i]
        c_dir = data.left_directions[i]
        solver = ShiftedSolver(a, sigma)
        solver_r = ShiftedSolver(ah, sigma)
        g, gp = _limited_values(system, solver, cache_full, sigma, tau)
        gh, ghp = _limited_values(model.system, solver_r, cache_red, sigma, tau)
        prefactor = np.exp(-sigma * tau)

        right_direct = (g - gh) @ b_dir
        mism_right = (exp_api - exp_at) @ (b @ b_dir)
        right_formula = prefactor * (c @ pair.v @ solver_r.solve(zt @ mism_right))

        left_direct = c_dir @ (g - gh)
        mism_left = c_dir @ (c @ (exp_pia - exp_at))
        left_formula = prefactor * (
            (mism_left @ pair.v) @ solver_r.solve(zt @ b)
        )

        bit_direct = c_dir @ (gp - ghp) @ b_dir

        shifted_r = sigma * eye_r - ah
        shifted_n = sigma * eye_n - a
        exp_minus = matrix_exponential(-tau * shifted_n)
        kernel = (tau * shifted_n + eye_n) @ exp_minus - eye_n
        proj_p = pair.v @ solver_r.solve(zt @ shifted_n)
        proj_q = shifted_n @ pair.v @ solver_r.solve(zt)

        rp1 = -prefactor * (
            c_dir
            @ (c @ pair.v)
            @ solver_r.solve(solver_r.solve((shifted_r * tau + eye_r) @ (zt @ mism_right)))
        )
        rp2 = prefactor * (
            c_dir
            @ (c @ exp_at)
            @ ((eye_n - proj_p) @ solver.solve(solver.solve(kernel @ (b @ b_dir))))
        )
        rq1 = -prefactor * (
            (mism_left @ pair.v)
            @ solver_r.solve(solver_r.solve((eye_r + tau * shifted_r) @ (zt @ (b @ b_dir))))
        )
        rq2 = prefactor * (
            c_dir
            @ (c @ kernel)
            @ solver.solve(solver.solve((eye_n - proj_q) @ (exp_at @ (b @ b_dir))))
        )

        checks.append(
            TangentialErrorCheck(
                shift=complex(sigma),
                right_direct=right_direct,
                right_formula=right_formula,
                left_direct=left_direct,
                left_formula=left_formula,
                bitangential_direct=complex(bit_direct),
                bitangential_right_split=complex(rp1 + rp2),
                bitangential_left_split=complex(rq1 + rq2),
                right_scale=float(np.linalg.norm(g @ b_dir)),
                left_scale=float(np.linalg.norm(c_dir @ g)),
                bitangential_scale=float(abs(c_dir @ gp @ b_dir)),
            )
        )
    return checks
