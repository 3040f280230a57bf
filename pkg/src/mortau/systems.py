"""State-space systems, reduced models, and finite-horizon transfer functions.

A system is the triple (A, B, C) of ``x' = A x + B u``, ``y = C x`` with zero
feedthrough.  The horizon-restricted impulse response ``g`` (``g(t) = C e^{At} B``
on [0, tau], zero afterwards) has Laplace transform

    G_tau(s) = G(s) - e^{-s*tau} C (sI - A)^{-1} e^{A*tau} B,

which this module evaluates together with its s-derivative.  The pole-residue
form of a reduced model pairs each pole ``lambda_k`` with a right direction
(row k of R^{-1} B) and a left direction (column k of C R); directions are kept
unconjugated, so they apply via plain transposition.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DimensionMismatch
from .linalg import HorizonCache, ShiftedSolver, eigendecompose, exp_action
from .validation import as_real_matrix

__all__ = [
    "PoleResidueForm",
    "ReducedModel",
    "StateSpaceSystem",
    "impulse_response",
    "pole_residue",
    "transfer",
    "transfer_limited",
    "transfer_limited_derivative",
]


def _freeze(arr):
    arr = arr.copy()
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class StateSpaceSystem:
    """Real LTI system (A, B, C) with implicit zero feedthrough.

    Arrays are validated, copied, and made read-only, so instances are
    safe to share across threads.
    """

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    label: str = ""

    def __post_init__(self):
        a = as_real_matrix(self.a, "A")
        b = as_real_matrix(self.b, "B")
        c = as_real_matrix(self.c, "C")
        if a.shape[0] != a.shape[1]:
            raise DimensionMismatch(f"A must be square, got {a.shape}")
        if b.shape[0] != a.shape[0]:
            raise DimensionMismatch(f"B must have {a.shape[0]} rows, got {b.shape[0]}")
        if c.shape[1] != a.shape[0]:
            raise DimensionMismatch(f"C must have {a.shape[0]} columns, got {c.shape[1]}")
        object.__setattr__(self, "a", _freeze(a))
        object.__setattr__(self, "b", _freeze(b))
        object.__setattr__(self, "c", _freeze(c))

    @property
    def order(self):
        return self.a.shape[0]

    @property
    def n_inputs(self):
        return self.b.shape[1]

    @property
    def n_outputs(self):
        return self.c.shape[0]

    def __repr__(self):
        tag = f" {self.label!r}" if self.label else ""
        return (
            f"StateSpaceSystem(n={self.order}, m={self.n_inputs}, "
            f"p={self.n_outputs}{tag})"
        )


@dataclass(frozen=True, eq=False)
class ReducedModel:
    """An order-r projection of a larger system.

    ``realified`` records that the model was assembled from a real basis
    (conjugate basis columns replaced by real/imaginary parts), so its
    matrices are exactly real by construction.
    """

    system: StateSpaceSystem
    order: int = field(default=0)
    realified: bool = True

    def __post_init__(self):
        if self.order == 0:
            object.__setattr__(self, "order", self.system.order)
        if self.order != self.system.order:
            raise DimensionMismatch(
                f"declared order {self.order} != system order {self.system.order}"
            )

    @property
    def a(self):
        return self.system.a

    @property
    def b(self):
        return self.system.b

    @property
    def c(self):
        return self.system.c


@dataclass(frozen=True, eq=False)
class PoleResidueForm:
    """Pole-residue expansion g(t) = sum_k c_k b_k^T e^{lambda_k t}.

    ``right_directions[k]`` is b_k (length m) and ``left_directions[k]``
    is c_k (length p), both unconjugated; for a real model the triples are
    closed under complex conjugation.
    """

    poles: np.ndarray
    right_directions: np.ndarray
    left_directions: np.ndarray

    @property
    def order(self):
        return self.poles.shape[0]

    def impulse(self, t):
        """Evaluate the expansion at time t (complex result, ~real for real models)."""
        weights = np.exp(self.poles * t)
        return np.einsum("kp,km,k->pm", self.left_directions, self.right_directions, weights)


def transfer(system, s):
    """Transfer function C (sI - A)^{-1} B at the point s."""
    x = ShiftedSolver(system.a, s).solve(system.b)
    return system.c @ x


def transfer_limited(system, s, tau, cache=None):
    """Horizon-restricted transfer function at the point s.

    Evaluates C (sI - A)^{-1} (I - e^{(A - sI)*tau}) B; the combined
    exponential keeps the e^{-s*tau} e^{A*tau} factor balanced for shifts
    far into the right half-plane.
    """
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    if cache is None:
        cache = HorizonCache(system.a, tau)
    rhs = system.b - cache.shifted_action(s, system.b)
    return system.c @ ShiftedSolver(system.a, s).solve(rhs)


def transfer_limited_derivative(system, s, tau, cache=None):
    """d/ds of the horizon-restricted transfer function at s.

    Closed form: -C (sI-A)^{-2} B + (tau C (sI-A)^{-1} + C (sI-A)^{-2}) e^{(A-sI)tau} B.
    """
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    if cache is None:
        cache = HorizonCache(system.a, tau)
    solver = ShiftedSolver(system.a, s)
    _, deriv = _limited_values(system, solver, cache, s, tau)
    return deriv


def _limited_values(system, solver, cache, s, tau):
    """(G_tau(s), G_tau'(s)) sharing one factorization and one cached exponential."""
    b = system.b
    y = cache.shifted_action(s, b)  # e^{(A - sI) tau} B
    x1 = solver.solve(b - y)
    value = system.c @ x1
    r1 = solver.solve(b)
    r2 = solver.solve(r1)
    y1 = solver.solve(y)
    y2 = solver.solve(y1)
    deriv = system.c @ (-r2 + tau * y1 + y2)
    return value, deriv


def impulse_response(system, t):
    """g(t) = C e^{At} B for t >= 0."""
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    return system.c @ exp_action(system.a, t, system.b)


def pole_residue(model):
    """Pole-residue form of a reduced model via the eigendecomposition of A.

    With A = R diag(lambda) R^{-1}: right direction k is row k of R^{-1} B,
    left direction k is column k of C R.  Raises ``NonDiagonalizable`` for
    defective or near-defective A.
    """
    system = model.system if isinstance(model, ReducedModel) else model
    dec = eigendecompose(system.a)
    right = dec.inverse_right_vectors @ system.b  # (r, m)
    left = (system.c @ dec.right_vectors).T  # (r, p)
    return PoleResidueForm(dec.values, right, left)
