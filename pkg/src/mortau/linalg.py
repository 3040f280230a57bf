"""Dense linear-algebra kernels.

Shifted resolvent solves, matrix exponentials and their actions,
small nonsymmetric eigendecompositions, finite-horizon Gramians via a
block exponential, and rank-controlled orthonormalization.  Everything
here is dense and aimed at state dimensions up to roughly a thousand.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lu_factor, lu_solve

from .exceptions import NonDiagonalizable, OverflowRisk, SingularShift
from .validation import as_matrix, as_square_matrix

__all__ = [
    "DEFAULT_OVERFLOW_BOUND",
    "EigenDecomposition",
    "HorizonCache",
    "OrthonormalBasis",
    "ShiftedSolver",
    "eigendecompose",
    "exp_action",
    "matrix_exponential",
    "orthonormal_basis",
    "shifted_solve",
    "vanloan_limited_gramian",
]

#: Exponent bound above which e^M is treated as an overflow risk (e^700 ~ 1e304).
DEFAULT_OVERFLOW_BOUND = 700.0

# Horizon-splitting bound for the Gramian integral: each block exponential
# covers a sub-horizon with |spectral range| * dt below this, which keeps the
# internal e^{-A*dt} factors small enough not to wash out the result.
_GRAMIAN_CHUNK_EXPONENT = 25.0

# log of the smallest/largest doubles worth distinguishing in scalar*matrix products.
_LOG_TINY = -708.0
_LOG_HUGE = 705.0


class ShiftedSolver:
    """LU factorization of sigma*I - A, reusable across right-hand sides.

    Raises ``SingularShift`` when the factorization exposes a pivot below a
    machine-scaled threshold, i.e. when sigma sits on the spectrum of A.
    """

    def __init__(self, a, sigma):
        a = as_square_matrix(a, "A")
        n = a.shape[0]
        sigma = complex(sigma)
        if sigma.imag == 0.0:
            shifted = sigma.real * np.eye(n) - a
        else:
            shifted = sigma * np.eye(n, dtype=complex) - a
        self.shape = shifted.shape
        self._lu, self._piv = lu_factor(shifted, check_finite=False)
        pivots = np.abs(np.diagonal(self._lu))
        tol = n * np.finfo(float).eps * max(1.0, float(np.abs(shifted).max()))
        if not np.all(pivots > tol):
            raise SingularShift(
                f"shift {sigma} is numerically on the spectrum (pivot {pivots.min():.3e})"
            )

    def solve(self, rhs):
        """Solve (sigma*I - A) X = rhs."""
        return lu_solve((self._lu, self._piv), np.asarray(rhs), check_finite=False)

    def solve_transposed(self, rhs):
        """Solve (sigma*I - A)^T X = rhs, i.e. a shifted solve with A^T."""
        return lu_solve((self._lu, self._piv), np.asarray(rhs), trans=1, check_finite=False)


def shifted_solve(a, sigma, rhs):
    """Solve (sigma*I - A) X = rhs for dense A and block right-hand side."""
    rhs = np.asarray(rhs)
    return ShiftedSolver(a, sigma).solve(rhs)


def _exponent_bound_check(m, overflow_bound):
    """Raise OverflowRisk when e^M may exceed double range.

    Three stages, cheapest first: the 1-norm bound ||e^M|| <= e^{||M||},
    a Gershgorin bound on the numerical abscissa, and finally the exact
    largest eigenvalue of the Hermitian part (log-norm bound).
    """
    norm1 = float(np.abs(m).sum(axis=0).max())
    if norm1 <= overflow_bound:
        return
    herm = (m + m.conj().T).real / 2.0
    diag = np.diagonal(herm)
    radii = np.abs(herm).sum(axis=1) - np.abs(diag)
    if float((diag + radii).max()) <= overflow_bound:
        return
    abscissa = float(sla.eigvalsh(herm)[-1])
    if abscissa > overflow_bound:
        raise OverflowRisk(
            f"matrix exponential abscissa {abscissa:.3g} exceeds bound {overflow_bound:.3g}"
        )


def matrix_exponential(m, overflow_bound=DEFAULT_OVERFLOW_BOUND):
    """e^M by scaling-and-squaring with diagonal Pade approximants.

    Parameters
    ----------
    m : (n, n) array_like
        Real or complex square matrix.
    overflow_bound : float
        Bound on the exponent scale; exceeding it raises ``OverflowRisk``
        and signals the caller to switch to a shifted combined form.
    """
    m = as_square_matrix(m, "M")
    _exponent_bound_check(m, overflow_bound)
    if not np.any(m):
        return np.eye(m.shape[0], dtype=m.dtype)
    out = sla.expm(m)
    if not np.all(np.isfinite(out)):
        raise OverflowRisk("matrix exponential overflowed despite bound check")
    return out


def exp_action(a, tau, b, overflow_bound=DEFAULT_OVERFLOW_BOUND):
    """e^{A*tau} B via the dense matrix exponential."""
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau}")
    b = np.asarray(b)
    a = as_square_matrix(a, "A")
    return matrix_exponential(a * tau, overflow_bound) @ b


class HorizonCache:
    """Shared e^{A*tau} for repeated shifted-exponential actions at one horizon.

    ``shifted_action`` evaluates e^{(A - sigma*I)*tau} X.  When the scalar
    factor e^{-sigma*tau} and the product stay comfortably inside double
    range this is done as e^{-sigma*tau} * (e^{A*tau} X), reusing the cached
    exponential (the two forms agree because sigma*I commutes with A).
    Outside that range the combined exponential e^{(A - sigma*I)*tau} is
    evaluated directly, which stays balanced when the factors would
    individually under- or overflow.
    """

    def __init__(self, a, tau, overflow_bound=DEFAULT_OVERFLOW_BOUND):
        self.a = as_square_matrix(a, "A")
        self.tau = float(tau)
        self.overflow_bound = overflow_bound
        self._exp = None
        self._exp_failed = False

    @property
    def exp_a_tau(self):
        """Cached e^{A*tau}; raises OverflowRisk if it is not representable."""
        if self._exp_failed:
            raise OverflowRisk("e^{A*tau} not representable for this horizon")
        if self._exp is None:
            try:
                self._exp = matrix_exponential(self.a * self.tau, self.overflow_bound)
            except OverflowRisk:
                self._exp_failed = True
                raise
        return self._exp

    def _cached_exp(self):
        try:
            return self.exp_a_tau
        except OverflowRisk:
            return None

    def shifted_action(self, sigma, x, transpose=False):
        """e^{(A - sigma*I)*tau} X, or with A^T when ``transpose``."""
        x = np.asarray(x)
        sigma = complex(sigma)
        exp_at = self._cached_exp()
        if exp_at is not None:
            w = (exp_at.T if transpose else exp_at) @ x
            peak = float(np.abs(w).max()) if w.size else 0.0
            zr = -sigma.real * self.tau
            if peak == 0.0 or zr + np.log(peak) < _LOG_TINY:
                # correction underflows double precision entirely
                return np.zeros_like(w)
            if abs(zr) <= _LOG_HUGE and zr + np.log(peak) <= _LOG_HUGE:
                scale = np.exp(-sigma * self.tau)
                if sigma.imag == 0.0:
                    scale = scale.real
                return scale * w
        base = self.a.T if transpose else self.a
        shifted = (base - sigma * np.eye(base.shape[0])) * self.tau
        return matrix_exponential(shifted, self.overflow_bound) @ x


@dataclass(frozen=True)
class EigenDecomposition:
    """Spectral factorization M = R diag(values) R^{-1}, eigenvalues sorted by (Re, Im)."""

    values: np.ndarray
    right_vectors: np.ndarray
    inverse_right_vectors: np.ndarray


def eigendecompose(m, cond_limit=1e12):
    """Eigendecomposition of a small dense matrix, sorted lexicographically.

    Raises ``NonDiagonalizable`` when the eigenvector matrix condition
    number exceeds ``cond_limit``, which flags a defective or
    near-defective input.
    """
    m = as_square_matrix(m, "M")
    values, vectors = sla.eig(m)
    order = np.lexsort((values.imag, values.real))
    values = values[order]
    vectors = vectors[:, order]
    condition = np.linalg.cond(vectors)
    if not np.isfinite(condition) or condition > cond_limit:
        raise NonDiagonalizable(
            f"eigenvector matrix condition {condition:.3e} exceeds {cond_limit:.1e}",
            condition=condition,
        )
    return EigenDecomposition(values, vectors, np.linalg.inv(vectors))


def _symmetric_scale_bound(a):
    """Cheap upper bound on the spectral range of the symmetric part of A."""
    sym = (a + a.T) / 2.0
    return float(np.abs(sym).sum(axis=1).max())


def vanloan_limited_gramian(a, b, tau, overflow_bound=DEFAULT_OVERFLOW_BOUND):
    """Finite-horizon controllability Gramian integral(0..tau) e^{At} B B^T e^{A^T t} dt.

    Computed from the block exponential exp(dt * [[-A, BB^T], [0, A^T]])
    as F22^T F12, which avoids any Lyapunov solve and handles unstable A.
    For horizons where the internal e^{-A*dt} factor would dwarf the
    result (very fast stable modes, or strong instability), the horizon is
    split and the chunks are accumulated with the composition identity
    P(t + dt) = e^{A dt} P(t) e^{A^T dt} + P(dt).
    """
    a = as_square_matrix(a, "A", allow_complex=False)
    b = as_matrix(b, "B", allow_complex=False)
    tau = float(tau)
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    n = a.shape[0]
    if b.shape[0] != n:
        raise ValueError(f"B must have {n} rows, got {b.shape[0]}")
    chunks = max(1, int(np.ceil(_symmetric_scale_bound(a) * tau / _GRAMIAN_CHUNK_EXPONENT)))
    dt = tau / chunks
    block = np.block([[-a, b @ b.T], [np.zeros((n, n)), a.T]])
    f = matrix_exponential(block * dt, overflow_bound)
    p = f[n:, n:].T @ f[:n, n:]
    p = (p + p.T) / 2.0
    if chunks > 1:
        step = f[n:, n:].T  # e^{A dt}
        acc = p
        for _ in range(chunks - 1):
            acc = step @ acc @ step.T + p
            acc = (acc + acc.T) / 2.0
        p = acc
    if not np.all(np.isfinite(p)):
        raise OverflowRisk("limited Gramian overflowed double precision")
    return p


@dataclass(frozen=True)
class OrthonormalBasis:
    """Orthonormal basis with a per-input-column retention report."""

    matrix: np.ndarray
    retained: np.ndarray

    @property
    def rank(self):
        return self.matrix.shape[1]


def orthonormal_basis(m, rtol=1e-10):
    """Orthonormal basis of the numerical column span of M.

    Columns whose pivoted-QR diagonal falls below ``rtol`` times the largest
    one are dropped; the returned report marks which input columns were kept.
    """
    m = as_matrix(m, "M")
    n, r = m.shape
    if n < r:
        raise ValueError(f"expected a tall matrix, got shape {m.shape}")
    q, rmat, piv = sla.qr(m, mode="economic", pivoting=True)
    diag = np.abs(np.diagonal(rmat))
    if diag.size == 0 or diag[0] == 0.0:
        rank = 0
    else:
        rank = int(np.count_nonzero(diag > rtol * diag[0]))
    retained = np.zeros(r, dtype=bool)
    retained[piv[:rank]] = True
    return OrthonormalBasis(q[:, :rank], retained)
