"""Input validation helpers shared across the package."""

import numpy as np

from .exceptions import DimensionMismatch

__all__ = ["as_matrix", "as_square_matrix", "as_real_matrix", "as_vector", "check_finite"]


def check_finite(arr, name="array"):
    if not np.all(np.isfinite(arr)):
        raise DimensionMismatch(f"{name} contains non-finite entries")
    return arr


def as_matrix(m, name="matrix", allow_complex=True):
    """Coerce to a 2-D ndarray with finite entries."""
    arr = np.atleast_2d(np.asarray(m))
    if arr.ndim != 2 or arr.size == 0:
        raise DimensionMismatch(f"{name} must be a nonempty 2-D array, got shape {arr.shape}")
    if np.iscomplexobj(arr):
        if not allow_complex:
            raise DimensionMismatch(f"{name} must be real")
        arr = arr.astype(np.complex128, copy=False)
    else:
        arr = arr.astype(np.float64, copy=False)
    return check_finite(arr, name)


def as_square_matrix(m, name="matrix", allow_complex=True):
    arr = as_matrix(m, name, allow_complex)
    if arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {arr.shape}")
    return arr


def as_real_matrix(m, name="matrix"):
    """Coerce to real float64; complex input is accepted only if its imaginary part is zero."""
    arr = np.atleast_2d(np.asarray(m))
    if arr.ndim != 2 or arr.size == 0:
        raise DimensionMismatch(f"{name} must be a nonempty 2-D array, got shape {arr.shape}")
    if np.iscomplexobj(arr):
        if np.any(arr.imag != 0):
            raise DimensionMismatch(f"{name} must be real")
        arr = arr.real
    arr = arr.astype(np.float64, copy=True)
    return check_finite(arr, name)


def as_vector(v, name="vector"):
    arr = np.asarray(v)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        arr = arr.reshape(-1)
    if arr.size == 0:
        raise DimensionMismatch(f"{name} must be nonempty")
    dtype = np.complex128 if np.iscomplexobj(arr) else np.float64
    return check_finite(arr.astype(dtype, copy=False), name)
