"""Dense complex linear algebra for the small matrices used throughout.

Matrices are plain ``complex128`` numpy arrays.  Factorization is LAPACK's
partial-pivot LU (``zgetrf``); the pivot check on top of it is ours, so a
matrix sitting on a band edge or bound state raises instead of returning
garbage.
"""
from __future__ import annotations

import numpy as np
from scipy.linalg import lapack

from .errors import DimensionMismatch, SingularMatrix, ValidationError

PIVOT_RTOL = 1e-14


def as_cmatrix(m, *, square: bool = False) -> np.ndarray:
    """Coerce ``m`` to a finite 2-D complex array."""
    a = np.array(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValidationError(f"expected a non-empty 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix has non-finite entries")
    if square and a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    return a


def frobenius_norm(m) -> float:
    return float(np.sqrt(np.sum(np.abs(np.asarray(m, dtype=np.complex128)) ** 2)))


def lu_factor(m: np.ndarray):
    """Partial-pivot LU of a square matrix; raises SingularMatrix on a tiny pivot."""
    a = as_cmatrix(m, square=True)
    lu, piv, info = lapack.zgetrf(a)
    if info < 0:
        raise ValueError(f"zgetrf: illegal argument {-info}")
    pivots = np.abs(np.diagonal(lu))
    threshold = PIVOT_RTOL * frobenius_norm(a)
    if np.any(pivots <= threshold):
        j = int(np.argmin(pivots))
        raise SingularMatrix(
            f"pivot {j} has magnitude {pivots[j]:.3e} <= {threshold:.3e}"
        )
    return lu, piv


def invert(m) -> np.ndarray:
    lu, piv = lu_factor(m)
    inv, info = lapack.zgetri(lu, piv)
    if info != 0:
        raise SingularMatrix(f"zgetri failed with info={info}")
    return inv


def solve(m, b) -> np.ndarray:
    """Solve ``m @ x = b`` for a vector (or stacked columns) ``b``."""
    lu, piv = lu_factor(m)
    rhs = np.array(b, dtype=np.complex128)
    if rhs.shape[0] != lu.shape[0]:
        raise DimensionMismatch(
            f"right-hand side has length {rhs.shape[0]}, matrix is {lu.shape[0]}x{lu.shape[0]}"
        )
    x, info = lapack.zgetrs(lu, piv, rhs)
    if info != 0:
        raise ValueError(f"zgetrs: illegal argument {-info}")
    return x


def is_unitary(u, tol: float = 1e-10) -> bool:
    a = np.asarray(u, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    return frobenius_norm(a @ a.conj().T - np.eye(a.shape[0])) <= tol


def dagger(m: np.ndarray) -> np.ndarray:
    return np.asarray(m).conj().T


def det(m) -> complex:
    """Determinant via LU; never raises on singular input.  ``det`` of a 0x0 matrix is 1."""
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"determinant needs a square matrix, got shape {a.shape}")
    if a.shape[0] == 0:
        return 1.0 + 0.0j
    lu, piv, info = lapack.zgetrf(a)
    sign = -1.0 if np.count_nonzero(piv != np.arange(a.shape[0])) % 2 else 1.0
    return complex(sign * np.prod(np.diagonal(lu)))


def minor(m: np.ndarray, rows, cols) -> complex:
    """Determinant of ``m`` with the given rows and columns deleted."""
    keep_r = [i for i in range(m.shape[0]) if i not in rows]
    keep_c = [j for j in range(m.shape[1]) if j not in cols]
    return det(m[np.ix_(keep_r, keep_c)])
