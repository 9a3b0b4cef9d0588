"""Dense real-matrix helpers and the Moore-Penrose pseudoinverse.

Matrices are plain 2-D float64 ``numpy`` arrays. ``as_matrix`` is the single
gate through which external data enters: it enforces shape and finiteness so
the solvers below can assume clean input.
"""

import numpy as np

from .errors import InvalidInputError

EPS = np.finfo(np.float64).eps


def as_matrix(a, name="matrix"):
    """Return ``a`` as a finite, non-empty 2-D float64 array."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim == 1:
        m = m[:, None]
    if m.ndim != 2:
        raise InvalidInputError(f"{name}: expected 2-D, got shape {m.shape}")
    if m.size == 0:
        raise InvalidInputError(f"{name}: empty")
    if not np.all(np.isfinite(m)):
        raise InvalidInputError(f"{name}: contains non-finite entries")
    return m


def default_tolerance(shape, sigma_max):
    return max(shape) * EPS * sigma_max


def pseudoinverse(a, tol=0.0):
    """Moore-Penrose inverse via SVD with rank truncation.

    Singular values ``<= tol`` are treated as zero. ``tol == 0`` selects the
    conventional cutoff ``max(rows, cols) * eps * sigma_max``.
    """
    a = as_matrix(a, "A")
    if tol < 0 or not np.isfinite(tol):
        raise InvalidInputError(f"tol must be a non-negative finite real, got {tol}")
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    sigma_max = s[0] if s.size else 0.0
    cutoff = tol if tol > 0 else default_tolerance(a.shape, sigma_max)
    keep = s > cutoff
    if not np.any(keep):
        return np.zeros((a.shape[1], a.shape[0]))
    s_inv = 1.0 / s[keep]
    return (vt[keep].T * s_inv) @ u[:, keep].T


def least_squares_min_norm(h, t, tol=0.0):
    """Minimal-Frobenius-norm minimiser of ``||H Q - T||``, i.e. ``Q = H+ T``."""
    h = as_matrix(h, "H")
    t = as_matrix(t, "T")
    if h.shape[0] != t.shape[0]:
        raise InvalidInputError(
            f"row mismatch: H has {h.shape[0]} rows, T has {t.shape[0]}")
    return pseudoinverse(h, tol) @ t
