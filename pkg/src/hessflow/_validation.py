"""Input validation helpers in the spirit of ``sklearn.utils.validation``."""

import numpy as np

from .exceptions import DomainError

MAX_DIM = 8


def check_sym_matrix(S, *, max_dim=MAX_DIM, symmetrize=False, name="S"):
    """Return ``S`` as a float array after checking squareness, symmetry and finiteness.

    With ``symmetrize=True`` only the upper triangle is read and mirrored, which is
    how matrices read from text files are treated.
    """
    S = np.array(S, dtype=float, copy=True)
    if S.ndim == 0:
        S = S.reshape(1, 1)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise DomainError(f"{name} must be a square matrix, got shape {S.shape}")
    n = S.shape[0]
    if not 1 <= n <= max_dim:
        raise DomainError(f"{name} dimension {n} outside supported range 1..{max_dim}")
    if not np.all(np.isfinite(S)):
        raise DomainError(f"{name} has non-finite entries")
    if symmetrize:
        upper = np.triu(S)
        S = upper + np.triu(S, 1).T
    elif not np.allclose(S, S.T, rtol=1e-12, atol=1e-12 * (1.0 + np.abs(S).max())):
        raise DomainError(f"{name} is not symmetric")
    else:
        S = 0.5 * (S + S.T)
    return S


def check_order(m, n, *, lo=1, name="m"):
    """Check ``lo <= m <= n`` for an integer order parameter."""
    if int(m) != m:
        raise DomainError(f"{name} must be an integer, got {m!r}")
    m = int(m)
    if not lo <= m <= n:
        raise DomainError(f"{name}={m} outside range {lo}..{n}")
    return m


def check_tolerance(tol):
    if tol is None:
        return None
    tol = float(tol)
    if not tol >= 0.0:
        raise DomainError(f"tolerance must be >= 0, got {tol}")
    return tol


def default_cone_tol(S, m):
    """Scale-aware positivity threshold 1e-10 * (1 + ||S||^m), Frobenius norm."""
    return 1e-10 * (1.0 + np.linalg.norm(S) ** m)


def check_is_fitted(estimator, attributes):
    from sklearn.utils.validation import check_is_fitted as _check

    _check(estimator, attributes)
