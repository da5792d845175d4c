"""p-traces of symmetric matrices.

``T_p(S)`` is the sum of all principal p x p minors of ``S`` (``T_0 = 1``).  Two
independent routes are provided: :func:`p_trace_minors` enumerates the minors
directly and is used as the oracle, :func:`all_traces` / :func:`traces_batch`
read the values off the characteristic polynomial (Faddeev-LeVerrier) and are
the production path.
"""

from itertools import combinations

import numpy as np

from ._validation import check_order, check_sym_matrix
from .exceptions import DomainError


class TraceVector:
    """Immutable vector ``(T_0, ..., T_n)`` of a matrix of dimension ``n``.

    Indexing past ``n`` returns exactly ``0.0``: ``T_{n+1}`` vanishes by convention.
    """

    __slots__ = ("_values",)

    def __init__(self, values):
        values = np.array(values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise DomainError("TraceVector needs a non-empty 1-d array")
        values[0] = 1.0
        values.setflags(write=False)
        self._values = values

    @property
    def values(self):
        return self._values

    @property
    def n(self):
        return self._values.size - 1

    def __getitem__(self, p):
        if p < 0:
            raise DomainError("trace index must be >= 0")
        if p > self.n:
            return 0.0
        return float(self._values[p])

    def __len__(self):
        return self._values.size

    def __iter__(self):
        return iter(self._values.tolist())

    def __eq__(self, other):
        if isinstance(other, TraceVector):
            return np.array_equal(self._values, other._values)
        return NotImplemented

    def __repr__(self):
        return f"TraceVector({self._values.tolist()})"


def _det_small(A):
    p = A.shape[0]
    if p == 1:
        return A[0, 0]
    if p == 2:
        return A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    if p == 3:
        return (
            A[0, 0] * (A[1, 1] * A[2, 2] - A[1, 2] * A[2, 1])
            - A[0, 1] * (A[1, 0] * A[2, 2] - A[1, 2] * A[2, 0])
            + A[0, 2] * (A[1, 0] * A[2, 1] - A[1, 1] * A[2, 0])
        )
    # LAPACK getrf: LU with partial pivoting
    return np.linalg.det(A)


def p_trace_minors(S, p):
    """Sum of all principal ``p``-minors of ``S`` by explicit enumeration.

    Accepts non-symmetric square input as well, which the finite-difference
    checks of :func:`trace_derivative` rely on.
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise DomainError("S must be square")
    n = S.shape[0]
    p = check_order(p, n, lo=0, name="p")
    if p == 0:
        return 1.0
    total = 0.0
    for idx in combinations(range(n), p):
        total += _det_small(S[np.ix_(idx, idx)])
    return float(total)


def traces_batch(S):
    """``T_0..T_n`` for a stack of matrices of shape ``(..., n, n)``.

    Returns an array of shape ``(..., n + 1)``.  Uses the Faddeev-LeVerrier
    recurrence in its Newton-identity form: with ``M_1 = I``,
    ``T_k = tr(S M_k) / k`` and ``M_{k+1} = T_k I - S M_k``.
    """
    S = np.asarray(S, dtype=float)
    n = S.shape[-1]
    out = np.empty(S.shape[:-2] + (n + 1,))
    out[..., 0] = 1.0
    if n == 1:
        out[..., 1] = S[..., 0, 0]
        return out
    if n == 2:
        out[..., 1] = S[..., 0, 0] + S[..., 1, 1]
        out[..., 2] = S[..., 0, 0] * S[..., 1, 1] - S[..., 0, 1] * S[..., 1, 0]
        return out
    eye = np.eye(n)
    M = np.broadcast_to(eye, S.shape).copy()
    for k in range(1, n + 1):
        SM = S @ M
        c = np.trace(SM, axis1=-2, axis2=-1) / k
        out[..., k] = c
        if k < n:
            M = c[..., None, None] * eye - SM
    return out


def all_traces(S):
    """All p-traces of a single symmetric matrix as a :class:`TraceVector`."""
    S = check_sym_matrix(S)
    return TraceVector(traces_batch(S))


def submatrix_excluding(S, idx):
    """Cross out the rows and columns listed in ``idx`` (1-based).

    The remaining indices keep their relative order.
    """
    S = np.asarray(S, dtype=float)
    n = S.shape[0]
    idx = list(idx)
    if len(set(idx)) != len(idx):
        raise DomainError(f"duplicate indices in {idx}")
    if any(int(i) != i or not 1 <= i <= n for i in idx):
        raise DomainError(f"indices {idx} out of range 1..{n}")
    if len(idx) >= n:
        raise DomainError("cannot exclude every index")
    keep = [k for k in range(n) if k + 1 not in set(idx)]
    return S[np.ix_(keep, keep)].copy()


def trace_derivative_batch(S, m, traces=None):
    """Gradient ``dT_m/dS`` for a stack ``(..., n, n)``.

    Uses ``dT_m/dS = sum_k (-1)^k T_{m-1-k}(S) S^k``; entry ``(i, j)`` is the
    derivative with respect to the single entry ``s_ij``.
    """
    S = np.asarray(S, dtype=float)
    n = S.shape[-1]
    if traces is None:
        traces = traces_batch(S)
    eye = np.broadcast_to(np.eye(n), S.shape)
    power = eye.copy()
    grad = np.zeros_like(S)
    for k in range(m):
        grad = grad + (-1) ** k * traces[..., m - 1 - k, None, None] * power
        if k + 1 < m:
            power = power @ S
    return grad


def trace_derivative(S, m):
    """Matrix of partial derivatives of ``T_m`` with respect to the entries of ``S``.

    Each off-diagonal entry is the sensitivity to that one stored entry; moving
    ``s_ij`` and ``s_ji`` together doubles it.
    """
    S = check_sym_matrix(S)
    m = check_order(m, S.shape[0])
    grad = trace_derivative_batch(S, m)
    return 0.5 * (grad + grad.T)
