"""Garding cones K_m, the evolutionary cone K_m^ev and the generalized Sylvester test."""

from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

from ._validation import check_order, check_sym_matrix, check_tolerance, default_cone_tol
from .exceptions import ConsistencyError
from .trace_core import p_trace_minors, submatrix_excluding, traces_batch


@dataclass(frozen=True)
class ConeMembership:
    max_m: int
    margins: tuple
    tolerance: float


@dataclass(frozen=True)
class SylvesterWitness:
    """Index collection ``(i_1, ..., i_{m-1})`` certifying m-positiveness.

    ``minor_traces[0]`` is ``T_m(S)``; ``minor_traces[k]`` is
    ``T_{m-k}(S^{<i_1..i_k>})``.
    """

    indices: tuple
    minor_traces: tuple = field(default=())
    valid: bool = True


def _max_positive_prefix(values, tol):
    count = 0
    for v in values:
        if v > tol:
            count += 1
        else:
            break
    return count


def cone_membership_def(S, tol=None):
    """Largest ``m`` with ``T_p(S) > tol`` for every ``p <= m``."""
    S = check_sym_matrix(S)
    n = S.shape[0]
    if tol is None:
        tol = default_cone_tol(S, n)
    tol = check_tolerance(tol)
    margins = traces_batch(S)[1:]
    return ConeMembership(_max_positive_prefix(margins, tol), tuple(margins.tolist()), tol)


def check_sylvester_witness(S, m, indices, tol=0.0):
    """Evaluate the Sylvester conditions for one ordered index collection."""
    S = check_sym_matrix(S)
    n = S.shape[0]
    m = check_order(m, n)
    indices = tuple(int(i) for i in indices)
    if len(indices) != m - 1:
        raise ValueError(f"need {m - 1} indices for m={m}, got {len(indices)}")
    values = [traces_batch(S)[m]]
    for k in range(1, m):
        sub = submatrix_excluding(S, indices[:k])
        values.append(traces_batch(sub)[m - k])
    valid = all(v > tol for v in values)
    return SylvesterWitness(indices, tuple(float(v) for v in values), valid)


def is_m_positive_sylvester(S, m, tol=None, candidate=None):
    """Generalized Sylvester criterion with witness extraction.

    Searches ordered collections ``(i_1, ..., i_{m-1})`` of distinct 1-based
    indices in lexicographic order and returns ``(True, witness)`` for the first
    one with ``T_m(S) > tol`` and ``T_{m-k}(S^{<i_1..i_k>}) > tol`` for all
    ``k``; otherwise ``(False, None)``.

    If ``candidate`` is an index ``i`` with ``S^{<i>}`` already (m-1)-positive,
    the answer reduces to the sign of ``T_m(S)`` and no search is run.
    """
    S = check_sym_matrix(S)
    n = S.shape[0]
    m = check_order(m, n)
    if tol is None:
        tol = default_cone_tol(S, m)
    tol = check_tolerance(tol)

    t_m = traces_batch(S)[m]
    if not t_m > tol:
        return False, None
    if m == 1:
        return True, SylvesterWitness((), (float(t_m),))

    if candidate is not None:
        sub = submatrix_excluding(S, [candidate])
        sub_traces = traces_batch(sub)[1:m]
        if np.all(sub_traces > tol):
            return True, SylvesterWitness((int(candidate),), (float(t_m), float(sub_traces[-1])))

    # the k-th condition only depends on the set {i_1..i_k}
    cache = {}

    def condition(prefix):
        key = frozenset(prefix)
        if key not in cache:
            cache[key] = traces_batch(submatrix_excluding(S, prefix))[m - len(prefix)]
        return cache[key]

    def search(prefix):
        if len(prefix) == m - 1:
            return prefix
        for i in range(1, n + 1):
            if i in prefix:
                continue
            nxt = prefix + (i,)
            if condition(nxt) > tol:
                found = search(nxt)
                if found is not None:
                    return found
        return None

    found = search(())
    if found is None:
        return False, None
    values = (float(t_m),) + tuple(float(cache[frozenset(found[:k])]) for k in range(1, m))
    return True, SylvesterWitness(found, values)


def iter_collections(n, m):
    """All ordered collections the Sylvester search ranges over, lexicographically."""
    return permutations(range(1, n + 1), m - 1)


def ev_lift(s, S):
    """Bordered matrix with corner ``s``, zero border and lower block ``S``."""
    S = check_sym_matrix(S)
    n = S.shape[0]
    out = np.zeros((n + 1, n + 1))
    out[0, 0] = float(s)
    out[1:, 1:] = S
    return out


def em_algebraic(s, S, m):
    """``E_m(s, S) = s T_{m-1}(S) + T_m(S)``."""
    S = check_sym_matrix(S)
    m = check_order(m, S.shape[0])
    t = traces_batch(S)
    return float(s * t[m - 1] + t[m])


def em_lifted(s, S, m):
    """``E_m(s, S)`` evaluated as the m-trace of the lifted matrix (oracle route)."""
    return p_trace_minors(ev_lift(s, S), m)


def in_ev_cone(s, S, m, tol=None):
    """Membership of ``(s, S)`` in ``K_m^ev``.

    Both descriptions are evaluated: ``E_p(s, S) > tol`` for ``p = 1..m`` and
    ``E_m(s, S) > tol`` with ``S`` in ``K_{m-1}`` (``K_0`` is everything).  They
    must agree whenever no margin falls inside the tolerance band.
    """
    S = check_sym_matrix(S)
    n = S.shape[0]
    m = check_order(m, n)
    if tol is None:
        tol = default_cone_tol(S, m)
    tol = check_tolerance(tol)
    t = traces_batch(S)
    e = s * t[:n] + t[1:]  # e[p-1] = E_p(s, S)

    full = bool(np.all(e[:m] > tol))
    refined = bool(e[m - 1] > tol and np.all(t[1:m] > tol))
    if full != refined:
        margins = np.concatenate([e[:m], t[1:m]])
        if np.all(np.abs(margins) >= tol) and np.all(np.abs(margins) > 0):
            raise ConsistencyError(
                f"K_m^ev descriptions disagree for s={s}, m={m}: full={full}, refined={refined}"
            )
    return refined
