import numpy as np
import pytest
from math import comb

from conftest import random_sym
from hessflow.cones import (
    check_sylvester_witness,
    cone_membership_def,
    em_algebraic,
    em_lifted,
    ev_lift,
    in_ev_cone,
    is_m_positive_sylvester,
    iter_collections,
)
from hessflow.exceptions import DomainError
from hessflow.trace_core import all_traces, p_trace_minors, traces_batch


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_identity_in_every_cone(n):
    assert cone_membership_def(np.eye(n)).max_m == n


def test_membership_examples():
    mem = cone_membership_def(np.diag([3.0, -1.0]))
    assert mem.margins == (2.0, -3.0)
    assert mem.max_m == 1
    assert cone_membership_def(-np.eye(2)).max_m == 0


def test_sylvester_examples():
    ok, wit = is_m_positive_sylvester(np.diag([-1.0, 3.0, 3.0]), 2)
    assert ok
    assert wit.indices == (1,)
    assert wit.minor_traces == (3.0, 6.0)
    ok, wit = is_m_positive_sylvester(np.diag([3.0, -1.0]), 2)
    assert not ok and wit is None


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_identity_witnesses(n):
    ok, wit = is_m_positive_sylvester(np.eye(n), n)
    assert ok
    assert wit.indices == tuple(range(1, n))  # first collection in lexicographic order
    # the descending classic collection is a valid witness too
    assert check_sylvester_witness(np.eye(n), n, tuple(range(n, 1, -1))).valid


def test_witness_conditions_hold(rng):
    for _ in range(200):
        n = int(rng.integers(2, 6))
        S = random_sym(rng, n) + 2 * np.eye(n)
        for m in range(1, n + 1):
            ok, wit = is_m_positive_sylvester(S, m)
            if ok:
                assert check_sylvester_witness(S, m, wit.indices, tol=0.0).valid


def test_candidate_fast_path_agrees(rng):
    for _ in range(200):
        S = random_sym(rng, 4) + 1.5 * np.eye(4)
        for cand in range(1, 5):
            assert is_m_positive_sylvester(S, 3, candidate=cand)[0] == is_m_positive_sylvester(S, 3)[0]


def test_iter_collections_order():
    assert list(iter_collections(3, 3))[:3] == [(1, 2), (1, 3), (2, 1)]
    assert len(list(iter_collections(4, 3))) == 12


def test_sylvester_equals_definition(rng):
    disagreements = 0
    checked = 0
    for _ in range(10_000):
        n = int(rng.integers(2, 7))
        m = int(rng.integers(1, n + 1))
        S = random_sym(rng, n) + rng.uniform(0, 6) * np.eye(n)
        t = traces_batch(S)
        if np.any(np.abs(t[1 : m + 1]) < 1e-8):
            continue
        checked += 1
        by_def = cone_membership_def(S, tol=0.0).max_m >= m
        by_syl = is_m_positive_sylvester(S, m, tol=0.0)[0]
        disagreements += by_def != by_syl
    assert checked > 9000
    assert disagreements == 0


def test_garding_monotone_and_concave(rng):
    pairs = 0
    while pairs < 1000:
        n = int(rng.integers(2, 6))
        m = int(rng.integers(1, n + 1))
        S1 = random_sym(rng, n, 2.0) + rng.uniform(0, 4) * np.eye(n)
        S2 = random_sym(rng, n, 2.0) + rng.uniform(0, 4) * np.eye(n)
        if cone_membership_def(S1, 0.0).max_m < m or cone_membership_def(S2, 0.0).max_m < m:
            continue
        pairs += 1
        t1 = traces_batch(S1)[m]
        t2 = traces_batch(S2)[m]
        assert traces_batch(S1 + S2)[m] >= t1 - 1e-10 * abs(t1)
        mid = traces_batch(0.5 * (S1 + S2))[m]
        assert mid ** (1 / m) >= 0.5 * (t1 ** (1 / m) + t2 ** (1 / m)) - 1e-10


def test_psd_matrices_have_nonnegative_margins(rng):
    for _ in range(300):
        n = int(rng.integers(2, 7))
        k = int(rng.integers(1, n + 1))
        B = rng.normal(size=(n, k))
        mem = cone_membership_def(B @ B.T)
        assert min(mem.margins) >= -1e-10 * (1 + np.abs(B @ B.T).max() ** n)


def test_ev_lift_examples():
    assert np.array_equal(ev_lift(1.0, np.eye(2)), np.eye(3))
    assert np.allclose(all_traces(ev_lift(1.0, np.eye(2))).values, (1, 3, 3, 1))
    S = np.array([[1.0, 2.0], [2.0, -1.0]])
    for p in range(1, 3):
        assert p_trace_minors(ev_lift(0.0, S), p) == pytest.approx(p_trace_minors(S, p))


def test_em_examples():
    assert em_algebraic(1.0, np.eye(2), 1) == 3.0
    assert em_algebraic(1.0, np.eye(2), 2) == 3.0
    S = np.array([[2.0, 1.0], [1.0, -1.0]])
    assert em_algebraic(0.0, S, 2) == pytest.approx(np.linalg.det(S))


def test_em_matches_lift(rng):
    for _ in range(500):
        n = int(rng.integers(1, 6))
        m = int(rng.integers(1, n + 1))
        S = random_sym(rng, n)
        s = rng.uniform(-5, 5)
        a, b = em_algebraic(s, S, m), em_lifted(s, S, m)
        assert abs(a - b) <= 1e-9 * (1 + abs(b))


def test_in_ev_cone_examples():
    assert in_ev_cone(1.0, np.eye(2), 2)
    assert not in_ev_cone(-10.0, np.eye(2), 1)
    for n in range(1, 5):
        for m in range(1, n + 1):
            for s in np.linspace(-5, 5, 21):
                expected = s * comb(n, m - 1) + comb(n, m) > 0
                margin = abs(s * comb(n, m - 1) + comb(n, m))
                if margin > 1e-6:
                    assert in_ev_cone(s, np.eye(n), m) == expected


def test_in_ev_cone_descriptions_agree(rng):
    # raises ConsistencyError on any disagreement outside the tolerance band
    for _ in range(3000):
        n = int(rng.integers(1, 6))
        m = int(rng.integers(1, n + 1))
        in_ev_cone(rng.uniform(-3, 3), random_sym(rng, n) + rng.uniform(0, 4) * np.eye(n), m)


def test_bad_order_rejected():
    with pytest.raises(DomainError):
        is_m_positive_sylvester(np.eye(2), 3)
    with pytest.raises(DomainError):
        em_algebraic(0.0, np.eye(2), 0)
