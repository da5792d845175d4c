import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from hessflow import BarrierCertifier, HessianFlow
from hessflow.exceptions import DomainError


def ma_stat(x, y, t=0.0):
    return 0.5 * (x * x + y * y - 1.0)


def ma_initial(x, y):
    return ma_stat(x, y) + 0.025 * (np.sin(np.pi * x) * np.sin(np.pi * y)) ** 2


def one(x, y, t):
    return 1.0 + 0.0 * x


def test_params_roundtrip():
    est = HessianFlow(m=2, res=17, t_end=3.0)
    params = est.get_params()
    assert params["m"] == 2 and params["res"] == 17 and params["t_end"] == 3.0
    twin = clone(est)
    assert twin.get_params() == params
    est.set_params(res=21)
    assert est.res == 21
    assert "res=21" in repr(est)


def test_unfitted():
    with pytest.raises(NotFittedError):
        HessianFlow().predict([[0.5, 0.5]])
    with pytest.raises(NotFittedError):
        BarrierCertifier().predict(0.0)


@pytest.fixture(scope="module")
def fitted_flow():
    est = HessianFlow(m=2, res=17, t_end=20.0, record_every=50)
    return est.fit(one, ma_stat, initial=ma_initial, reference=ma_stat)


def test_fit_predict(fitted_flow):
    est = fitted_flow
    assert est.trace_.stopped == "stationary"
    assert est.n_steps_ == len(est.trace_)
    assert est.distance_to(ma_stat) < 1e-6
    # nodes are reproduced exactly by the interpolant
    X = np.array([[0.25, 0.5], [0.0, 1.0], [0.5, 0.5]])
    assert np.allclose(est.predict(X), ma_stat(X[:, 0], X[:, 1]), atol=1e-6)
    assert est.score(X, ma_stat(X[:, 0], X[:, 1])) > -1e-6
    with pytest.raises(DomainError):
        est.predict([[0.1, 0.2, 0.3]])


def test_barrier_certifier(fitted_flow):
    est = fitted_flow
    u_stat = est.grid_.sample(ma_stat)
    cert = BarrierCertifier(m=2).fit(est.trace_.snapshots, u_stat, one, est.grid_.sample(one, 0.0),
                                     est.trace_.times, est.trace_.column("dist_to_reference"))
    assert cert.hypotheses_ == []
    assert cert.certified
    up, lo = cert.predict([0.0, est.t_final_])
    assert np.all(up >= 0) and np.all(lo <= 0)
    assert np.all(cert.distances_ <= np.maximum(cert.curves_.upper, -cert.curves_.lower) + 1e-3)


def test_barrier_certifier_needs_two_snapshots(fitted_flow):
    est = fitted_flow
    with pytest.raises(DomainError):
        BarrierCertifier().fit(est.trace_.snapshots[:1], est.u_, one, est.u_)
