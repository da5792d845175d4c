"""Estimator-style wrappers around the solver and the barrier certificates.

``HessianFlow`` evolves a problem and then behaves like a regressor on the
domain: ``predict(X)`` interpolates the final field at query points.
``BarrierCertifier`` consumes a stored evolution and exposes the certified
bracket as a function of time.
"""

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from sklearn.base import BaseEstimator

from ._validation import check_is_fitted
from .barriers import (
    attraction_certificate,
    barrier_curves,
    barrier_traces,
    check_barrier_hypotheses,
    envelopes_from_trace,
    measure_barrier_data,
    verify_envelope,
)
from .evolution import ProblemSpec, run
from .exceptions import DomainError
from .grid import GridSpec, ScalarField


class HessianFlow(BaseEstimator):
    """Explicit solver for ``E_m[u] = f`` on a box, as an estimator.

    Parameters mirror :class:`~hessflow.evolution.ProblemSpec`; ``fit`` takes
    the data samplers, runs to ``t_end`` or stationarity and stores

    - ``u_``: final :class:`ScalarField`
    - ``trace_``: :class:`EvolutionTrace` (per-step diagnostics, snapshots)
    - ``grid_``, ``spec_``, ``n_steps_``, ``t_final_``
    """

    def __init__(self, m=2, dim=2, lo=0.0, hi=1.0, res=33, t_end=1.0, dt=None, safety=0.5,
                 dt_cap=1e-2, eps_stationary=1e-8, orientation=1, record_every=0, max_steps=None):
        self.m = m
        self.dim = dim
        self.lo = lo
        self.hi = hi
        self.res = res
        self.t_end = t_end
        self.dt = dt
        self.safety = safety
        self.dt_cap = dt_cap
        self.eps_stationary = eps_stationary
        self.orientation = orientation
        self.record_every = record_every
        self.max_steps = max_steps

    def _grid(self):
        return GridSpec(self.dim, self.lo, self.hi, self.res)

    def fit(self, f, phi, initial=None, reference=None):
        """Evolve from ``initial`` (default ``phi(., 0)``).

        ``f(*xs, t)``, ``phi(*xs, t)`` and ``initial(*xs)`` are vectorized
        samplers; ``reference(*xs)`` is an optional stationary solution used
        for the distance column of the trace.
        """
        grid = self._grid()
        spec = ProblemSpec(
            self.m, grid, f=f, phi=phi, initial=initial, t_end=self.t_end, dt=self.dt,
            safety=self.safety, dt_cap=self.dt_cap, eps_stationary=self.eps_stationary,
            orientation=self.orientation,
        )
        ref = None if reference is None else grid.sample(reference)
        u, trace = run(spec, ref, record_every=self.record_every, max_steps=self.max_steps)
        self.grid_ = grid
        self.spec_ = spec
        self.reference_ = ref
        self.u_ = u
        self.trace_ = trace
        self.n_steps_ = len(trace)
        self.t_final_ = float(trace.times[-1]) if len(trace) else 0.0
        return self

    def predict(self, X):
        """Linear interpolation of the final field at points ``X`` of shape ``(k, dim)``."""
        check_is_fitted(self, ["u_"])
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.grid_.dim:
            raise DomainError(f"expected points with {self.grid_.dim} coordinates, got {X.shape[1]}")
        interp = RegularGridInterpolator(self.grid_.axes(), self.u_.values)
        return interp(X)

    def score(self, X, y):
        """Negative sup-norm error against target values ``y`` (higher is better)."""
        return -float(np.max(np.abs(self.predict(X) - np.asarray(y, dtype=float))))

    def distance_to(self, reference):
        """``sup |u - reference|`` over all nodes; ``reference`` is a sampler or field."""
        check_is_fitted(self, ["u_"])
        if not isinstance(reference, ScalarField):
            reference = self.grid_.sample(reference)
        return float(np.max(np.abs(self.u_.values - reference.values)))


class BarrierCertifier(BaseEstimator):
    """Barrier envelope verification and attraction certificate for a stored run.

    ``fit(snapshots, u_stat, f, f_stat)`` measures the barrier constants
    (with relative ``safety``), builds the profiles, checks
    ``V_minus - tol <= u <= V_plus + tol`` on every snapshot and issues the
    certificate.  Fitted attributes: ``envelopes_``, ``data_``, ``curves_``,
    ``envelope_report_``, ``certificate_``, ``hypotheses_``.
    """

    def __init__(self, m=2, eps_h=1e-6, safety=0.01, tol=1e-3, nu=None):
        self.m = m
        self.eps_h = eps_h
        self.safety = safety
        self.tol = tol
        self.nu = nu

    def fit(self, snapshots, u_stat, f, f_stat, rate_times=None, rate_distances=None):
        """``snapshots`` is a list of ``(t, ScalarField)``; ``f(*xs, t)`` the evolving source."""
        if len(snapshots) < 2:
            raise DomainError("need at least two snapshots")
        grid = u_stat.grid
        if not isinstance(f_stat, ScalarField):
            f_stat = grid.sample(f_stat)
        f_trace = [(t, grid.sample(f, t)) for t, _ in snapshots]
        env = envelopes_from_trace(snapshots, u_stat, f_trace, f_stat, self.m, eps_h=self.eps_h)
        data = measure_barrier_data(u_stat, f_stat, self.m, env, nu=self.nu, safety=self.safety)
        curves = barrier_curves(env, data)
        V_plus, V_minus = barrier_traces(curves, u_stat, data)
        hyp = check_barrier_hypotheses(env, data, u_stat)
        fields = [u for _, u in snapshots]
        report = verify_envelope(fields, V_plus, V_minus, self.tol, hyp)
        dist = [float(np.max(np.abs(u.values - u_stat.values))) for u in fields]
        cert = attraction_certificate(env.times, dist, env, data, curves, tol=self.tol,
                                      rate_times=rate_times, rate_distances=rate_distances)
        self.envelopes_ = env
        self.data_ = data
        self.curves_ = curves
        self.hypotheses_ = hyp
        self.envelope_report_ = report
        self.certificate_ = cert
        self.distances_ = np.asarray(dist)
        return self

    def predict(self, t):
        """Certified ``(upper, lower)`` bounds on ``u - u_stat``, linearly interpolated between snapshot times."""
        check_is_fitted(self, ["curves_"])
        t = np.asarray(t, dtype=float)
        c = self.curves_
        return np.interp(t, c.times, c.upper), np.interp(t, c.times, c.lower)

    @property
    def certified(self):
        check_is_fitted(self, ["envelope_report_"])
        return bool(self.envelope_report_.passed and self.certificate_.bracket_holds)
