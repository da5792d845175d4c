"""Closed-form barriers sandwiching an m-Hessian evolution around a stationary solution.

A barrier is ``V = sigma(t) (u_stat - A) + u_stat`` where ``(1 + sigma)^m = 1 + m theta``
and ``theta`` solves the linear ODE ``theta' + b (theta + h) = 0``.  The upper
barrier uses a non-increasing ``h = h_plus > 0`` starting at ``theta_0 = -h_plus(0)``,
the lower one ``h = -h_minus < 0`` starting at ``theta_0 = h_minus(0)``.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._validation import check_order
from .exceptions import ConsistencyError, DomainError
from .grid import ScalarField, hessian_values, oscillation
from .trace_core import traces_batch

PLUS = "plus"
MINUS = "minus"


def reverse_running_max(values):
    """Smallest non-increasing majorant of a sampled signal."""
    values = np.asarray(values, dtype=float)
    return np.maximum.accumulate(values[::-1])[::-1]


@dataclass(frozen=True, eq=False)
class ThetaSpec:
    """Parameters of ``theta' + b (theta + h) = 0``.

    ``times``/``h_values`` sample the magnitude of ``h`` (always positive);
    ``variant`` selects the sign: ``"plus"`` drives the ODE with ``+h``,
    ``"minus"`` with ``-h``.  Between samples ``h`` is linear, after the last
    sample constant.
    """

    b: float
    theta0: float
    times: np.ndarray
    h_values: np.ndarray
    variant: str = PLUS
    m: Optional[int] = None

    def __post_init__(self):
        times = np.atleast_1d(np.asarray(self.times, dtype=float))
        h = np.broadcast_to(np.asarray(self.h_values, dtype=float), times.shape).copy()
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "h_values", h)
        if self.variant not in (PLUS, MINUS):
            raise DomainError(f"unknown variant {self.variant!r}")
        if not self.b > 0:
            raise DomainError("b must be > 0")
        if times[0] != 0.0 or np.any(np.diff(times) <= 0):
            raise DomainError("h must be sampled on increasing times starting at 0")
        if np.any(h <= 0):
            raise DomainError("h samples must be > 0")
        if np.any(np.diff(h) > 0):
            raise DomainError("h must be non-increasing")
        if self.variant == PLUS:
            if self.m is not None and not h[0] < 1.0 / self.m:
                raise DomainError(f"h_plus(0) = {h[0]} must be < 1/m")
            if self.theta0 + h[0] > 1e-15:
                raise DomainError("plus variant needs theta0 + h(0) <= 0")
        elif self.theta0 - h[0] < -1e-15:
            raise DomainError("minus variant needs theta0 - h(0) >= 0")

    @classmethod
    def constant(cls, b, theta0, h, variant=PLUS, t_max=1.0, m=None):
        return cls(b, theta0, np.array([0.0, t_max]), np.array([h, h]), variant, m)

    @property
    def sign(self):
        return 1.0 if self.variant == PLUS else -1.0

    def h_at(self, t):
        t = np.asarray(t, dtype=float)
        return np.interp(t, self.times, self.h_values)


def _segment(theta, b, dt, h_start, slope):
    """Exact propagation over one segment with ``h`` linear (signed)."""
    decay = math.exp(-b * dt)
    one_minus = -math.expm1(-b * dt)
    ramp = dt - one_minus / b
    return decay * theta - h_start * one_minus - slope * ramp


def theta_eval(spec, t):
    """``theta(t)`` and ``theta'(t)`` for scalar or array ``t``.

    The integral in the closed-form solution is evaluated exactly for the
    piecewise-linear ``h``, segment by segment.  The monotonicity conclusions
    (``theta + h_plus <= 0``, ``theta' >= 0`` for the plus variant; the mirror
    statements for minus) are checked on the output.
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t_arr < 0) or np.any(t_arr > spec.times[-1] * (1 + 1e-12)):
        raise DomainError(f"t outside the sampled range [0, {spec.times[-1]}]")
    order = np.argsort(t_arr, kind="stable")
    out = np.empty_like(t_arr)
    sgn = spec.sign
    times, h = spec.times, sgn * spec.h_values

    theta = spec.theta0
    seg = 0
    t_cur = 0.0
    for pos in order:
        target = min(t_arr[pos], times[-1])
        while seg + 1 < len(times) and times[seg + 1] <= target:
            slope = (h[seg + 1] - h[seg]) / (times[seg + 1] - times[seg])
            h_cur = h[seg] + slope * (t_cur - times[seg])
            theta = _segment(theta, spec.b, times[seg + 1] - t_cur, h_cur, slope)
            t_cur = times[seg + 1]
            seg += 1
        if target > t_cur:
            slope = (h[seg + 1] - h[seg]) / (times[seg + 1] - times[seg])
            h_cur = h[seg] + slope * (t_cur - times[seg])
            theta = _segment(theta, spec.b, target - t_cur, h_cur, slope)
            t_cur = target
        out[pos] = theta

    h_t = sgn * spec.h_at(t_arr)
    prime = -spec.b * (out + h_t)
    slack = 1e-12 * (1.0 + abs(spec.theta0) + spec.h_values[0])
    if spec.variant == PLUS:
        if np.any(out + h_t > slack):
            raise ConsistencyError("theta + h_plus > 0: upper profile lost its sign")
    elif np.any(out + h_t < -slack):
        raise ConsistencyError("theta - h_minus < 0: lower profile lost its sign")
    if np.ndim(t) == 0:
        return float(out[0]), float(prime[0])
    return out, prime


def sigma_from_theta(theta, m):
    """Principal root of ``(1 + sigma)^m = 1 + m theta``."""
    theta = np.asarray(theta, dtype=float)
    if np.any(1.0 + m * theta <= 0):
        raise DomainError("1 + m*theta must be > 0")
    sigma = np.expm1(np.log1p(m * theta) / m)
    return float(sigma) if sigma.ndim == 0 else sigma


def sigma_prime(theta, theta_prime, m):
    sigma = sigma_from_theta(theta, m)
    return np.asarray(theta_prime) / (1.0 + np.asarray(sigma)) ** (m - 1)


def sigma_chain_ok(theta, sigma, m, variant, theta0=None, slack=1e-12):
    """Pointwise ordering of ``sigma`` against ``theta``.

    Plus variant, ``theta < 0``: ``m theta <= sigma < theta < 0``.  Minus variant,
    ``theta > 0``: ``0 < c theta < sigma < theta`` with
    ``c = ((1 + m theta0)^{1/m} - 1) / theta0`` when ``theta0`` is given.
    For ``m = 1`` sigma equals theta and the strict inequalities relax to equality.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
    if variant == PLUS:
        sel = theta < 0
        th, sg = theta[sel], sigma[sel]
        below = np.all(sg < th) if m > 1 else np.all(np.abs(sg - th) <= slack)
        return bool(np.all(m * th <= sg + slack) and below and np.all(sg < 0))
    sel = theta > 0
    th, sg = theta[sel], sigma[sel]
    below = np.all(sg < th) if m > 1 else np.all(np.abs(sg - th) <= slack)
    ok = np.all(sg > 0) and below
    if theta0 is not None and theta0 > 0:
        c = sigma_from_theta(theta0, m) / theta0
        ok = ok and np.all(c * th <= sg + slack)
    return bool(ok)


@dataclass(frozen=True, eq=False)
class Envelopes:
    """Non-increasing majorants of the data mismatch along a trace."""

    times: np.ndarray
    h1_plus: np.ndarray
    h2_plus: np.ndarray
    h_minus: np.ndarray
    raw_excess: np.ndarray
    raw_deficit: np.ndarray
    raw_source: np.ndarray
    eps_h: float


def envelopes_from_signals(times, excess, deficit, source_plus, source_minus, eps_h=1e-6):
    """Turn raw mismatch signals into floored, non-increasing envelopes."""
    times = np.asarray(times, dtype=float)
    excess = np.maximum(np.asarray(excess, dtype=float), 0.0)
    deficit = np.maximum(np.asarray(deficit, dtype=float), 0.0)
    sp = np.maximum(np.asarray(source_plus, dtype=float), 0.0)
    sm = np.maximum(np.asarray(source_minus, dtype=float), 0.0)
    h1 = np.maximum(reverse_running_max(excess), eps_h)
    h2 = np.maximum(reverse_running_max(sp), eps_h)
    hm = np.maximum(reverse_running_max(np.maximum(deficit, sm)), eps_h)
    return Envelopes(times, h1, h2, hm, excess, deficit, np.asarray(source_plus, float), eps_h)


def envelopes_from_trace(u_trace, u_stat, f_trace, f_stat, m, Phi=None, eps_h=1e-6):
    """Envelopes ``h1_plus``, ``h2_plus``, ``h_minus`` from stored fields.

    ``u_trace`` and ``f_trace`` are sequences of ``(t, ScalarField)`` on common
    times.  ``Phi`` is the stationary Dirichlet data extended into the domain
    (defaults to ``u_stat``); the first time slice is compared on every node,
    later ones on the boundary only.  The source signal is
    ``(1/m)(1 - f/f_stat)`` over interior nodes.
    """
    if Phi is None:
        Phi = u_stat
    grid = u_stat.grid
    f_s = f_stat.values if isinstance(f_stat, ScalarField) else np.asarray(f_stat, dtype=float)
    if np.any(f_s[grid.interior] <= 0):
        raise DomainError("stationary right-hand side must be > 0")
    if len(u_trace) != len(f_trace):
        raise DomainError("u_trace and f_trace must be aligned")
    bmask = grid.boundary_mask()
    times, excess, deficit, src_p, src_m = [], [], [], [], []
    for k, ((t, u), (tf, f)) in enumerate(zip(u_trace, f_trace)):
        if abs(t - tf) > 1e-12 * max(1.0, abs(t)):
            raise DomainError("u_trace and f_trace time stamps differ")
        diff = u.values - Phi.values
        region = diff if k == 0 else diff[bmask]
        times.append(t)
        excess.append(region.max())
        deficit.append((-region).max())
        fv = f.values if isinstance(f, ScalarField) else np.asarray(f, dtype=float)
        src = (1.0 - fv[grid.interior] / f_s[grid.interior]) / m
        src_p.append(src.max())
        src_m.append((-src).max())
    return envelopes_from_signals(times, excess, deficit, src_p, src_m, eps_h)


@dataclass(frozen=True)
class BarrierData:
    """Constants entering the barriers.

    ``nu_m`` bounds ``f_stat`` from below, ``mu_m1``/``mu_m`` bound
    ``T_{m-1}``/``T_m`` of the stationary solution from above, ``nu`` bounds
    ``E_m[u]`` along the evolution from below.
    """

    m: int
    nu_m: float
    mu_m1: float
    mu_m: float
    sup_u: float
    osc_u: float
    h1_plus_0: float
    h0_minus: float
    nu: float

    def __post_init__(self):
        if not self.nu_m > 0:
            raise DomainError("nu_m must be > 0")
        if not self.mu_m1 > 0 or not self.mu_m > 0:
            raise DomainError("mu bounds must be > 0")
        if not self.h1_plus_0 > 0 or not self.h0_minus > 0:
            raise DomainError("envelope initial values must be > 0")

    @property
    def A1_plus(self):
        return 2 * self.m * self.h1_plus_0

    @property
    def A_plus(self):
        return self.A1_plus + self.sup_u

    @property
    def b_plus(self):
        return self.m * self.nu_m / ((self.A1_plus + self.osc_u) * self.mu_m1)

    @property
    def A1_minus(self):
        return self.h0_minus / sigma_from_theta(self.h0_minus, self.m)

    @property
    def A_minus(self):
        return self.A1_minus + self.sup_u

    @property
    def b_minus(self):
        return self.m * self.nu_m / ((self.A1_minus + self.osc_u) * self.mu_m1)

    @property
    def upper_factor(self):
        """Ratio between the composite ``h_plus`` and the boundary envelope."""
        c = max(1.0 - self.nu / self.mu_m, 0.5)
        return c / (self.m * self.h1_plus_0)


def stationary_traces(u_stat):
    """``T_0..T_n`` of the discrete Hessian of ``u_stat`` at interior nodes."""
    return traces_batch(hessian_values(u_stat.values, u_stat.grid))


def measure_barrier_data(u_stat, f_stat, m, envelopes, nu=None, safety=0.01):
    """Grid-measured constants with a relative safety margin.

    Lower bounds are shrunk by ``1 - safety``, upper bounds inflated by
    ``1 + safety``.  ``nu`` defaults to the measured ``nu_m``.
    """
    grid = u_stat.grid
    m = check_order(m, grid.dim)
    traces = stationary_traces(u_stat)
    f_s = f_stat.values if isinstance(f_stat, ScalarField) else np.asarray(f_stat, dtype=float)
    nu_m = float(f_s[grid.interior].min()) * (1 - safety)
    if nu is None:
        nu = nu_m
    return BarrierData(
        m=m,
        nu_m=nu_m,
        mu_m1=float(traces[..., m - 1].max()) * (1 + safety),
        mu_m=float(traces[..., m].max()) * (1 + safety),
        sup_u=float(u_stat.values.max()),
        osc_u=oscillation(u_stat),
        h1_plus_0=float(envelopes.h1_plus[0]),
        h0_minus=float(envelopes.h_minus[0]),
        nu=float(nu),
    )


def composite_h_plus(envelopes, data):
    """``max{c h1_plus / (m h1_plus(0)), h2_plus}`` clamped at ``1/(2m)``.

    Returns ``(values, clamped)``.
    """
    raw = np.maximum(data.upper_factor * envelopes.h1_plus, envelopes.h2_plus)
    cap = 1.0 / (2 * data.m)
    clamped = bool(np.any(raw > cap * (1 + 1e-12)))
    return np.minimum(raw, cap), clamped


def theta_plus_spec(envelopes, data):
    h, _ = composite_h_plus(envelopes, data)
    return ThetaSpec(data.b_plus, -h[0], envelopes.times, h, PLUS, data.m)


def theta_minus_spec(envelopes, data):
    return ThetaSpec(data.b_minus, data.h0_minus, envelopes.times, envelopes.h_minus, MINUS, data.m)


def _require_variant(spec, variant):
    if spec.variant != variant:
        raise DomainError(f"expected a {variant} profile, got {spec.variant}")


def upper_bound(data, theta_spec, t):
    """``m (2m h1_plus(0) + osc u_stat) (-theta_plus(t))``."""
    _require_variant(theta_spec, PLUS)
    theta, _ = theta_eval(theta_spec, t)
    return data.m * (data.A1_plus + data.osc_u) * (-np.asarray(theta))


def lower_bound(data, theta_spec, t):
    """``-(A1_minus + osc u_stat) theta_minus(t)``."""
    _require_variant(theta_spec, MINUS)
    theta, _ = theta_eval(theta_spec, t)
    return -(data.A1_minus + data.osc_u) * np.asarray(theta)


def barrier_field(sigma, u_stat, A):
    """``sigma (u_stat - A) + u_stat`` node by node."""
    return ScalarField(u_stat.grid, sigma * (u_stat.values - A) + u_stat.values)


@dataclass(frozen=True)
class IdentityReport:
    max_discrepancy: float
    printed_form_discrepancy: float
    corrected_vs_printed: float
    scale: float


def verify_ev_identity(u_stat, theta, theta_prime, A, m):
    """Compare ``E_m[V]`` evaluated directly with its closed form.

    Direct route: build ``V = sigma (u_stat - A) + u_stat`` on the grid, take
    its discrete Hessian, use ``V_t = sigma' (u_stat - A)`` and apply ``E_m``.
    Closed form: ``(A - u_stat) T_{m-1} theta' + (1 + m theta) T_m``.
    The printed variant ``(A - u_stat) T_{m-1} theta' + m T_m (theta + 1)`` is
    reported alongside; it coincides with the closed form only for ``m = 1``.
    """
    grid = u_stat.grid
    m = check_order(m, grid.dim)
    sigma = sigma_from_theta(theta, m)
    s_prime = theta_prime / (1.0 + sigma) ** (m - 1)
    V = barrier_field(sigma, u_stat, A)
    HV = hessian_values(V.values, grid)
    tv = traces_batch(HV)
    V_t = s_prime * (u_stat.values - A)[grid.interior]
    direct = -V_t * tv[..., m - 1] + tv[..., m]

    tu = stationary_traces(u_stat)
    gap = (A - u_stat.values)[grid.interior]
    corrected = gap * tu[..., m - 1] * theta_prime + (1.0 + m * theta) * tu[..., m]
    printed = gap * tu[..., m - 1] * theta_prime + m * tu[..., m] * (theta + 1.0)
    return IdentityReport(
        max_discrepancy=float(np.max(np.abs(direct - corrected))),
        printed_form_discrepancy=float(np.max(np.abs(direct - printed))),
        corrected_vs_printed=float(np.max(np.abs(corrected - printed))),
        scale=float(np.max(np.abs(corrected))),
    )


@dataclass(frozen=True)
class EnvelopeReport:
    passed: bool
    hypotheses_met: bool
    status: str
    worst_upper_margin: float
    worst_lower_margin: float
    failing_step: Optional[int] = None
    failing_node: Optional[tuple] = None
    failing_side: Optional[str] = None
    reasons: tuple = ()


def verify_envelope(u_trace, V_plus_trace, V_minus_trace, tol_discrete, hypotheses=()):
    """Check ``V_minus - tol <= u <= V_plus + tol`` at every node and stored time.

    ``hypotheses`` lists failed preconditions; when non-empty no conclusion is
    drawn.  Margins are ``min(V_plus - u)`` and ``min(u - V_minus)``.
    """
    hypotheses = tuple(hypotheses)
    if hypotheses:
        return EnvelopeReport(False, False, "hypotheses not met", math.nan, math.nan, reasons=hypotheses)
    worst_up, worst_lo = math.inf, math.inf
    fail = None
    for k, (u, vp, vm) in enumerate(zip(u_trace, V_plus_trace, V_minus_trace)):
        up = vp.values - u.values
        lo = u.values - vm.values
        if up.min() < worst_up:
            worst_up = float(up.min())
        if lo.min() < worst_lo:
            worst_lo = float(lo.min())
        if fail is None:
            if up.min() < -tol_discrete:
                node = np.unravel_index(int(np.argmin(up)), up.shape)
                fail = (k, tuple(int(i) for i in node), "upper")
            elif lo.min() < -tol_discrete:
                node = np.unravel_index(int(np.argmin(lo)), lo.shape)
                fail = (k, tuple(int(i) for i in node), "lower")
    if fail is None:
        return EnvelopeReport(True, True, "enclosed", worst_up, worst_lo)
    return EnvelopeReport(False, True, "barrier violated", worst_up, worst_lo, *fail)


def check_barrier_hypotheses(envelopes, data, u_stat):
    """Measured preconditions of the barrier bounds; returns failure messages."""
    reasons = []
    m = data.m
    if not data.nu > 0:
        reasons.append("E_m[u] not bounded below by a positive constant")
    for name in ("h1_plus", "h2_plus", "h_minus"):
        h = getattr(envelopes, name)
        if np.any(h <= 0):
            reasons.append(f"{name} not positive")
        if np.any(np.diff(h) > 0):
            reasons.append(f"{name} not non-increasing")
    h_plus, _ = composite_h_plus(envelopes, data)
    if not h_plus[0] < 1.0 / m:
        reasons.append("h_plus(0) >= 1/m")
    traces = stationary_traces(u_stat)
    if np.any(traces[..., 1 : m + 1] <= 0):
        reasons.append("stationary solution not m-admissible on the grid")
    return reasons


@dataclass
class BarrierCurves:
    """Barrier profiles sampled on the envelope times."""

    times: np.ndarray
    theta_plus: np.ndarray
    theta_minus: np.ndarray
    sigma_plus: np.ndarray
    sigma_minus: np.ndarray
    upper: np.ndarray
    lower: np.ndarray
    clamped: bool = False


def barrier_curves(envelopes, data):
    tp_spec = theta_plus_spec(envelopes, data)
    tm_spec = theta_minus_spec(envelopes, data)
    times = envelopes.times
    tp, _ = theta_eval(tp_spec, times)
    tm, _ = theta_eval(tm_spec, times)
    _, clamped = composite_h_plus(envelopes, data)
    return BarrierCurves(
        times=times,
        theta_plus=tp,
        theta_minus=tm,
        sigma_plus=np.atleast_1d(sigma_from_theta(tp, data.m)),
        sigma_minus=np.atleast_1d(sigma_from_theta(tm, data.m)),
        upper=np.atleast_1d(upper_bound(data, tp_spec, times)),
        lower=np.atleast_1d(lower_bound(data, tm_spec, times)),
        clamped=clamped,
    )


def barrier_traces(curves, u_stat, data):
    """Upper and lower barrier fields at every curve time."""
    V_plus = [barrier_field(s, u_stat, data.A_plus) for s in curves.sigma_plus]
    V_minus = [barrier_field(s, u_stat, data.A_minus) for s in curves.sigma_minus]
    return V_plus, V_minus


def fit_decay_rate(times, distances, floor=1e-13):
    """Least-squares rate ``lambda`` in ``dist ~ C exp(-lambda t)``."""
    times = np.asarray(times, dtype=float)
    distances = np.asarray(distances, dtype=float)
    sel = np.isfinite(distances) & (distances > floor)
    if sel.sum() < 2:
        return math.nan
    slope, _ = np.polyfit(times[sel], np.log(distances[sel]), 1)
    return float(-slope)


@dataclass(frozen=True)
class AttractionCertificate:
    status: str
    certified_bound: float
    upper_bound: float
    lower_bound: float
    final_distance: float
    fitted_rate: float
    barrier_rate: float
    bracket_holds: bool
    worst_bracket_gap: float
    details: dict = field(default_factory=dict)


def attraction_certificate(times, distances, envelopes, data, curves=None, tol=0.0,
                           rate_times=None, rate_distances=None):
    """Certified sup-norm bracket at the final time plus an empirical decay rate.

    ``distances[k]`` is the measured ``sup |u(., t_k) - u_stat|`` at the envelope
    times.  Status is ``"attracted"`` when every envelope has reached its floor
    by the final time and ``"bounded, not attracted"`` otherwise.  The rate is
    fitted on ``rate_times``/``rate_distances`` when given (typically the
    per-step trace), else on the envelope samples.
    """
    if curves is None:
        curves = barrier_curves(envelopes, data)
    distances = np.asarray(distances, dtype=float)
    bracket = np.maximum(curves.upper, -curves.lower)
    gaps = distances - bracket
    eps = envelopes.eps_h
    settled = all(
        getattr(envelopes, name)[-1] <= eps * (1 + 1e-9) for name in ("h1_plus", "h2_plus", "h_minus")
    )
    if rate_times is None:
        rate_times, rate_distances = curves.times, distances
    return AttractionCertificate(
        status="attracted" if settled else "bounded, not attracted",
        certified_bound=float(bracket[-1]),
        upper_bound=float(curves.upper[-1]),
        lower_bound=float(curves.lower[-1]),
        final_distance=float(distances[-1]),
        fitted_rate=fit_decay_rate(rate_times, rate_distances),
        barrier_rate=float(min(data.b_plus, data.b_minus)),
        bracket_holds=bool(np.all(gaps <= tol)),
        worst_bracket_gap=float(gaps.max()),
        details={"b_plus": data.b_plus, "b_minus": data.b_minus, "clamped": curves.clamped},
    )


def poisson_split(u_stat, nu, mu, dim=None):
    """Split ``u_stat = u1 + u2`` with ``u1 = (u + C|x|^2)/2``, ``u2 = (u - C|x|^2)/2``.

    ``C = (mu + nu) / (2 dim)``.  When ``|lap u| <= mu`` both ``lap u1`` and
    ``lap(-u2)`` are at least ``nu / 2``; this is checked on the grid and the
    first violating interior node is reported.  Returns ``(u1, u2, C, report)``.
    """
    grid = u_stat.grid
    dim = grid.dim if dim is None else dim
    if not nu > 0:
        raise DomainError("nu must be > 0")
    C = (mu + nu) / (2.0 * dim)
    r2 = sum(x * x for x in grid.coords())
    u1 = ScalarField(grid, 0.5 * (u_stat.values + C * r2))
    u2 = ScalarField(grid, u_stat.values - u1.values)
    lap1 = np.trace(hessian_values(u1.values, grid), axis1=-2, axis2=-1)
    lap2 = -np.trace(hessian_values(u2.values, grid), axis1=-2, axis2=-1)
    worst = np.minimum(lap1, lap2)
    bad = worst < nu / 2 - 1e-12 * max(1.0, abs(nu))
    node = None
    if bad.any():
        flat = int(np.argmax(bad.ravel()))
        node = tuple(int(i) + 1 for i in np.unravel_index(flat, grid.interior_shape))
    report = SplitReport(C, float(lap1.min()), float(lap2.min()), node is None, node)
    return u1, u2, C, report


@dataclass(frozen=True)
class SplitReport:
    C: float
    min_lap_u1: float
    min_lap_neg_u2: float
    passed: bool
    failing_node: Optional[tuple] = None
