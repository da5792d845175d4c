"""The m-Hessian evolution operator and its explicit time stepping.

The equation ``E_m[u] = -u_t T_{m-1}(u_xx) + T_m(u_xx) = f`` is advanced by solving
pointwise for the time derivative,

    u_t = (T_m(u_xx) - f) / T_{m-1}(u_xx),

and taking forward Euler steps on the interior nodes, with Dirichlet data
re-imposed on the boundary after every step.
"""

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._validation import check_order
from .exceptions import DegeneracyError, DomainError
from .grid import GridSpec, ScalarField, format_float, hessian_values
from .trace_core import trace_derivative_batch, traces_batch

TRACE_COLUMNS = ("t", "dt", "sup_residual", "min_Tm1", "min_Em", "admissible", "dist_to_reference")

COND_CONE = "S in K_{m-1}"
COND_EM = "E_m > 0"


@dataclass
class ProblemSpec:
    """First initial-boundary value problem for ``E_m[u] = f``.

    ``f(*xs, t)`` and ``phi(*xs, t)`` are vectorized samplers on coordinate
    arrays.  ``phi`` supplies the lateral boundary values; ``initial(*xs)``
    supplies the data at ``t = 0`` and defaults to ``phi(., 0)``.

    ``dt=None`` selects the adaptive step of :func:`suggest_dt`.
    ``orientation=-1`` evolves on the mirrored branch (``-u`` admissible),
    which leaves the equation unchanged only for even ``m``; ``"auto"`` picks
    the branch from the initial data.
    """

    m: int
    grid: GridSpec
    f: Callable
    phi: Callable
    initial: Optional[Callable] = None
    t_end: float = 1.0
    dt: Optional[float] = None
    safety: float = 0.5
    dt_cap: float = 1e-2
    eps_stationary: float = 1e-8
    t_min_floor: float = 1e-8
    admissibility_tol: float = 0.0
    orientation: object = 1

    def __post_init__(self):
        self.m = check_order(self.m, self.grid.dim)
        if not self.t_end >= 0:
            raise DomainError("t_end must be >= 0")
        for name in ("safety", "dt_cap", "eps_stationary", "t_min_floor"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be > 0")
        if self.dt is not None and not self.dt > 0:
            raise DomainError("dt must be > 0")
        if self.orientation not in (1, -1, "auto"):
            raise DomainError("orientation must be 1, -1 or 'auto'")
        if self.orientation == -1 and self.m % 2:
            raise DomainError("the mirrored branch needs an even m")

    def sample_f(self, t):
        return self.grid.sample(self.f, t).values

    def sample_phi(self, t):
        return np.array(self.grid.sample(self.phi, t).values)

    def initial_field(self):
        if self.initial is None:
            return self.grid.sample(self.phi, 0.0)
        return self.grid.sample(self.initial)

    def resolved_orientation(self, u0=None):
        if self.orientation != "auto":
            return self.orientation
        if u0 is None:
            u0 = self.initial_field()
        t = traces_batch(hessian_values(u0.values, self.grid))
        if np.any(np.all(t[..., 1 : self.m] > self.t_min_floor, axis=-1)):
            return 1
        if self.m % 2 == 0:
            flipped = traces_batch(-hessian_values(u0.values, self.grid))
            if np.any(np.all(flipped[..., 1 : self.m] > self.t_min_floor, axis=-1)):
                return -1
        return 1


@dataclass(frozen=True)
class StepRecord:
    t: float
    dt: float
    sup_residual: float
    min_Tm1: float
    min_Em: float
    admissible: bool
    dist_to_reference: float


@dataclass
class EvolutionTrace:
    """Per-step diagnostics plus optional field snapshots ``(t, ScalarField)``."""

    records: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    stopped: str = ""

    def append(self, record):
        if self.records and not record.t > self.records[-1].t:
            raise DomainError("trace times must increase strictly")
        self.records.append(record)

    def column(self, name):
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    @property
    def times(self):
        return self.column("t")

    def __len__(self):
        return len(self.records)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(TRACE_COLUMNS)
            for r in self.records:
                writer.writerow(
                    [format_float(r.t), format_float(r.dt), format_float(r.sup_residual),
                     format_float(r.min_Tm1), format_float(r.min_Em), int(r.admissible),
                     format_float(r.dist_to_reference)]
                )


@dataclass(frozen=True)
class AdmissibilityReport:
    is_admissible: bool
    failing_node: Optional[tuple] = None
    failing_condition: Optional[str] = None
    min_Tm1: float = math.nan
    min_Em: float = math.nan
    margins: Optional[np.ndarray] = None


def _interior(values, grid):
    values = values.values if isinstance(values, ScalarField) else np.asarray(values, dtype=float)
    if values.shape == grid.res:
        return values[grid.interior]
    if values.shape == grid.interior_shape:
        return values
    raise DomainError(f"array of shape {values.shape} does not match grid {grid.res}")


def apply_em(u_t, H, m):
    """``-u_t T_{m-1}(H) + T_m(H)`` on interior nodes; returns an interior-shaped array."""
    grid = H.grid
    m = check_order(m, grid.dim)
    t = traces_batch(H.values)
    return -_interior(u_t, grid) * t[..., m - 1] + t[..., m]


def _to_node(flat_index, grid):
    inner = np.unravel_index(flat_index, grid.interior_shape)
    return tuple(int(i) + 1 for i in inner)


def _admissibility_from_traces(traces, em, m, tol, grid):
    """Row-major first failure of ``S in K_{m-1}`` / ``E_m > tol`` per interior node."""
    cone_ok = np.all(traces[..., 1:m] > tol, axis=-1)
    em_ok = em > tol
    ok = cone_ok & em_ok
    min_tm1 = float(traces[..., m - 1].min())
    min_em = float(em.min())
    if bool(ok.all()):
        return AdmissibilityReport(True, None, None, min_tm1, min_em, traces[..., 1:m])
    flat = int(np.argmin(ok.ravel()))
    node = _to_node(flat, grid)
    cond = COND_CONE if not cone_ok.ravel()[flat] else COND_EM
    return AdmissibilityReport(False, node, cond, min_tm1, min_em, traces[..., 1:m])


def admissibility_check(u, u_t, m, tol=0.0, orientation=1):
    """Check ``u_xx in K_{m-1}`` and ``E_m[u] > tol`` at every interior node.

    With ``orientation=-1`` the check is applied to ``-u``.
    """
    grid = u.grid
    m = check_order(m, grid.dim)
    H = orientation * hessian_values(u.values, grid)
    traces = traces_batch(H)
    em = -orientation * _interior(u_t, grid) * traces[..., m - 1] + traces[..., m]
    return _admissibility_from_traces(traces, em, m, tol, grid)


def _rate(H, f_inner, m):
    traces = traces_batch(H)
    # degenerate nodes are caught by the floor check that follows every call
    with np.errstate(divide="ignore", invalid="ignore"):
        rate = (traces[..., m] - f_inner) / traces[..., m - 1]
    return traces, rate


def _raise_degenerate(traces, m, orientation, floor, grid, step=None, trace=None):
    tm1 = orientation ** (m - 1) * traces[..., m - 1]
    if tm1.min() >= floor:
        return
    node = _to_node(int(np.argmin(tm1.ravel())), grid)
    raise DegeneracyError(
        f"T_{m - 1}(u_xx) = {tm1.min():.3e} below floor {floor:.1e} at node {node}",
        node=node,
        condition=COND_CONE,
        step=step,
        trace=trace,
    )


def step_explicit(u, t, dt, spec, orientation=None):
    """One forward Euler step from ``u`` at time ``t``.

    Interior: ``u + dt (T_m(u_xx) - f(., t)) / T_{m-1}(u_xx)``; boundary nodes
    are overwritten with ``phi(., t + dt)``.
    """
    grid = u.grid
    if orientation is None:
        orientation = spec.resolved_orientation(u)
    H = hessian_values(u.values, grid)
    traces, rate = _rate(H, spec.sample_f(t)[grid.interior], spec.m)
    _raise_degenerate(traces, spec.m, orientation, spec.t_min_floor, grid)
    new = spec.sample_phi(t + dt)
    new[grid.interior] = u.values[grid.interior] + dt * rate
    return ScalarField(grid, new)


def _dt_from_traces(H, traces, spec, orientation):
    m = spec.m
    if m == 1:
        gmax = 1.0
    else:
        grad = trace_derivative_batch(H, m, traces)
        gmax = np.abs(grad).max(axis=(-2, -1))
    tm1 = orientation ** (m - 1) * traces[..., m - 1]
    ratio = tm1 / np.maximum(gmax, np.finfo(float).tiny)
    h2 = min(h * h for h in spec.grid.spacing)
    dt = spec.safety * h2 * float(ratio.min()) / (2.0 * spec.grid.dim)
    return min(dt, spec.dt_cap)


def suggest_dt(u, spec, orientation=None):
    """Stable explicit step ``safety * h^2 * min(T_{m-1} / max|dT_m/dS|) / (2 dim)``."""
    grid = u.grid
    if orientation is None:
        orientation = spec.resolved_orientation(u)
    H = hessian_values(u.values, grid)
    traces = traces_batch(H)
    _raise_degenerate(traces, spec.m, orientation, spec.t_min_floor, grid)
    return _dt_from_traces(H, traces, spec, orientation)


def run(spec, reference=None, *, initial=None, permissive=False, record_every=0, max_steps=None):
    """Evolve from the initial data until ``t_end`` or stationarity.

    Stops early once ``sup|u^{k+1} - u^k| / dt < eps_stationary``.  Snapshots
    are stored every ``record_every`` steps (0 disables; the initial and final
    fields are always kept when enabled).  Returns ``(u_final, trace)``.

    Unless ``permissive`` is set, the initial data must pass the admissibility
    check; a failure raises :class:`DegeneracyError` at step 0.
    """
    grid = spec.grid
    m = spec.m
    u = spec.initial_field() if initial is None else initial
    orientation = spec.resolved_orientation(u)
    trace = EvolutionTrace()
    ref = None if reference is None else reference.values
    t = 0.0
    step = 0
    if record_every:
        trace.snapshots.append((t, u))

    while t < spec.t_end and (max_steps is None or step < max_steps):
        H = hessian_values(u.values, grid)
        f_inner = spec.sample_f(t)[grid.interior]
        traces, rate = _rate(H, f_inner, m)
        try:
            _raise_degenerate(traces, m, orientation, spec.t_min_floor, grid, step=step, trace=trace)
        except DegeneracyError:
            trace.stopped = "degenerate"
            raise
        oriented = traces if orientation == 1 else traces * (-1.0) ** np.arange(traces.shape[-1])
        em = -orientation * rate * oriented[..., m - 1] + oriented[..., m]
        adm = _admissibility_from_traces(oriented, em, m, spec.admissibility_tol, grid)
        if step == 0 and not adm.is_admissible and not permissive:
            trace.stopped = "inadmissible"
            raise DegeneracyError(
                f"initial data not admissible: {adm.failing_condition} fails at node {adm.failing_node}",
                node=adm.failing_node,
                condition=adm.failing_condition,
                step=0,
                trace=trace,
            )

        dt = spec.dt if spec.dt is not None else _dt_from_traces(H, traces, spec, orientation)
        dt = min(dt, spec.t_end - t)
        if dt <= 0:
            break
        t_new = t + dt
        new = spec.sample_phi(t_new)
        new[grid.interior] = u.values[grid.interior] + dt * rate
        change = float(np.max(np.abs(new - u.values))) / dt

        u_t = (new[grid.interior] - u.values[grid.interior]) / dt
        em_actual = -u_t * traces[..., m - 1] + traces[..., m]
        trace.append(
            StepRecord(
                t=t_new,
                dt=dt,
                sup_residual=float(np.max(np.abs(em_actual - f_inner))),
                min_Tm1=adm.min_Tm1,
                min_Em=adm.min_Em,
                admissible=adm.is_admissible,
                dist_to_reference=float("nan") if ref is None else float(np.max(np.abs(new - ref))),
            )
        )
        u = ScalarField(grid, new)
        t = t_new
        step += 1
        if record_every and step % record_every == 0:
            trace.snapshots.append((t, u))
        if change < spec.eps_stationary:
            trace.stopped = "stationary"
            break
    else:
        trace.stopped = "t_end" if t >= spec.t_end else "max_steps"

    if record_every and trace.snapshots[-1][0] != t:
        trace.snapshots.append((t, u))
    return u, trace


@dataclass(frozen=True)
class CompatibilityReport:
    max_violation: float
    node: Optional[tuple]
    passed: bool
    tol: float


def check_compatibility(spec, tol, dt=None):
    """First-order matching of data and equation next to the lateral boundary at t = 0.

    Evaluates ``-phi_t T_{m-1}(phi_xx) + T_m(phi_xx) - f(., 0)`` at the
    boundary-adjacent interior nodes, ``phi_t`` by a forward difference of the
    boundary data over the first step ``dt``.
    """
    grid = spec.grid
    u0 = spec.initial_field()
    if dt is None:
        dt = spec.dt
    if dt is None:
        try:
            dt = suggest_dt(u0, spec)
        except DegeneracyError:
            dt = spec.dt_cap
    phi_t = (spec.sample_phi(dt) - spec.sample_phi(0.0)) / dt
    H = hessian_values(u0.values, grid)
    residual = apply_em_from_hessian(phi_t[grid.interior], H, spec.m) - spec.sample_f(0.0)[grid.interior]
    mask = grid.boundary_adjacent_mask()[grid.interior]
    vals = np.where(mask, np.abs(residual), -np.inf)
    flat = int(np.argmax(vals.ravel()))
    worst = float(vals.ravel()[flat])
    return CompatibilityReport(worst, _to_node(flat, grid), worst <= tol, tol)


def apply_em_from_hessian(u_t_inner, H, m):
    t = traces_batch(H)
    return -u_t_inner * t[..., m - 1] + t[..., m]


@dataclass(frozen=True)
class ComparisonReport:
    passed: bool
    hypotheses_met: bool
    status: str
    max_excess: float
    failing_step: Optional[int] = None
    failing_node: Optional[tuple] = None
    tol_discrete: float = 0.0
    hypothesis_failure: Optional[str] = None


def _em_series(fields, times, m, grid):
    """E_m at every interior node using forward time differences."""
    out = []
    for k in range(len(fields) - 1):
        dt = times[k + 1] - times[k]
        u_t = (fields[k + 1].values - fields[k].values)[grid.interior] / dt
        H = hessian_values(fields[k].values, grid)
        traces = traces_batch(H)
        out.append((traces, -u_t * traces[..., m - 1] + traces[..., m]))
    return out


def verify_comparison(w_trace, v_trace, times, spec, tol, C=10.0):
    """Discrete check of the comparison principle ``w <= v``.

    Hypotheses: ``w`` admissible at every recorded time, ``E_m[w] >= E_m[v] - tol``
    on the interior and ``w <= v + tol`` on the parabolic boundary.  When they
    hold, the conclusion ``w <= v + tol + C h^2`` is checked at every node and
    time.  If they do not, the report says so and no conclusion is drawn.
    """
    grid = spec.grid
    m = spec.m
    times = np.asarray(times, dtype=float)
    if not (len(w_trace) == len(v_trace) == len(times)) or len(times) < 2:
        raise DomainError("w, v and times must have the same length >= 2")
    if any(w.grid != grid or v.grid != grid for w, v in zip(w_trace, v_trace)):
        raise DomainError("all fields must live on the problem grid")
    h2 = max(h * h for h in grid.spacing)
    tol_discrete = tol + C * h2

    def failed(reason, step, node):
        return ComparisonReport(False, False, "hypotheses not met", math.nan, step, node,
                                tol_discrete, reason)

    w_em = _em_series(w_trace, times, m, grid)
    v_em = _em_series(v_trace, times, m, grid)
    for k, ((tw, ew), (_, ev)) in enumerate(zip(w_em, v_em)):
        adm = _admissibility_from_traces(tw, ew, m, 0.0, grid)
        if not adm.is_admissible:
            return failed(f"w not admissible: {adm.failing_condition}", k, adm.failing_node)
        gap = ew - ev + tol
        if gap.min() < 0:
            return failed("E_m[w] < E_m[v] - tol", k, _to_node(int(np.argmin(gap.ravel())), grid))

    bmask = grid.boundary_mask()
    for k, (w, v) in enumerate(zip(w_trace, v_trace)):
        diff = w.values - v.values
        region = np.ones(grid.res, dtype=bool) if k == 0 else bmask
        excess = np.where(region, diff, -np.inf)
        flat = int(np.argmax(excess.ravel()))
        if excess.ravel()[flat] > tol:
            node = tuple(int(i) for i in np.unravel_index(flat, grid.res))
            return failed("w > v + tol on the parabolic boundary", k, node)

    worst, worst_step, worst_node = -np.inf, None, None
    for k, (w, v) in enumerate(zip(w_trace, v_trace)):
        diff = w.values - v.values
        flat = int(np.argmax(diff.ravel()))
        if diff.ravel()[flat] > worst:
            worst = float(diff.ravel()[flat])
            worst_step = k
            worst_node = tuple(int(i) for i in np.unravel_index(flat, grid.res))
    passed = worst <= tol_discrete
    return ComparisonReport(
        passed, True, "w <= v holds" if passed else "w <= v violated", worst,
        None if passed else worst_step, None if passed else worst_node, tol_discrete,
    )
