import numpy as np
import pytest

from hessflow.evolution import (
    COND_CONE,
    COND_EM,
    ProblemSpec,
    admissibility_check,
    apply_em,
    check_compatibility,
    run,
    step_explicit,
    suggest_dt,
    verify_comparison,
)
from hessflow.exceptions import DegeneracyError, DomainError
from hessflow.grid import GridSpec, hessian_central


def bump(x, y):
    return np.sin(np.pi * x) * np.sin(np.pi * y)


def ma_stat(x, y, t=0.0):
    return 0.5 * (x * x + y * y - 1.0)


def heat_stat(x, y, t=0.0):
    return 0.5 * (x * x + y * y)


def const(c):
    return lambda *args: c + 0.0 * args[0]


def test_apply_em_heat_and_monge_ampere(rng):
    g = GridSpec.square(2, res=9)
    u = g.sample(lambda x, y: x**3 + x * y**2 + 2 * y * y)
    H = hessian_central(u)
    u_t = rng.normal(size=g.res)
    inner = u_t[g.interior]
    lap = H.values[..., 0, 0] + H.values[..., 1, 1]
    det = np.linalg.det(H.values)
    assert np.allclose(apply_em(u_t, H, 1), -inner + lap)
    assert np.allclose(apply_em(u_t, H, 2), -inner * lap + det)


def test_apply_em_identity_hessian():
    g = GridSpec.square(3, res=5)
    H = hessian_central(g.sample(lambda x, y, z: 0.5 * (x * x + y * y + z * z)))
    assert np.allclose(apply_em(np.zeros(g.res), H, 2), 3.0)


def test_apply_em_second_order():
    def err(res):
        g = GridSpec.square(2, res=res)
        u = g.sample(lambda x, y: np.exp(x) * np.cos(y) + x * x + y * y)
        x, y = (c[g.interior] for c in g.coords())
        uxx = np.exp(x) * np.cos(y) + 2
        uyy = -np.exp(x) * np.cos(y) + 2
        uxy = -np.exp(x) * np.sin(y)
        u_t = np.full(g.res, 0.3)
        exact = -0.3 * (uxx + uyy) + uxx * uyy - uxy**2
        return np.max(np.abs(apply_em(u_t, hessian_central(u), 2) - exact))

    ratio = err(33) / err(65)
    assert abs(ratio - 4.0) <= 0.2 * 4.0


def test_admissibility_examples():
    g = GridSpec.square(3, res=5)
    u = g.sample(lambda x, y, z: x * x + y * y + z * z)
    zero = np.zeros(g.res)
    for m in (1, 2, 3):
        assert admissibility_check(u, zero, m).is_admissible

    g2 = GridSpec.square(2, res=9)
    saddle = g2.sample(lambda x, y: 0.5 * (x * x - y * y))
    rep = admissibility_check(saddle, np.zeros(g2.res), 2)
    assert not rep.is_admissible
    assert rep.failing_condition == COND_CONE
    assert rep.failing_node == (1, 1)

    # heat case: only the sign of E_1 matters
    u = g2.sample(lambda x, y: -(x * x + y * y))
    assert not admissibility_check(u, np.zeros(g2.res), 1).is_admissible
    rep = admissibility_check(u, np.full(g2.res, -5.0), 1)
    assert rep.is_admissible
    rep = admissibility_check(u, np.full(g2.res, -4.0), 1, tol=0.5)
    assert not rep.is_admissible and rep.failing_condition == COND_EM


def test_admissibility_mirror():
    g = GridSpec.square(2, res=9)
    u = g.sample(lambda x, y: -ma_stat(x, y))
    assert not admissibility_check(u, np.zeros(g.res), 2).is_admissible
    assert admissibility_check(u, np.zeros(g.res), 2, orientation=-1).is_admissible


def test_stationary_fixed_point():
    g = GridSpec.square(2, res=17)
    spec = ProblemSpec(2, g, f=const(1.0), phi=ma_stat, t_end=1.0)
    u0 = spec.initial_field()
    u1 = step_explicit(u0, 0.0, suggest_dt(u0, spec), spec)
    assert np.max(np.abs(u1.values - u0.values)) <= 1e-12


def test_heat_update_direction():
    g = GridSpec.square(2, res=65)
    spec = ProblemSpec(1, g, f=const(2.0), phi=heat_stat, t_end=1.0)
    u0 = g.sample(lambda x, y: heat_stat(x, y) + bump(x, y))
    dt = 1e-5
    rate = (step_explicit(u0, 0.0, dt, spec).values - u0.values) / dt
    expected = -2 * np.pi**2 * g.sample(bump).values
    assert np.max(np.abs(rate - expected)) <= 5e-3 * 2 * np.pi**2


def test_large_source_decreases_u():
    g = GridSpec.square(2, res=9)
    spec = ProblemSpec(1, g, f=const(10.0), phi=heat_stat, t_end=1.0)
    u0 = spec.initial_field()
    u1 = step_explicit(u0, 0.0, 1e-3, spec)
    assert np.all(u1.interior < u0.interior)


def test_suggest_dt_heat_formula():
    for res in (17, 33):
        g = GridSpec.square(2, res=res)
        spec = ProblemSpec(1, g, f=const(2.0), phi=heat_stat, safety=0.5)
        h = 1.0 / (res - 1)
        assert suggest_dt(spec.initial_field(), spec) == pytest.approx(0.5 * h * h / 4, rel=1e-12)


def test_suggest_dt_refinement_and_scaling():
    def dt_for(res, scale):
        g = GridSpec.square(2, res=res)
        spec = ProblemSpec(2, g, f=const(1.0), phi=lambda x, y, t: scale * (ma_stat(x, y) + 0.1 * x * y))
        return suggest_dt(spec.initial_field(), spec)

    assert dt_for(33, 1.0) / dt_for(65, 1.0) == pytest.approx(4.0, rel=1e-9)
    assert dt_for(33, 10.0) == pytest.approx(dt_for(33, 1.0), rel=1e-12)


def test_dt_cap():
    g = GridSpec.square(2, res=5)
    spec = ProblemSpec(1, g, f=const(2.0), phi=heat_stat, dt_cap=1e-4)
    assert suggest_dt(spec.initial_field(), spec) == 1e-4


def test_run_already_stationary():
    g = GridSpec.square(2, res=17)
    spec = ProblemSpec(1, g, f=const(2.0), phi=heat_stat, t_end=1.0)
    ref = g.sample(heat_stat)
    u, trace = run(spec, ref)
    assert trace.stopped == "stationary"
    assert np.max(np.abs(u.values - ref.values)) <= 1e-12
    assert len(trace) == 1


def test_run_records_and_times():
    g = GridSpec.square(2, res=17)
    spec = ProblemSpec(2, g, f=const(1.0), phi=ma_stat, t_end=0.01,
                       initial=lambda x, y: ma_stat(x, y) + 0.025 * bump(x, y) ** 2)
    u, trace = run(spec, g.sample(ma_stat), record_every=5)
    t = trace.times
    assert np.all(np.diff(t) > 0)
    assert t[-1] == pytest.approx(0.01)
    assert trace.stopped == "t_end"
    assert all(r.admissible for r in trace.records)
    assert trace.snapshots[0][0] == 0.0 and trace.snapshots[-1][0] == t[-1]
    assert np.all(np.diff(trace.column("dist_to_reference")) <= 1e-15)


def test_run_degenerate_initial_data():
    g = GridSpec.square(2, res=17)
    spec = ProblemSpec(2, g, f=const(1.0), phi=lambda x, y, t: 0.5 * (x * x - y * y))
    with pytest.raises(DegeneracyError) as exc:
        run(spec)
    err = exc.value
    assert err.condition == COND_CONE
    assert err.step == 0
    assert err.node == (1, 1)
    assert err.trace.stopped == "degenerate"


def test_run_inadmissible_but_permissive():
    g = GridSpec.square(2, res=9)
    # the solved u_t gives E_1 = f = -1 < 0: inadmissible, but not degenerate
    spec = ProblemSpec(1, g, f=const(-1.0), phi=heat_stat, t_end=1e-3)
    with pytest.raises(DegeneracyError) as exc:
        run(spec)
    assert exc.value.condition == COND_EM
    _, trace = run(spec, permissive=True)
    assert not trace.records[0].admissible


def test_max_steps():
    g = GridSpec.square(2, res=9)
    spec = ProblemSpec(1, g, f=const(2.0), phi=heat_stat, initial=lambda x, y: heat_stat(x, y) + bump(x, y))
    _, trace = run(spec, max_steps=3)
    assert len(trace) == 3 and trace.stopped == "max_steps"


def test_problem_spec_validation():
    g = GridSpec.square(2, res=9)
    with pytest.raises(DomainError):
        ProblemSpec(3, g, f=const(1.0), phi=heat_stat)
    with pytest.raises(DomainError):
        ProblemSpec(1, g, f=const(1.0), phi=heat_stat, orientation=-1)
    with pytest.raises(DomainError):
        ProblemSpec(1, g, f=const(1.0), phi=heat_stat, t_end=-1)


def test_mirror_orientation_auto():
    g = GridSpec.square(2, res=9)
    spec = ProblemSpec(2, g, f=const(1.0), phi=lambda x, y, t: -ma_stat(x, y), orientation="auto")
    assert spec.resolved_orientation() == -1


def test_compatibility_examples():
    g = GridSpec.square(2, res=33)
    spec = ProblemSpec(2, g, f=const(1.0), phi=ma_stat)
    rep = check_compatibility(spec, 1e-8)
    assert rep.passed and rep.max_violation <= 1e-8

    # heat: phi_t = lap(phi) - f on the boundary
    spec = ProblemSpec(1, g, f=const(0.0), phi=lambda x, y, t: np.exp(-2 * np.pi**2 * t) * bump(x, y)
                       + x * y + 0.5 * (x * x - y * y))
    rep = check_compatibility(spec, 1e-2, dt=1e-7)
    assert rep.passed

    bad = ProblemSpec(1, g, f=const(5.0), phi=heat_stat)
    assert not check_compatibility(bad, 1e-3).passed


def _short_run(res=17):
    g = GridSpec.square(2, res=res)
    spec = ProblemSpec(2, g, f=const(1.0), phi=ma_stat, t_end=0.02,
                       initial=lambda x, y: ma_stat(x, y) + 0.025 * bump(x, y) ** 2)
    _, trace = run(spec, record_every=4)
    times = [t for t, _ in trace.snapshots]
    return spec, times, [u for _, u in trace.snapshots]


@pytest.mark.parametrize("eps", [1e-3, 1e-1])
def test_comparison_shifted_copy_passes(eps):
    spec, times, w = _short_run()
    v = [u + eps * t for t, u in zip(times, w)]
    rep = verify_comparison(w, v, times, spec, tol=0.0)
    assert rep.hypotheses_met and rep.passed
    assert rep.max_excess <= 0.0


def test_comparison_equal_fields_pass():
    spec, times, w = _short_run()
    rep = verify_comparison(w, list(w), times, spec, tol=0.0)
    assert rep.passed and rep.max_excess == 0.0


def test_comparison_hypothesis_failure_is_not_a_conclusion():
    spec, times, w = _short_run()
    v = [u + 1e-3 * t for t, u in zip(times, w)]
    node = (8, 8)
    vals = np.array(v[3].values)
    vals[node] -= 0.05
    v[3] = v[3].with_values(vals)
    rep = verify_comparison(w, v, times, spec, tol=0.0)
    assert not rep.hypotheses_met and not rep.passed
    assert rep.status == "hypotheses not met"
    assert rep.failing_node == node


def test_comparison_tolerance_band():
    spec, times, w = _short_run()
    rep = verify_comparison(w, list(w), times, spec, tol=1e-4, C=3.0)
    assert rep.tol_discrete == pytest.approx(1e-4 + 3.0 / 16**2)
    with pytest.raises(DomainError):
        verify_comparison(w, w[:-1], times, spec, tol=0.0)
