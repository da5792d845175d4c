"""Scenario execution: runs a parsed config and writes every output file.

Exit codes: 0 success, 1 configuration error, 2 solver degeneracy,
3 certificate hypotheses not met, 4 a checked conclusion failed (barrier
enclosure or comparison violated, or stationarity not reached).
"""

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..barriers import barrier_traces, fit_decay_rate, poisson_split
from ..cones import cone_membership_def, is_m_positive_sylvester
from ..estimators import BarrierCertifier
from ..evolution import ProblemSpec, check_compatibility, run, verify_comparison
from ..exceptions import ConfigError, DegeneracyError, DomainError
from ..geometry import (
    classify_m_convex,
    cylinder,
    ellipsoid,
    p_curvatures,
    plane,
    polynomial_graph,
    sphere,
    torus,
)
from ..grid import GridSpec, ScalarField, dump_field, format_float, hessian_values, load_field
from ..trace_core import traces_batch
from .config import get_bool, get_float, get_int

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DEGENERATE = 2
EXIT_HYPOTHESES = 3
EXIT_FAILED = 4

BARRIER_COLUMNS = ("t", "theta_plus", "theta_minus", "upper_bound", "lower_bound",
                   "measured_sup_dist", "envelope_ok")


@dataclass
class ExitReport:
    code: int
    message: str
    summary: dict = field(default_factory=dict)
    files: dict = field(default_factory=dict)


# ---------------------------------------------------------------- output helpers


def _json_value(v, indent):
    pad = "  " * (indent + 1)
    if isinstance(v, dict):
        if not v:
            return "{}"
        items = [f'{pad}"{k}": {_json_value(v[k], indent + 1)}' for k in v]
        return "{\n" + ",\n".join(items) + "\n" + "  " * indent + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_json_value(x, indent + 1) for x in v) + "]"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return "null"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format_float(v) if math.isfinite(v) else "null"
    s = str(v).replace("\\", "\\\\").replace('"', '\\"')
    return f'"{s}"'


def write_summary(summary, path):
    """JSON with floats at 17 significant digits, keys in insertion order."""
    Path(path).write_text(_json_value(summary, 0) + "\n")


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_float(x) if isinstance(x, (float, np.floating)) else x for x in row])


def _fmt_node(node):
    return "" if node is None else ":".join(str(i) for i in node)


# ---------------------------------------------------------------- problem setup


def _require(cfg, what, present):
    if not present:
        raise ConfigError(f"{cfg.name}: {what} is required for command {cfg.command!r}")


def build_grid(cfg):
    _require(cfg, "[grid]", bool(cfg.grid))
    g = cfg.grid
    return GridSpec(g["dim"], g["lo"], g["hi"], g["res"])


def build_problem(cfg):
    grid = build_grid(cfg)
    _require(cfg, "[scenario] m", cfg.m is not None)
    _require(cfg, "[data] f", "f" in cfg.data)
    _require(cfg, "[data] phi", "phi" in cfg.data)
    t = cfg.time
    try:
        return ProblemSpec(
            cfg.m, grid, f=cfg.data["f"], phi=cfg.data["phi"], initial=cfg.data.get("initial"),
            t_end=t["t_end"], dt=t["dt"], safety=t["safety"], dt_cap=t["dt_cap"],
            eps_stationary=t["eps_stationary"], orientation=t["orientation"],
            t_min_floor=cfg.thresholds["t_min_floor"],
            admissibility_tol=cfg.thresholds["admissibility_tol"],
        )
    except DomainError as exc:
        raise ConfigError(f"{cfg.name}: {exc}") from None


def _write_snapshots(snapshots, directory):
    directory.mkdir(parents=True, exist_ok=True)
    rows = []
    for k, (t, u) in enumerate(snapshots):
        name = f"snap_{k:05d}.txt"
        dump_field(u, directory / name)
        rows.append((k, float(t), name))
    _write_csv(directory / "index.csv", ("k", "t", "file"), rows)


def load_snapshots(directory):
    directory = Path(directory)
    index = directory / "index.csv"
    if not index.exists():
        raise ConfigError(f"no snapshot index at {index}")
    with open(index) as fh:
        rows = list(csv.DictReader(fh))
    return [(float(r["t"]), load_field(directory / r["file"])) for r in rows]


def load_trace_columns(path):
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    return (np.array([float(r["t"]) for r in rows]),
            np.array([float(r["dist_to_reference"]) for r in rows]))


# ---------------------------------------------------------------- certification


def certify(cfg, snapshots, u_stat, f, f_stat, orientation=1, rate_times=None, rate_distances=None):
    """Barrier certificate for a stored run; mirrored runs are certified on ``-u``."""
    sec = "barrier"
    if orientation == -1:
        snapshots = [(t, -u) for t, u in snapshots]
        u_stat = -u_stat
    cert = BarrierCertifier(
        m=cfg.m,
        eps_h=get_float(cfg, sec, "eps_h", positive=True),
        safety=get_float(cfg, sec, "safety"),
        tol=get_float(cfg, sec, "tol"),
        nu=get_float(cfg, sec, "nu", allow_none=True),
    )
    cert.fit(snapshots, u_stat, f, f_stat, rate_times=rate_times, rate_distances=rate_distances)
    V_plus, V_minus = barrier_traces(cert.curves_, u_stat, cert.data_)
    c = cert.curves_
    rows = []
    for k, (t, u) in enumerate(snapshots):
        ok = bool((V_plus[k].values - u.values).min() >= -cert.tol
                  and (u.values - V_minus[k].values).min() >= -cert.tol)
        rows.append((float(t), float(c.theta_plus[k]), float(c.theta_minus[k]), float(c.upper[k]),
                     float(c.lower[k]), float(cert.distances_[k]), int(ok)))
    return cert, rows


def _certificate_summary(cert):
    env, ac, d = cert.envelope_report_, cert.certificate_, cert.data_
    return {
        "envelope_status": env.status,
        "envelope_passed": env.passed,
        "hypotheses": list(cert.hypotheses_),
        "worst_upper_margin": env.worst_upper_margin,
        "worst_lower_margin": env.worst_lower_margin,
        "failing_step": env.failing_step,
        "failing_node": _fmt_node(env.failing_node),
        "attraction_status": ac.status,
        "certified_bracket": ac.certified_bound,
        "upper_bound": ac.upper_bound,
        "lower_bound": ac.lower_bound,
        "bracket_holds": ac.bracket_holds,
        "worst_bracket_gap": ac.worst_bracket_gap,
        "fitted_rate": ac.fitted_rate,
        "barrier_rate": ac.barrier_rate,
        "clamped": bool(ac.details.get("clamped")),
        "constants": {
            "nu_m": d.nu_m, "mu_m1": d.mu_m1, "mu_m": d.mu_m, "sup_u": d.sup_u, "osc_u": d.osc_u,
            "h1_plus_0": d.h1_plus_0, "h0_minus": d.h0_minus, "nu": d.nu,
            "A_plus": d.A_plus, "A_minus": d.A_minus, "b_plus": d.b_plus, "b_minus": d.b_minus,
        },
    }


def _certificate_code(cert):
    if cert.hypotheses_:
        return EXIT_HYPOTHESES, "barrier hypotheses not met: " + "; ".join(cert.hypotheses_)
    if not cert.envelope_report_.passed:
        r = cert.envelope_report_
        return EXIT_FAILED, f"barrier {r.failing_side} violated at step {r.failing_step}, node {r.failing_node}"
    if not cert.certificate_.bracket_holds:
        return EXIT_FAILED, "measured distance exceeds the certified bracket"
    return EXIT_OK, "certified"


def _f_stat_field(cfg, grid, t_final):
    if "f_stat" in cfg.data:
        return grid.sample(cfg.data["f_stat"])
    return grid.sample(cfg.data["f"], t_final)


# ---------------------------------------------------------------- commands


def _grid_summary(grid):
    return {"dim": grid.dim, "lo": list(grid.lo), "hi": list(grid.hi), "res": list(grid.res)}


def _prefixed(name, prefix):
    return f"{prefix}{name}" if prefix else name


def _evolve_problem(cfg, spec, ref, out, files, stationary, prefix="", f_stat=None, exact=None):
    """Run one problem, write its files and certify it; returns ``(code, message, summary)``."""
    grid = spec.grid
    summary = {}
    if cfg.thresholds["compat_tol"] is not None:
        comp = check_compatibility(spec, cfg.thresholds["compat_tol"])
        summary["compatibility"] = {"passed": comp.passed, "max_violation": comp.max_violation,
                                    "node": _fmt_node(comp.node), "tol": comp.tol}
    record_every = cfg.output["record_every"]
    trace_path = out / _prefixed(cfg.output["trace"], prefix)
    files[prefix + "trace"] = trace_path
    try:
        u, trace = run(spec, ref, record_every=record_every, max_steps=cfg.time["max_steps"])
    except DegeneracyError as exc:
        if exc.trace is not None:
            exc.trace.write_csv(trace_path)
        summary.update({"status": "degenerate", "step": exc.step, "node": _fmt_node(exc.node),
                        "condition": exc.condition, "message": str(exc)})
        return EXIT_DEGENERATE, f"degenerate: {exc} [condition: {exc.condition}]", summary, None

    trace.write_csv(trace_path)
    field_path = out / _prefixed(cfg.output["field"], prefix)
    dump_field(u, field_path)
    files[prefix + "field"] = field_path
    if record_every and cfg.output["snapshots"]:
        snap_dir = out / _prefixed(cfg.output["snapshots"], prefix)
        _write_snapshots(trace.snapshots, snap_dir)
        files[prefix + "snapshots"] = snap_dir

    orientation = spec.resolved_orientation(spec.initial_field())
    t_final = float(trace.times[-1]) if len(trace) else 0.0
    adm = trace.column("admissible")
    summary.update({
        "status": "ok",
        "orientation": orientation,
        "steps": len(trace),
        "t_final": t_final,
        "stopped": trace.stopped,
        "admissibility": {
            "all_steps": bool(adm.all()) if len(adm) else True,
            "inadmissible_steps": int((adm == 0).sum()),
            "min_Tm1": float(trace.column("min_Tm1").min()) if len(trace) else math.nan,
            "min_Em": float(trace.column("min_Em").min()) if len(trace) else math.nan,
        },
    })
    code, message = EXIT_OK, "ok"
    if ref is not None:
        summary["final_sup_distance"] = float(np.max(np.abs(u.values - ref.values)))
    if exact is not None:
        summary["exact_sup_error"] = float(np.max(np.abs(u.values - grid.sample(exact, t_final).values)))

    enabled = get_bool(cfg, "barrier", "enabled", default=ref is not None)
    if enabled:
        _require(cfg, "[data] reference (for the barrier certificate)", ref is not None)
        if not record_every or len(trace.snapshots) < 2:
            raise ConfigError("barrier certificate needs [output] record_every > 0")
        if f_stat is None:
            f_stat = _f_stat_field(cfg, grid, t_final)
        cert, rows = certify(cfg, trace.snapshots, ref, spec.f, f_stat, orientation,
                             trace.times, trace.column("dist_to_reference"))
        barrier_path = out / _prefixed(cfg.output["barrier"], prefix)
        _write_csv(barrier_path, BARRIER_COLUMNS, rows)
        files[prefix + "barrier"] = barrier_path
        summary["certificate"] = _certificate_summary(cert)
        code, message = _certificate_code(cert)
    elif ref is not None and len(trace) > 1:
        summary["fitted_rate"] = fit_decay_rate(trace.times, trace.column("dist_to_reference"))

    if stationary:
        converged = trace.stopped == "stationary"
        summary["converged"] = converged
        if not converged and code == EXIT_OK:
            code, message = EXIT_FAILED, f"not stationary by t = {t_final:.6g} ({trace.stopped})"
    return code, message, summary, u


def _finish(cfg, out, summary, files, code, message):
    summary["exit_code"] = code
    summary["message"] = message
    write_summary(summary, out / cfg.output["summary"])
    files["summary"] = out / cfg.output["summary"]
    return ExitReport(code, message, summary, files)


def _evolve(cfg, out, stationary):
    if cfg.has_section("split") and cfg.section("split").get("mode", "check") == "evolve":
        return _split_evolve(cfg, out, stationary)
    spec = build_problem(cfg)
    grid = spec.grid
    files = {}
    summary = {"name": cfg.name, "command": cfg.command, "m": cfg.m, "grid": _grid_summary(grid)}
    ref = grid.sample(cfg.data["reference"]) if "reference" in cfg.data else None
    code, message, part, u = _evolve_problem(cfg, spec, ref, out, files, stationary,
                                             exact=cfg.data.get("exact"))
    summary.update(part)
    if u is not None and cfg.has_section("split"):
        split, _ = _split_report(cfg, _split_source(cfg, ref, u), out, files)
        summary["split"] = split
        if not split["passed"] and code == EXIT_OK:
            code, message = EXIT_FAILED, f"splitting check failed at node {split['failing_node']}"
    return _finish(cfg, out, summary, files, code, message)


def _split_source(cfg, ref, u):
    source = cfg.section("split").get("source", "reference")
    if source == "reference":
        _require(cfg, "[data] reference (split source)", ref is not None)
        return ref
    if source == "final":
        return u
    raise ConfigError(f"[split] source: must be 'reference' or 'final', got {source!r}")


def _split_report(cfg, base, out, files):
    nu = get_float(cfg, "split", "nu", positive=True)
    mu = get_float(cfg, "split", "mu")
    u1, u2, C, rep = poisson_split(base, nu, mu)
    dump_field(u1, out / "split_u1.txt")
    dump_field(u2, out / "split_u2.txt")
    files["split"] = (out / "split_u1.txt", out / "split_u2.txt")
    lap = np.trace(_hessian(base), axis1=-2, axis2=-1)
    return {
        "C": C, "passed": rep.passed, "min_lap_u1": rep.min_lap_u1, "min_lap_neg_u2": rep.min_lap_neg_u2,
        "failing_node": _fmt_node(rep.failing_node),
        "sum_residual": float(np.max(np.abs(u1.values + u2.values - base.values))),
        "max_abs_laplacian": float(np.abs(lap).max()),
        "nu": nu, "mu": mu,
    }, (u1, u2)


def _field_sampler(values):
    """Sampler returning fixed node values (for data that only exists on the grid)."""
    values = np.array(values, dtype=float)
    return lambda *args: values


def _laplacian_field(u):
    """Discrete Laplacian on interior nodes, edge-extended to the boundary."""
    lap = np.trace(_hessian(u), axis1=-2, axis2=-1)
    return ScalarField(u.grid, np.pad(lap, 1, mode="edge"))


def _split_evolve(cfg, out, stationary):
    """Evolve ``u1`` and ``-u2`` of the Poisson split separately (m = 1) and recombine.

    Each part has right-hand side equal to its own discrete Laplacian, which
    the split makes >= nu/2, so both evolutions are admissible even when the
    Laplacian of the target changes sign or vanishes.  The initial
    perturbation ``initial - reference`` is shared half and half.
    """
    if cfg.m != 1:
        raise ConfigError("[split] mode = evolve needs m = 1")
    grid = build_grid(cfg)
    _require(cfg, "[data] reference", "reference" in cfg.data)
    ref = grid.sample(cfg.data["reference"])
    initial = grid.sample(cfg.data["initial"]) if "initial" in cfg.data else ref
    pert = initial.values - ref.values
    files = {}
    split, (u1, u2) = _split_report(cfg, ref, out, files)
    summary = {"name": cfg.name, "command": cfg.command, "m": cfg.m, "grid": _grid_summary(grid),
               "split": split}
    code, message = EXIT_OK, "ok"
    if not split["passed"]:
        code, message = EXIT_FAILED, f"splitting check failed at node {split['failing_node']}"
    finals = []
    for k, (target, sign) in enumerate(((u1, 1.0), (-u2, -1.0)), start=1):
        f_field = _laplacian_field(target)
        t = cfg.time
        spec = ProblemSpec(
            1, grid, f=_field_sampler(f_field.values), phi=_field_sampler(target.values),
            initial=_field_sampler(target.values + sign * 0.5 * pert),
            t_end=t["t_end"], dt=t["dt"], safety=t["safety"], dt_cap=t["dt_cap"],
            eps_stationary=t["eps_stationary"], t_min_floor=cfg.thresholds["t_min_floor"],
            admissibility_tol=cfg.thresholds["admissibility_tol"],
        )
        pc, pm, part, u = _evolve_problem(cfg, spec, target, out, files, stationary,
                                          prefix=f"part{k}_", f_stat=f_field)
        summary[f"part{k}"] = part
        if code == EXIT_OK and pc != EXIT_OK:
            code, message = pc, f"part {k}: {pm}"
        finals.append(u)
    if all(u is not None for u in finals):
        total = ScalarField(grid, finals[0].values - finals[1].values)
        dump_field(total, out / cfg.output["field"])
        files["field"] = out / cfg.output["field"]
        summary["final_sup_distance"] = float(np.max(np.abs(total.values - ref.values)))
    return _finish(cfg, out, summary, files, code, message)


def _hessian(u):
    return hessian_values(u.values, u.grid)


def _barrier(cfg, out):
    sec = cfg.section("barrier")
    _require(cfg, "[barrier] run", "run" in sec)
    _require(cfg, "[scenario] m", cfg.m is not None)
    _require(cfg, "[data] f", "f" in cfg.data)
    run_dir = cfg.path(sec["run"])
    snapshots = load_snapshots(run_dir / cfg.output["snapshots"])
    grid = snapshots[0][1].grid
    if "stationary" in sec:
        u_stat = load_field(cfg.path(sec["stationary"]))
    else:
        _require(cfg, "[barrier] stationary or [data] reference", "reference" in cfg.data)
        u_stat = grid.sample(cfg.data["reference"])
    if u_stat.grid != grid:
        raise ConfigError("stationary field and stored run live on different grids")
    rate_t = rate_d = None
    trace_path = run_dir / cfg.output["trace"]
    if trace_path.exists():
        rate_t, rate_d = load_trace_columns(trace_path)
        if not np.all(np.isfinite(rate_d)):
            rate_t = rate_d = None
    orientation = cfg.time["orientation"]
    if orientation == "auto":
        orientation = -1 if np.mean(_hessian(u_stat)[..., 0, 0]) < 0 else 1
    f_stat = _f_stat_field(cfg, grid, snapshots[-1][0])
    cert, rows = certify(cfg, snapshots, u_stat, cfg.data["f"], f_stat, orientation, rate_t, rate_d)
    path = out / cfg.output["barrier"]
    _write_csv(path, BARRIER_COLUMNS, rows)
    code, message = _certificate_code(cert)
    summary = {"name": cfg.name, "command": cfg.command, "m": cfg.m, "snapshots": len(snapshots),
               "certificate": _certificate_summary(cert), "exit_code": code, "message": message}
    write_summary(summary, out / cfg.output["summary"])
    return ExitReport(code, message, summary, {"barrier": path, "summary": out / cfg.output["summary"]})


def _parse_node(raw, dim):
    try:
        node = tuple(int(v) for v in raw.replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"[comparison] corrupt_node: not an index list: {raw!r}") from None
    if len(node) != dim:
        raise ConfigError(f"[comparison] corrupt_node: need {dim} indices")
    return node


def _comparison(cfg, out):
    spec = build_problem(cfg)
    grid = spec.grid
    sec = cfg.section("comparison")
    record_every = cfg.output["record_every"]
    if not record_every:
        raise ConfigError("verify-comparison needs [output] record_every > 0")
    try:
        epsilons = [float(v) for v in sec.get("epsilon", "1e-3").replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"[comparison] epsilon: not a number list: {sec.get('epsilon')!r}") from None
    tol = get_float(cfg, "comparison", "tol")
    C = get_float(cfg, "comparison", "C")
    try:
        _, trace = run(spec, record_every=record_every, max_steps=cfg.time["max_steps"])
    except DegeneracyError as exc:
        return ExitReport(EXIT_DEGENERATE, f"degenerate: {exc} [condition: {exc.condition}]")
    times = np.array([t for t, _ in trace.snapshots])
    w = [u for _, u in trace.snapshots]
    corrupt = None
    if sec.get("corrupt_node"):
        node = _parse_node(sec["corrupt_node"], grid.dim)
        if any(not 0 <= i < r for i, r in zip(node, grid.res)):
            raise ConfigError(f"[comparison] corrupt_node: {node} outside grid {grid.res}")
        step = get_int(cfg, "comparison", "corrupt_step", allow_none=True)
        step = len(w) // 2 if step is None else step
        if not 0 <= step < len(w):
            raise ConfigError(f"[comparison] corrupt_step: must be in 0..{len(w) - 1}")
        corrupt = (node, step, get_float(cfg, "comparison", "corrupt_amount"))

    rows, results = [], []
    code, message = EXIT_OK, "comparison holds"
    for eps in epsilons:
        v = [ScalarField(grid, u.values + eps * t) for t, u in zip(times, w)]
        if corrupt is not None:
            node, step, amount = corrupt
            vals = np.array(v[step].values)
            vals[node] -= amount
            v[step] = ScalarField(grid, vals)
        rep = verify_comparison(w, v, times, spec, tol, C)
        rows.append((eps, int(corrupt is not None), int(rep.passed), int(rep.hypotheses_met), rep.status,
                     rep.max_excess, "" if rep.failing_step is None else rep.failing_step,
                     _fmt_node(rep.failing_node), rep.hypothesis_failure or ""))
        results.append({"epsilon": eps, "passed": rep.passed, "hypotheses_met": rep.hypotheses_met,
                        "status": rep.status, "max_excess": rep.max_excess,
                        "failing_step": rep.failing_step, "failing_node": _fmt_node(rep.failing_node),
                        "reason": rep.hypothesis_failure, "tol_discrete": rep.tol_discrete})
        if code == EXIT_OK and not rep.passed:
            where = f"step {rep.failing_step}, node {_fmt_node(rep.failing_node)}"
            if not rep.hypotheses_met:
                code, message = EXIT_HYPOTHESES, f"eps={eps:g}: {rep.hypothesis_failure} at {where}"
            else:
                code, message = EXIT_FAILED, f"eps={eps:g}: w <= v violated at {where}"
    path = out / "comparison.csv"
    _write_csv(path, ("epsilon", "corrupted", "passed", "hypotheses_met", "status", "max_excess",
                      "failing_step", "failing_node", "reason"), rows)
    summary = {"name": cfg.name, "command": cfg.command, "m": cfg.m, "snapshots": len(w),
               "corrupted": None if corrupt is None else {"node": _fmt_node(corrupt[0]), "step": corrupt[1],
                                                          "amount": corrupt[2]},
               "results": results, "exit_code": code, "message": message}
    write_summary(summary, out / cfg.output["summary"])
    return ExitReport(code, message, summary, {"comparison": path, "summary": out / cfg.output["summary"]})


def read_matrix(cfg):
    """Matrix from ``[matrix] file`` (first line n, then n rows) or inline ``rows``."""
    sec = cfg.section("matrix")
    if sec.get("file"):
        path = cfg.path(sec["file"])
        try:
            lines = [ln for ln in path.read_text().splitlines() if ln.strip()]
        except OSError as exc:
            raise ConfigError(f"[matrix] file: cannot read {path}: {exc.strerror}") from None
        try:
            n = int(lines[0])
            rows = [[float(v) for v in ln.split()] for ln in lines[1 : n + 1]]
        except (ValueError, IndexError):
            raise ConfigError(f"[matrix] file: malformed matrix file {path}") from None
        if len(rows) != n or any(len(r) != n for r in rows):
            raise ConfigError(f"[matrix] file: expected {n} rows of {n} numbers in {path}")
    elif sec.get("rows"):
        try:
            rows = [[float(v) for v in r.split()] for r in sec["rows"].split(";") if r.strip()]
        except ValueError:
            raise ConfigError("[matrix] rows: not a number matrix") from None
    else:
        raise ConfigError("[matrix] needs 'file' or 'rows'")
    S = np.array(rows, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ConfigError("[matrix] matrix must be square")
    if not np.allclose(S, S.T, rtol=0, atol=1e-12 * max(1.0, np.abs(S).max())):
        raise ConfigError("[matrix] matrix must be symmetric")
    return 0.5 * (S + S.T)


def _trace(cfg, out):
    S = read_matrix(cfg)
    t = traces_batch(S)
    path = out / "traces.csv"
    _write_csv(path, ("p", "T_p"), [(p, float(v)) for p, v in enumerate(t)])
    lines = [f"T_{p} = {format_float(v)}" for p, v in enumerate(t)]
    summary = {"n": S.shape[0], "traces": [float(v) for v in t]}
    write_summary(summary, out / cfg.output["summary"])
    return ExitReport(EXIT_OK, "\n".join(lines), summary, {"traces": path})


def _cone(cfg, out):
    S = read_matrix(cfg)
    n = S.shape[0]
    mem = cone_membership_def(S)
    m = get_int(cfg, "matrix", "m", allow_none=True)
    if m is not None and not 1 <= m <= n:
        raise ConfigError(f"[matrix] m: must be in 1..{n}")
    target = m if m is not None else max(mem.max_m, 1)
    ok, wit = is_m_positive_sylvester(S, target)
    lines = [f"max_m = {mem.max_m}",
             "margins = " + " ".join(format_float(v) for v in mem.margins),
             f"sylvester m = {target}: {'positive' if ok else 'not positive'}"]
    if ok:
        lines.append("witness = (" + ", ".join(str(i) for i in wit.indices) + ")")
    summary = {"n": n, "max_m": mem.max_m, "margins": list(mem.margins), "tolerance": mem.tolerance,
               "sylvester_m": target, "sylvester_positive": ok,
               "witness": list(wit.indices) if ok else None,
               "witness_traces": list(wit.minor_traces) if ok else None}
    path = out / "cone.csv"
    _write_csv(path, ("p", "T_p", "positive"),
               [(p, float(v), int(v > mem.tolerance)) for p, v in enumerate(mem.margins, start=1)])
    write_summary(summary, out / cfg.output["summary"])
    return ExitReport(EXIT_OK, "\n".join(lines), summary, {"cone": path})


_PARAM_RANGES = {
    "sphere": ((0.1, np.pi - 0.1), (0.0, 2 * np.pi)),
    "ellipsoid": ((0.1, np.pi - 0.1), (0.0, 2 * np.pi)),
    "torus": ((0.0, 2 * np.pi), (0.0, 2 * np.pi)),
    "cylinder": ((0.0, 2 * np.pi), (-1.0, 1.0)),
    "plane": ((-1.0, 1.0), (-1.0, 1.0)),
    "graph": ((-1.0, 1.0), (-1.0, 1.0)),
    "sphere-graph": ((-0.5, 0.5), (-0.5, 0.5)),
}


def build_surface(cfg):
    sec = cfg.section("surface")
    kind = sec.get("kind")
    if kind not in _PARAM_RANGES:
        raise ConfigError(f"[surface] kind: unknown surface {kind!r}; known: {sorted(_PARAM_RANGES)}")
    g = lambda key: get_float(cfg, "surface", key, positive=True)  # noqa: E731
    if kind == "sphere":
        return kind, sphere(g("R"))
    if kind == "ellipsoid":
        return kind, ellipsoid(g("a"), g("b"), g("c"))
    if kind == "cylinder":
        return kind, cylinder(g("R"))
    if kind == "torus":
        R, r = g("R"), g("r")
        if not R > r:
            raise ConfigError("[surface] torus needs R > r")
        return kind, torus(R, r)
    if kind == "plane":
        return kind, plane()
    if not sec.get("coeffs"):
        raise ConfigError("[surface] coeffs: required for kind = graph")
    try:
        coeffs = np.array([[float(v) for v in row.split()] for row in sec["coeffs"].split(";") if row.strip()])
    except ValueError:
        raise ConfigError("[surface] coeffs: not a number matrix") from None
    if coeffs.ndim != 2:
        raise ConfigError("[surface] coeffs: rows must have equal length")
    return kind, polynomial_graph(coeffs, up=get_bool(cfg, "surface", "up", default=True))


def _curvature(cfg, out):
    kind, surface = build_surface(cfg)
    sec = cfg.section("surface")
    if sec.get("samples"):
        try:
            samples = [tuple(float(v) for v in s.replace(",", " ").split())
                       for s in sec["samples"].split(";") if s.strip()]
        except ValueError:
            raise ConfigError("[surface] samples: not a list of parameter pairs") from None
        if any(len(s) != 2 for s in samples):
            raise ConfigError("[surface] samples: each sample needs two parameters")
    else:
        nu_, nv_ = get_int(cfg, "surface", "n_u"), get_int(cfg, "surface", "n_v")
        if nu_ < 1 or nv_ < 1:
            raise ConfigError("[surface] n_u, n_v must be >= 1")
        (a0, a1), (b0, b1) = _PARAM_RANGES[kind]
        # angular parameters are periodic: drop the duplicated endpoint
        u_periodic = kind == "torus"
        v_periodic = kind in ("sphere", "ellipsoid", "torus")
        us = np.linspace(a0, a1, nu_, endpoint=not u_periodic) if nu_ > 1 else [0.5 * (a0 + a1)]
        vs = np.linspace(b0, b1, nv_, endpoint=not v_periodic) if nv_ > 1 else [0.5 * (b0 + b1)]
        samples = [(float(u), float(v)) for u in us for v in vs]
    try:
        reports = [p_curvatures(surface, s) for s in samples]
    except DomainError as exc:
        raise ConfigError(f"[surface] {exc}") from None
    n1 = len(reports[0].p_curvatures)
    header = (["sample", "u", "v"] + [f"k_{p}" for p in range(1, n1 + 1)] + ["max_m"]
              + [f"kappa_{p}" for p in range(1, n1 + 1)] + ["n_x", "n_y", "n_z"])
    rows = []
    for k, (s, r) in enumerate(zip(samples, reports)):
        rows.append([k, float(s[0]), float(s[1])] + [float(v) for v in r.p_curvatures] + [r.max_convexity_m]
                    + [float(v) for v in r.principal] + [float(v) for v in r.normal])
    path = out / "curvature.csv"
    _write_csv(path, header, rows)
    m = get_int(cfg, "surface", "m", allow_none=True)
    m = n1 if m is None else m
    if not 1 <= m <= n1:
        raise ConfigError(f"[surface] m: must be in 1..{n1}")
    cls = classify_m_convex(surface, samples, m)
    summary = {"surface": kind, "samples": len(samples), "m": m, "m_convex": cls.m_convex,
               "min_k_m": cls.min_k_m, "min_k_m1": cls.min_k_m1, "precondition_ok": cls.precondition_ok,
               "verdict": cls.verdict, "worst_sample": list(cls.worst_sample),
               "min_max_m": min(r.max_convexity_m for r in reports)}
    write_summary(summary, out / cfg.output["summary"])
    msg = f"{kind}: {'m-convex' if cls.m_convex else 'not m-convex'} for m = {m}; {cls.verdict}"
    return ExitReport(EXIT_OK, msg, summary, {"curvature": path})


def run_scenario(cfg, out_dir, command=None):
    """Execute ``command`` (default: the config's own) and write outputs into ``out_dir``."""
    command = command or cfg.command
    if command is None:
        raise ConfigError("no command given and none set in [scenario] command")
    cfg.command = command
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    handlers = {
        "trace": _trace,
        "cone": _cone,
        "evolve": lambda c, o: _evolve(c, o, stationary=False),
        "stationary": lambda c, o: _evolve(c, o, stationary=True),
        "barrier": _barrier,
        "curvature": _curvature,
        "verify-comparison": _comparison,
    }
    if command not in handlers:
        raise ConfigError(f"unknown command {command!r}")
    return handlers[command](cfg, out)
