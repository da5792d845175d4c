"""INI-style scenario configuration.

Sections and keys are validated strictly: unknown sections or keys, bad
numbers, unknown presets and malformed expressions all raise
:class:`~hessflow.exceptions.ConfigError` naming the section and key.
See the README for the full grammar.
"""

import configparser
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..exceptions import ConfigError
from .expr import Expression
from .presets import SAMPLERS, SCENARIOS

COMMANDS = ("trace", "cone", "evolve", "stationary", "barrier", "curvature", "verify-comparison")

# section -> {key: default}; None marks "no default"
SCHEMA = {
    "scenario": {"name": "", "preset": None, "command": None, "m": None},
    "grid": {"dim": "2", "lo": "0", "hi": "1", "res": "33"},
    "data": {"f": None, "phi": None, "initial": None, "reference": None, "exact": None, "f_stat": None},
    "time": {
        "t_end": "1", "dt": "auto", "safety": "0.5", "dt_cap": "1e-2", "eps_stationary": "1e-8",
        "orientation": "1", "max_steps": None,
    },
    "thresholds": {
        "admissibility_tol": "0", "t_min_floor": "1e-8", "compat_tol": None,
    },
    "output": {
        "trace": "trace.csv", "field": "field.txt", "barrier": "barrier.csv", "summary": "summary.json",
        "snapshots": "snapshots", "record_every": "100",
    },
    "barrier": {
        "enabled": None, "run": None, "stationary": None, "eps_h": "1e-6", "safety": "0.01",
        "tol": "1e-3", "nu": None,
    },
    "split": {"nu": None, "mu": None, "source": "reference", "mode": "check"},
    "comparison": {
        "epsilon": "1e-3", "tol": "0", "C": "10", "corrupt_node": None, "corrupt_step": None,
        "corrupt_amount": "0.05",
    },
    "matrix": {"file": None, "rows": None, "m": None},
    "surface": {
        "kind": None, "R": "1", "r": "1", "a": "1", "b": "1", "c": "2", "coeffs": None,
        "samples": None, "n_u": "8", "n_v": "8", "m": None, "up": "true",
    },
}


@dataclass
class ScenarioConfig:
    """Parsed configuration; ``raw`` keeps the merged string values per section."""

    name: str
    command: Optional[str]
    m: Optional[int]
    grid: dict
    data: dict
    time: dict
    thresholds: dict
    output: dict
    raw: dict
    base_dir: Path = field(default_factory=Path.cwd)

    def section(self, name):
        return self.raw.get(name, {})

    def has_section(self, name):
        return name in self.raw

    def path(self, value):
        p = Path(value)
        return p if p.is_absolute() else self.base_dir / p


def _err(section, key, msg):
    return ConfigError(f"[{section}] {key}: {msg}")


def get_float(cfg, section, key, positive=False, allow_none=False):
    raw = cfg.section(section).get(key, SCHEMA[section].get(key))
    if raw is None:
        if allow_none:
            return None
        raise _err(section, key, "missing value")
    try:
        val = float(raw)
    except ValueError:
        raise _err(section, key, f"not a number: {raw!r}") from None
    if positive and not val > 0:
        raise _err(section, key, f"must be > 0, got {raw}")
    return val


def get_int(cfg, section, key, allow_none=False):
    raw = cfg.section(section).get(key, SCHEMA[section].get(key))
    if raw is None:
        if allow_none:
            return None
        raise _err(section, key, "missing value")
    try:
        return int(raw)
    except ValueError:
        raise _err(section, key, f"not an integer: {raw!r}") from None


def get_bool(cfg, section, key, default=None):
    raw = cfg.section(section).get(key, SCHEMA[section].get(key))
    if raw is None:
        return default
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise _err(section, key, f"not a boolean: {raw!r}")


def _float_list(section, key, raw, dim):
    try:
        vals = [float(v) for v in raw.replace(",", " ").split()]
    except ValueError:
        raise _err(section, key, f"not a number list: {raw!r}") from None
    if len(vals) == 1:
        vals = vals * dim
    if len(vals) != dim:
        raise _err(section, key, f"expected 1 or {dim} values, got {len(vals)}")
    return tuple(vals)


def parse_sampler(value, dim, section="data", key="?", allow_time=True):
    """``preset:<name>`` or an expression in ``x, y, z, t``."""
    value = value.strip()
    if value.startswith("preset:"):
        name = value[len("preset:"):].strip()
        if name not in SAMPLERS:
            raise _err(section, key, f"unknown preset sampler {name!r}; known: {sorted(SAMPLERS)}")
        sampler = SAMPLERS[name]
        if sampler.dim != dim:
            raise _err(section, key, f"preset {name!r} is {sampler.dim}-dimensional, grid is {dim}-dimensional")
    else:
        try:
            sampler = Expression(value, dim)
        except ConfigError as exc:
            raise ConfigError(f"[{section}] {key}: {exc.detail}", position=exc.position) from None
    if not allow_time and sampler.uses_time:
        raise _err(section, key, "must not depend on t")
    return sampler


def _read_sections(text, source):
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str  # keys are case sensitive ("C")
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    return {s: dict(parser.items(s)) for s in parser.sections()}


def _merge(base, override):
    out = {s: dict(v) for s, v in base.items()}
    for s, values in override.items():
        out.setdefault(s, {}).update(values)
    return out


def parse_config(text, source="<config>", base_dir=None):
    sections = _read_sections(text, source)
    for s, values in sections.items():
        if s not in SCHEMA:
            raise ConfigError(f"{source}: unknown section [{s}]")
        for k in values:
            if k not in SCHEMA[s]:
                raise ConfigError(f"{source}: unknown key {k!r} in [{s}]")
    preset = sections.get("scenario", {}).get("preset")
    if preset:
        if preset not in SCENARIOS:
            raise ConfigError(f"{source}: unknown scenario preset {preset!r}; known: {sorted(SCENARIOS)}")
        sections = _merge(SCENARIOS[preset], sections)
    cfg = ScenarioConfig(
        name="", command=None, m=None, grid={}, data={}, time={}, thresholds={}, output={},
        raw=sections, base_dir=Path(base_dir) if base_dir else Path.cwd(),
    )
    scen = sections.get("scenario", {})
    cfg.name = scen.get("name") or preset or Path(source).stem
    cfg.command = scen.get("command")
    if cfg.command is not None and cfg.command not in COMMANDS:
        raise _err("scenario", "command", f"unknown command {cfg.command!r}")
    cfg.m = get_int(cfg, "scenario", "m", allow_none=True)
    _parse_grid(cfg)
    _parse_data(cfg)
    _parse_time(cfg)
    cfg.thresholds = {
        "admissibility_tol": get_float(cfg, "thresholds", "admissibility_tol"),
        "t_min_floor": get_float(cfg, "thresholds", "t_min_floor", positive=True),
        "compat_tol": get_float(cfg, "thresholds", "compat_tol", allow_none=True),
    }
    out = dict(SCHEMA["output"])
    out.update(cfg.section("output"))
    out["record_every"] = get_int(cfg, "output", "record_every")
    if out["record_every"] < 0:
        raise _err("output", "record_every", "must be >= 0")
    cfg.output = out
    return cfg


def _parse_grid(cfg):
    if not cfg.has_section("grid"):
        return
    dim = get_int(cfg, "grid", "dim")
    if dim not in (1, 2, 3):
        raise _err("grid", "dim", f"must be 1, 2 or 3, got {dim}")
    merged = dict(SCHEMA["grid"])
    merged.update(cfg.section("grid"))
    lo = _float_list("grid", "lo", merged["lo"], dim)
    hi = _float_list("grid", "hi", merged["hi"], dim)
    try:
        res = tuple(int(v) for v in merged["res"].replace(",", " ").split())
    except ValueError:
        raise _err("grid", "res", f"not an integer list: {merged['res']!r}") from None
    if len(res) == 1:
        res = res * dim
    if len(res) != dim:
        raise _err("grid", "res", f"expected 1 or {dim} values")
    if any(r < 5 for r in res):
        raise _err("grid", "res", "need at least 5 nodes per axis")
    if any(h <= l for l, h in zip(lo, hi)):
        raise _err("grid", "hi", "must exceed lo on every axis")
    cfg.grid = {"dim": dim, "lo": lo, "hi": hi, "res": res}


def _parse_data(cfg):
    data = cfg.section("data")
    if not data:
        return
    if not cfg.grid:
        raise ConfigError("[data] needs a [grid] section")
    dim = cfg.grid["dim"]
    out = {}
    for key in SCHEMA["data"]:
        if data.get(key):
            out[key] = parse_sampler(data[key], dim, "data", key,
                                     allow_time=key not in ("initial", "reference", "f_stat"))
    cfg.data = out


def _parse_time(cfg):
    t = {
        "t_end": get_float(cfg, "time", "t_end"),
        "safety": get_float(cfg, "time", "safety", positive=True),
        "dt_cap": get_float(cfg, "time", "dt_cap", positive=True),
        "eps_stationary": get_float(cfg, "time", "eps_stationary", positive=True),
        "max_steps": get_int(cfg, "time", "max_steps", allow_none=True),
    }
    if t["t_end"] < 0:
        raise _err("time", "t_end", "must be >= 0")
    raw_dt = cfg.section("time").get("dt", "auto").strip().lower()
    t["dt"] = None if raw_dt == "auto" else get_float(cfg, "time", "dt", positive=True)
    raw_or = cfg.section("time").get("orientation", "1").strip().lower()
    if raw_or == "auto":
        t["orientation"] = "auto"
    elif raw_or in ("1", "+1", "-1"):
        t["orientation"] = int(raw_or)
    else:
        raise _err("time", "orientation", f"must be 1, -1 or auto, got {raw_or!r}")
    cfg.time = t


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, source=str(path), base_dir=path.parent)


def config_from_preset(preset, **overrides):
    """Build a config from a scenario preset; ``overrides`` maps sections to key dicts."""
    sections = _merge({"scenario": {"preset": preset}}, overrides)
    lines = []
    for s, values in sections.items():
        lines.append(f"[{s}]")
        lines.extend(f"{k} = {v}" for k, v in values.items())
    return parse_config("\n".join(lines), source=f"preset:{preset}")
