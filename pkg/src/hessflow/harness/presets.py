"""Named samplers and the golden scenario library.

Samplers take ``(*coords, t)`` and are vectorized.  A config value
``preset:<name>`` refers to one of :data:`SAMPLERS`; ``[scenario] preset = ID``
pulls a whole scenario from :data:`SCENARIOS`, whose entries use the same
section/key layout as a config file.
"""

import numpy as np

PERTURBATION = 0.025


class Sampler:
    def __init__(self, name, func, dim, doc="", uses_time=False):
        self.name = name
        self.func = func
        self.dim = dim
        self.uses_time = uses_time
        self.__doc__ = doc

    def __call__(self, *args):
        if len(args) == self.dim:
            args = args + (0.0,)
        return np.broadcast_to(np.asarray(self.func(*args), dtype=float), np.shape(args[0]))

    def __repr__(self):
        return f"preset:{self.name}"


def _bump(x, y):
    return np.sin(np.pi * x) * np.sin(np.pi * y)


def _ma_stat(x, y, t=0.0):
    return 0.5 * (x * x + y * y - 1.0)


def _heat_stat(x, y, t=0.0):
    return 0.5 * (x * x + y * y)


SAMPLERS = {
    s.name: s
    for s in [
        Sampler("zero", lambda x, y, t=0.0: 0.0 * x, 2, "0"),
        Sampler("one", lambda x, y, t=0.0: 1.0 + 0.0 * x, 2, "1"),
        Sampler("two", lambda x, y, t=0.0: 2.0 + 0.0 * x, 2, "2"),
        Sampler("heat_stationary", _heat_stat, 2, "(x^2+y^2)/2"),
        Sampler("heat_initial", lambda x, y, t=0.0: _heat_stat(x, y) + _bump(x, y), 2,
                "(x^2+y^2)/2 + sin(pi x) sin(pi y)"),
        Sampler("heat_exact", lambda x, y, t: _heat_stat(x, y) + np.exp(-2 * np.pi**2 * t) * _bump(x, y), 2,
                "(x^2+y^2)/2 + exp(-2 pi^2 t) sin(pi x) sin(pi y)", uses_time=True),
        Sampler("ma_stationary", _ma_stat, 2, "(x^2+y^2-1)/2"),
        Sampler("ma_initial", lambda x, y, t=0.0: _ma_stat(x, y) + PERTURBATION * _bump(x, y) ** 2, 2,
                "(x^2+y^2-1)/2 + 0.025 (sin(pi x) sin(pi y))^2"),
        Sampler("ma_neg_stationary", lambda x, y, t=0.0: -_ma_stat(x, y), 2, "-(x^2+y^2-1)/2"),
        Sampler("ma_neg_initial", lambda x, y, t=0.0: -_ma_stat(x, y) - PERTURBATION * _bump(x, y) ** 2, 2,
                "-(x^2+y^2-1)/2 - 0.025 (sin(pi x) sin(pi y))^2"),
        Sampler("harmonic_cubic", lambda x, y, t=0.0: x**3 - 3 * x * y * y, 2, "x^3 - 3 x y^2"),
        Sampler("harmonic_cubic_initial", lambda x, y, t=0.0: x**3 - 3 * x * y * y + _bump(x, y), 2,
                "x^3 - 3 x y^2 + sin(pi x) sin(pi y)"),
        Sampler("saddle", lambda x, y, t=0.0: 0.5 * (x * x - y * y), 2, "(x^2-y^2)/2"),
    ]
}


def _scenario(command, m, res, data, time, **extra):
    cfg = {
        "scenario": {"command": command, "m": str(m)},
        "grid": {"dim": "2", "lo": "0", "hi": "1", "res": str(res)},
        "data": data,
        "time": time,
    }
    for section, values in extra.items():
        cfg.setdefault(section, {}).update(values)
    return cfg


SCENARIOS = {
    "HEAT-1": _scenario(
        "evolve", 1, 65,
        {"f": "preset:two", "phi": "preset:heat_stationary", "initial": "preset:heat_initial",
         "reference": "preset:heat_stationary", "exact": "preset:heat_exact"},
        {"t_end": "0.5"},
        output={"record_every": "200"},
    ),
    "MA-1": _scenario(
        "stationary", 2, 65,
        {"f": "preset:one", "phi": "preset:ma_stationary", "initial": "preset:ma_initial",
         "reference": "preset:ma_stationary"},
        {"t_end": "50"},
        output={"record_every": "100"},
    ),
    "MA-NEG": _scenario(
        "stationary", 2, 65,
        {"f": "preset:one", "phi": "preset:ma_neg_stationary", "initial": "preset:ma_neg_initial",
         "reference": "preset:ma_neg_stationary"},
        {"t_end": "50", "orientation": "auto"},
        output={"record_every": "100"},
    ),
    "SPLIT-1": _scenario(
        "stationary", 1, 33,
        {"f": "preset:zero", "phi": "preset:harmonic_cubic", "initial": "preset:harmonic_cubic_initial",
         "reference": "preset:harmonic_cubic"},
        {"t_end": "5"},
        output={"record_every": "500"},
        split={"nu": "1", "mu": "1", "mode": "evolve"},
    ),
    "NONADM-1": _scenario(
        "evolve", 2, 33,
        {"f": "preset:one", "phi": "preset:saddle"},
        {"t_end": "1"},
        barrier={"enabled": "false"},
    ),
    "COMP-1": _scenario(
        "verify-comparison", 2, 33,
        {"f": "preset:one", "phi": "preset:ma_stationary", "initial": "preset:ma_initial"},
        {"t_end": "0.05"},
        output={"record_every": "10"},
        barrier={"enabled": "false"},
        comparison={"epsilon": "1e-3"},
    ),
}
