"""Numerics for m-Hessian evolution equations.

``E_m[u] = -u_t T_{m-1}(u_xx) + T_m(u_xx) = f`` where ``T_p`` is the sum of the
principal p-minors.  Submodules:

- :mod:`trace_core`: p-traces and their derivatives
- :mod:`cones`: Garding cones, the generalized Sylvester test, the evolutionary cone
- :mod:`grid`: grids, fields and central-difference Hessians
- :mod:`evolution`: explicit time stepping, admissibility, comparison checks
- :mod:`barriers`: barrier profiles, envelopes and attraction certificates
- :mod:`geometry`: curvature matrices and m-convexity of hypersurfaces
- :mod:`estimators`: estimator-style wrappers (fit/predict)
"""

from .cones import cone_membership_def, em_algebraic, ev_lift, in_ev_cone, is_m_positive_sylvester
from .estimators import BarrierCertifier, HessianFlow
from .evolution import ProblemSpec, admissibility_check, run, step_explicit, suggest_dt
from .exceptions import ConfigError, ConsistencyError, DegeneracyError, DomainError
from .geometry import classify_m_convex, curvature_matrix, p_curvatures
from .grid import GridSpec, ScalarField, hessian_central, oscillation, sup_norm
from .trace_core import TraceVector, all_traces, p_trace_minors, traces_batch

__version__ = "0.1.0"

__all__ = [
    "cone_membership_def", "em_algebraic", "ev_lift", "in_ev_cone", "is_m_positive_sylvester",
    "BarrierCertifier", "HessianFlow",
    "ProblemSpec", "admissibility_check", "run", "step_explicit", "suggest_dt",
    "ConfigError", "ConsistencyError", "DegeneracyError", "DomainError",
    "classify_m_convex", "curvature_matrix", "p_curvatures",
    "GridSpec", "ScalarField", "hessian_central", "oscillation", "sup_norm",
    "TraceVector", "all_traces", "p_trace_minors", "traces_batch",
]
