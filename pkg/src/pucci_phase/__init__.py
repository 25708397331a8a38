"""Phase-plane analysis of radial solutions of M(D^2 u) + |x|^a u^p = 0 for Pucci operators."""
from .kernel import BACKEND
from .params import (Operator, ParamsError, ProblemParams, exponents, make_params, p_pseudo,
                     p_serrin, p_sobolev)
from .field import PhasePoint, Region, lines, region_of, vector_field
from .stationary import Kind, Label, classify_stationary, stationary_points
from .flow import Budget, EventSpec, OrbitFate, Trajectory, Verdict, fate_of, integrate
from .classify import (PClass, PLabel, classify_p, critical_exponent,
                       exterior_nonexistence_check, gamma_orbit, singular_catalog,
                       upsilon_orbit)
from .radial import RadialSolution, decay_constants, reconstruct_u, shoot_regular

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Operator", "ParamsError", "ProblemParams", "exponents", "make_params",
    "p_pseudo", "p_serrin", "p_sobolev", "PhasePoint", "Region", "lines", "region_of",
    "vector_field", "Kind", "Label", "classify_stationary", "stationary_points", "Budget",
    "EventSpec", "OrbitFate", "Trajectory", "Verdict", "fate_of", "integrate", "PClass",
    "PLabel", "classify_p", "critical_exponent", "exterior_nonexistence_check",
    "gamma_orbit", "singular_catalog", "upsilon_orbit", "RadialSolution",
    "decay_constants", "reconstruct_u", "shoot_regular",
]
