"""Generalized Hausdorff operators on sampled grids.

``(Hf)(x) = int Phi(u) f(A(u) x) dmu(u)`` with a diagonal (optionally
orthogonally conjugated) dilation family: construction, application, norm
bounds, adjoints, Mellin symbols and finite-section spectral diagnostics.
"""

__version__ = "0.1.0"

from .errors import EvalDomainError, HausdorffLabError, NumericalError, ParseError, ValidationError
from .hausdorff import (
    HausdorffOperator,
    adjoint,
    adjoint_identity_check,
    apply,
    apply_reflected,
    build,
    evaluate_at,
    lemma1_bound,
    reflect,
    regularity_probe,
)
from .numgrid import GridFunction, GridSpec, interpolate, log_axis, lp_norm, pairing, uniform_axis
from .presets import build_preset, preset

__all__ = [
    "EvalDomainError",
    "GridFunction",
    "GridSpec",
    "HausdorffLabError",
    "HausdorffOperator",
    "NumericalError",
    "ParseError",
    "ValidationError",
    "adjoint",
    "adjoint_identity_check",
    "apply",
    "apply_reflected",
    "build",
    "build_preset",
    "evaluate_at",
    "interpolate",
    "lemma1_bound",
    "log_axis",
    "lp_norm",
    "pairing",
    "preset",
    "reflect",
    "regularity_probe",
    "uniform_axis",
]
