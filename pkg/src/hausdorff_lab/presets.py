"""Named operator configs and their closed-form oracle values.

Each preset is a plain JSON-ready dict accepted by :func:`hausdorff.build`
(the Gaussian control is the exception: it is an integral operator on an
interval, consumed only by the spectral module).

Integral forms are written in the ``f(a(u) x)`` shape.  An operator given as
``(1/x) int psi(t/x) f(t) dt`` becomes ``int psi(v) f(v x) dv`` after
``t = v x``, and ``u = 1/v`` then gives the kernel ``psi(1/u) / u^2`` per axis
with ``a(u) = 1/u``.
"""

import copy
import math

import numpy as np
from scipy.special import gamma

from . import hausdorff
from .errors import ValidationError

# 2^15 + 1 Gregory nodes on v = log u in [0, 64]: step 1/512
_HALF_LINE = {"type": "interval", "a": 1.0, "b": "inf", "nodes": 32769, "map": "log", "rule": "gregory", "vmax": 64.0}
_POS_AXIS = {"type": "interval", "a": 0.0, "b": "inf", "nodes": 273, "map": "log", "rule": "gregory", "vmin": -4.0, "vmax": 64.0}

_UNIT = {"type": "discrete", "atoms": [{"u": [1.0], "w": 1.0}]}
_DYADIC = {"type": "discrete", "atoms": [{"u": [float(k)], "w": 1.0} for k in range(-40, 41)]}

_PRESETS = {
    "identity": {"omega": _UNIT, "kernel": "1", "a": ["1"], "p": 2.0},
    "zero": {"omega": _UNIT, "kernel": "0", "a": ["1"], "p": 2.0},
    "cesaro1d": {"omega": _HALF_LINE, "kernel": "u^-2", "a": ["1/u"], "p": 2.0},
    "cesaro-adjoint": {"omega": _HALF_LINE, "kernel": "u^-1", "a": ["u"], "p": 2.0},
    "example2-gauss": {
        "omega": {"type": "box", "axes": [_POS_AXIS, _POS_AXIS]},
        "kernel": "exp(-1/u1 - 1/u2) / (u1*u2)^2",
        "a": ["1/u1", "1/u2"],
        "p": 2.0,
    },
    "discrete-dyadic": {"omega": _DYADIC, "kernel": "2^(-abs(u))", "a": ["2^u"], "p": 2.0},
    "reflected-cesaro": {"omega": _HALF_LINE, "kernel": "u^-2", "a": ["-1/u"], "p": 2.0},
    "gaussian-compact-control": {"kind": "control", "kernel": "gaussian", "interval": [0.0, 10.0], "width": 1.0},
}

DESCRIPTIONS = {
    "identity": "one atom at u = 1 with a = 1: H f = f",
    "zero": "vanishing kernel: H f = 0",
    "cesaro1d": "(1/x) int_0^x f: kernel u^-2 on (1, inf), a = 1/u",
    "cesaro-adjoint": "int_x^inf f(t)/t dt: kernel u^-1 on (1, inf), a = u",
    "example2-gauss": "two-variable average with psi(t1, t2) = exp(-t1 - t2), written with a = (1/u1, 1/u2)",
    "discrete-dyadic": "sum over |k| <= 40 of 2^-|k| f(2^k x)",
    "reflected-cesaro": "cesaro1d with a = -1/u: f evaluated at -x/u",
    "gaussian-compact-control": "compact integral operator exp(-(x - y)^2) on [0, 10] (spectral control)",
}

NAMES = tuple(_PRESETS)


def preset(name):
    """JSON config of the named preset (a fresh copy)."""
    if name not in _PRESETS:
        raise ValidationError(f"unknown preset {name!r}; choose from {', '.join(NAMES)}")
    cfg = copy.deepcopy(_PRESETS[name])
    cfg["name"] = name
    return cfg


def is_control(config):
    return isinstance(config, dict) and config.get("kind") == "control"


def build_preset(name, p=None):
    cfg = preset(name)
    if is_control(cfg):
        raise ValidationError(f"{name} is a spectral control, not a Hausdorff operator")
    if p is not None:
        cfg["p"] = p
    return hausdorff.build(cfg, name)


# --------------------------------------------------------------------------
# closed-form oracles (functions of the exponent p and frequency s)
# --------------------------------------------------------------------------


def _q(p):
    return 1.0 if math.isinf(p) else 1.0 - 1.0 / p


def _geom(r, n):
    # sum_{k=0}^{n} r^k
    return (1.0 - r ** (n + 1)) / (1.0 - r)


def _dyadic_symbol(s, p):
    s = np.asarray(s, dtype=float)
    z = -1.0 / p - 1j * s
    r_pos = 2.0 ** (-1.0 + z)  # k >= 0: 2^-k 2^(k z)
    r_neg = 2.0 ** (-1.0 - z)  # k < 0
    return _geom(r_pos, 40) + (_geom(r_neg, 40) - 1.0)


def _dyadic_bound(p):
    return float(np.real(_dyadic_symbol(0.0, p)))


ORACLES = {
    "identity": {"mass": 1.0, "bound": lambda p: 1.0, "symbol": lambda s, p: np.ones_like(np.asarray(s, dtype=complex))},
    "zero": {"mass": 0.0, "bound": lambda p: 0.0, "symbol": lambda s, p: np.zeros_like(np.asarray(s, dtype=complex))},
    "cesaro1d": {
        "mass": 1.0,
        "bound": lambda p: 1.0 / _q(p),
        "symbol": lambda s, p: 1.0 / (_q(p) - 1j * np.asarray(s)),
    },
    "cesaro-adjoint": {
        "mass": None,  # int_1^inf du/u diverges
        "bound": lambda p: p,
        "symbol": lambda s, p: 1.0 / (1.0 / p + 1j * np.asarray(s)),
    },
    "example2-gauss": {
        "mass": 1.0,
        "bound": lambda p: gamma(_q(p)) ** 2,
        "symbol": lambda s, p: gamma(_q(p) - 1j * np.asarray(s)[..., 0]) * gamma(_q(p) - 1j * np.asarray(s)[..., 1]),
    },
    "discrete-dyadic": {"mass": 3.0 - 2.0**-39, "bound": _dyadic_bound, "symbol": _dyadic_symbol},
    "reflected-cesaro": {"mass": 1.0, "bound": lambda p: 1.0 / _q(p), "symbol": None},
}

# accuracy the generic pipeline is expected to reach against each oracle
ORACLE_TOL = {
    "identity": 1e-14,
    "zero": 1e-14,
    "cesaro1d": 1e-6,
    "cesaro-adjoint": 1e-6,
    "example2-gauss": 1e-6,
    "discrete-dyadic": 1e-12,
    "reflected-cesaro": 1e-6,
}
