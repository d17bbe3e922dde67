"""Standard test functions on grids (all functions of physical ``x``)."""

import numpy as np

from . import kexpr
from .errors import ValidationError
from .numgrid import LOG, NEAREST_TAIL, ZERO_TAIL, GridFunction, constant_tail


def gauss_y(spec, center=0.0, width=1.0, tail=ZERO_TAIL):
    """``exp(-|c - c0|^2 / (2 w^2))`` in grid coordinates (``y`` on log axes)."""
    def f(*c):
        r2 = sum((ci - center) ** 2 for ci in c)
        return np.exp(-r2 / (2.0 * width**2))

    return GridFunction.from_coords(spec, f, tail)


def indicator_unit(spec):
    """``1`` where every coordinate lies in ``(0, 1]``."""
    def f(*x):
        out = np.ones_like(x[0])
        for xi in x:
            out = out * ((xi > 0) & (xi <= 1))
        return out

    return GridFunction.from_callable(spec, f, ZERO_TAIL)


def ramp(spec):
    """``prod x_j / (1 + x_j)``, tending to 1 at infinity."""
    for a in spec.axes:
        if a.kind != LOG:
            raise ValidationError("the ramp test function lives on log grids")

    def f(*x):
        out = np.ones_like(x[0])
        for xi in x:
            out = out * (xi / (1.0 + xi))
        return out

    return GridFunction.from_callable(spec, f, constant_tail(1.0))


def smooth_random(spec, rng, terms=3, tail=ZERO_TAIL, widths=(0.03, 0.08)):
    """Random complex sum of Gaussians in grid coordinates, placed inside the grid.

    Centres fall in the middle 40% of each axis; ``widths`` bounds the
    standard deviations as fractions of the axis span.
    """
    lo = np.array([a.start for a in spec.axes])
    hi = np.array([a.stop for a in spec.axes])
    span = hi - lo
    mesh = spec.mesh("coords")
    total = np.zeros(spec.shape, dtype=complex)
    for _ in range(terms):
        c = lo + span * rng.uniform(0.3, 0.7, size=spec.dim)
        w = span * rng.uniform(widths[0], widths[1], size=spec.dim)
        amp = rng.normal() + 1j * rng.normal()
        r2 = sum(((m - ci) / wi) ** 2 for m, ci, wi in zip(mesh, c, w))
        total = total + amp * np.exp(-0.5 * r2)
    return GridFunction(spec, total.ravel(), tail)


def node_random(spec, rng, tail=ZERO_TAIL):
    """Independent complex normal value at every node."""
    return GridFunction(spec, rng.normal(size=spec.size) + 1j * rng.normal(size=spec.size), tail)


def from_expression(spec, src, tail=ZERO_TAIL):
    """Sample a kernel-language expression with ``u1, u2, ...`` read as ``x1, x2, ...``."""
    e = kexpr.parse(src)
    vals = kexpr.evaluate_many(e, spec.points)
    return GridFunction(spec, vals, tail)


NAMED = ("gauss", "indicator", "ramp", "random")


def parse_tail(text):
    """``zero``, ``nearest`` or ``constant:<value>``."""
    if text in (None, "", "zero"):
        return ZERO_TAIL
    if text == "nearest":
        return NEAREST_TAIL
    if text.startswith("constant:"):
        try:
            return constant_tail(complex(text.split(":", 1)[1]))
        except ValueError as exc:
            raise ValidationError(f"bad tail value in {text!r}") from exc
    raise ValidationError(f"tail must be zero, nearest or constant:<value>, got {text!r}")
