"""Modified Mellin transform on a hyperoctant, its adjoint, and operator symbols.

With ``x = exp(-y)`` the transform becomes a Fourier transform in ``y``::

    Mf(s) = (2 pi)^(-n/2) int f(e^(-y)) exp(-sum(y)/p) exp(-i s.y) dy

realized by an FFT on the uniform ``y`` grid (trapezoid endpoint weights).
Frequency nodes are ``s_k = 2 pi k / (N h)``, ``k = -N//2, ..., N - N//2 - 1``,
so the extent is the Nyquist range ``|s| <= pi / h``.  Content beyond that
aliases; resolving it is up to the caller's choice of ``h``.

The symbol of a positive diagonal family is
``phi(s) = int Phi(u) prod_j a_j(u)^(-1/p - i s_j) dmu(u)``.
"""

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import hausdorff, kernels
from .errors import ValidationError
from .numgrid import LOG, UNIFORM, Axis, GridFunction, GridSpec, coord_names, conjugate_exponent, lp_norm


def _check_p(p, allow_large=False):
    p = hausdorff._parse_p(p)
    if not allow_large and p > 2.0:
        raise ValidationError(f"the Mellin transform is defined here for p in [1, 2], got {p}")
    return p


def _endpoint_weights(spec):
    w = np.ones(spec.shape)
    for d, a in enumerate(spec.axes):
        sl = [slice(None)] * spec.dim
        for j in (0, -1):
            sl[d] = j
            w[tuple(sl)] *= 0.5
    return w


def frequency_spec(spec):
    """Centred FFT frequency grid dual to a log-uniform ``spec``."""
    axes = []
    for a in spec.axes:
        ds = 2.0 * math.pi / (a.count * a.step)
        axes.append(Axis(UNIFORM, -(a.count // 2) * ds, ds, a.count))
    return GridSpec(tuple(axes))


def symbol_spec(smax, nodes, dim=1):
    """Uniform frequency grid on ``[-smax, smax]^dim``."""
    if not smax > 0:
        raise ValidationError("smax must be positive")
    ax = Axis(UNIFORM, -float(smax), 2.0 * smax / (int(nodes) - 1), int(nodes))
    return GridSpec((ax,) * dim)


def _phase(axis_in, axis_out, sign):
    # exp(sign * i * s_k * y0) per axis, for s_k of the centred frequency grid
    return np.exp(sign * 1j * axis_out.coords * axis_in.start)


def _require_log(spec):
    if not spec.all_log:
        raise ValidationError("the Mellin transform needs a log-uniform hyperoctant grid")


def mellin(f, p=2, conjugate_kernel=False):
    """``M f`` on the centred frequency grid; ``conjugate_kernel`` uses ``exp(+i s.y)``."""
    p = _check_p(p)
    spec = f.spec
    _require_log(spec)
    out_spec = frequency_spec(spec)
    y = spec.log_weight_sum.reshape(spec.shape)
    data = f.grid() * _endpoint_weights(spec) * np.exp(-y / p)
    axes = tuple(range(spec.dim))
    if conjugate_kernel:
        F = np.fft.ifftn(data, axes=axes) * spec.size
    else:
        F = np.fft.fftn(data, axes=axes)
    F = np.fft.fftshift(F, axes=axes)
    sign = 1.0 if conjugate_kernel else -1.0
    scale = (2.0 * math.pi) ** (-spec.dim / 2.0)
    for d, (ai, ao) in enumerate(zip(spec.axes, out_spec.axes)):
        shape = [1] * spec.dim
        shape[d] = ao.count
        F = F * _phase(ai, ao, sign).reshape(shape)
        scale *= ai.step
    return GridFunction(out_spec, (F * scale).ravel())


def mellin_adjoint(g, p, spec):
    """``M' g`` sampled on the log grid ``spec``: the exact transpose of :func:`mellin`.

    ``<mellin(f), g> = <f, mellin_adjoint(g)>`` holds for the discrete
    bilinear pairings.  In the interior this is
    ``(M'g)(x) = |x|^(-1/q) (2 pi)^(-n/2) int exp(-i s.y) g(s) ds``.
    """
    p = _check_p(p)
    _require_log(spec)
    fs = frequency_spec(spec)
    if g.spec != fs:
        raise ValidationError("g must live on the frequency grid dual to spec")
    q = conjugate_exponent(p)
    axes = tuple(range(spec.dim))
    G = g.grid().astype(complex)
    scale = (2.0 * math.pi) ** (-spec.dim / 2.0)
    for d, (ai, ao) in enumerate(zip(spec.axes, fs.axes)):
        shape = [1] * spec.dim
        shape[d] = ao.count
        G = G * _phase(ai, ao, -1.0).reshape(shape)
        scale *= ao.step
    G = np.fft.fftn(np.fft.ifftshift(G, axes=axes), axes=axes)
    y = spec.log_weight_sum.reshape(spec.shape)
    weight = np.zeros(spec.shape) if math.isinf(q) else y / q
    vals = G * scale * _endpoint_weights(spec) * np.exp(weight)
    return GridFunction(spec, vals.ravel())


# --------------------------------------------------------------------------
# symbols
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SymbolFunction:
    """Samples of ``phi`` at frequency points ``s`` (``(M, n)``)."""

    s: np.ndarray
    values: np.ndarray
    p: float
    spec: GridSpec = None

    @property
    def sup(self):
        return float(np.max(np.abs(self.values)))

    def as_gridfunction(self):
        if self.spec is None:
            raise ValidationError("symbol was sampled at scattered points, not on a grid")
        return GridFunction(self.spec, self.values)

    def to_csv(self, path):
        path = Path(path)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(coord_names(self.s.shape[1], "s") + ["re_phi", "im_phi", "abs_phi"])
            for row, v in zip(self.s, self.values):
                w.writerow([repr(float(c)) for c in row] + [repr(float(v.real)), repr(float(v.imag)), repr(float(abs(v)))])
        return path


def _s_points(op, s_grid):
    if isinstance(s_grid, GridSpec):
        if s_grid.dim != op.n:
            raise ValidationError(f"symbol grid is {s_grid.dim}-D, operator acts on R^{op.n}")
        return np.stack([m.ravel() for m in s_grid.mesh("coords")], axis=1), s_grid
    s = np.asarray(s_grid, dtype=float)
    if s.ndim <= 1:
        s = s.reshape(-1, 1) if op.n == 1 else s.reshape(1, -1)
    if s.shape[1] != op.n:
        raise ValidationError(f"frequency points have dimension {s.shape[1]}, operator acts on R^{op.n}")
    return s, None


def _check_positive(op):
    if op.has_rotation:
        raise ValidationError("the symbol needs a diagonal family (no conjugator)")
    if not op.is_positive:
        raise ValidationError("nonpositive a_j encountered: the symbol needs a positive diagonal family")


def symbol(op, s_grid, p=None):
    """``phi(s)`` at the points of ``s_grid`` (a :class:`GridSpec` or an array of points).

    For ``p > 2`` the value is ``conj(symbol(adjoint(op), s, q))``.
    """
    p = op.p if p is None else hausdorff._parse_p(p)
    if math.isinf(p):
        raise ValidationError("the symbol is not defined here at p = inf")
    _check_positive(op)
    s, spec = _s_points(op, s_grid)
    if p > 2.0:
        dual = symbol(hausdorff.adjoint(op), s, conjugate_exponent(p))
        return SymbolFunction(s, np.conj(dual.values), p, spec)
    coef, dil = hausdorff._active(op)
    logs = np.log(dil)
    base = coef * np.exp(-logs.sum(axis=1) / p)
    vals = kernels.symbol_sum(base, logs, s)
    return SymbolFunction(s, vals, p, spec)


def _symbol_direct(op, s, p):
    # independent route: complex powers straight from the integral, no
    # p > 2 duality and no shared summation kernel
    s, _ = _s_points(op, s)
    a = op.dilation.astype(complex)
    out = np.empty(s.shape[0], dtype=complex)
    for m, sm in enumerate(s):
        integrand = op.kernel * np.prod(a ** (-1.0 / p - 1j * sm[None, :]), axis=1)
        out[m] = np.sum(op.omega.weights * integrand)
    return out


def diagonalization_residual(op, f, p=2):
    """``||M(Hf) - phi Mf||_2 / ||Mf||_2`` on the frequency grid of ``f``."""
    p = _check_p(p)
    Mf = mellin(f, p)
    denom = lp_norm(Mf, 2)
    if denom == 0:
        raise ValidationError("degenerate test function: M f vanishes")
    MHf = mellin(hausdorff.apply(op, f), p)
    phi = symbol(op, Mf.spec, p)
    diff = MHf.with_values(MHf.values - phi.values * Mf.values)
    return lp_norm(diff, 2) / denom
