"""Generalized Hausdorff operators ``(Hf)(x) = int Phi(u) f(A(u) x) dmu(u)``.

The dilation family is stored diagonalized: per-axis factors ``a_j(u)`` and an
optional orthogonal conjugator ``C`` with ``A(u) = C diag(a(u)) C^T``.  Every
invariant is checked once, at :func:`build`, over all atoms of the measure.
"""

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels, kexpr, omega as omega_mod
from .errors import EvalDomainError, ValidationError
from .numgrid import (
    LOG,
    UNIFORM,
    ZERO_TAIL,
    GridFunction,
    Tail,
    _inf_sides,
    conjugate_exponent,
    lp_norm,
    pairing,
    reflect_function,
)

ORTHO_TOL = 1e-12


def _parse_p(p):
    if isinstance(p, str):
        if p.lower() in ("inf", "infinity"):
            return math.inf
        p = float(p)
    p = float(p)
    if not p >= 1.0:
        raise ValidationError(f"exponent p must lie in [1, inf], got {p}")
    return p


def _p_json(p):
    return "inf" if math.isinf(p) else p


@dataclass(frozen=True, eq=False)
class HausdorffOperator:
    """Kernel values and diagonal dilation factors tabulated at the atoms of ``omega``."""

    omega: omega_mod.MeasureSpace
    kernel: np.ndarray  # complex, one value per atom
    dilation: np.ndarray  # (K, n); inert 1.0 where the kernel vanishes
    p: float = 2.0
    conjugator: np.ndarray = None
    config: dict = field(default_factory=dict)
    name: str = ""

    @property
    def n(self):
        return self.dilation.shape[1]

    @property
    def q(self):
        return conjugate_exponent(self.p)

    @property
    def support(self):
        return self.kernel != 0

    @property
    def det(self):
        return np.prod(self.dilation, axis=1)

    @property
    def coef(self):
        """Quadrature weight times kernel value at each atom."""
        return self.omega.weights * self.kernel

    @property
    def signs(self):
        """Sign of each dilation axis on the kernel support (0 if the support is empty)."""
        sup = self.support
        if not np.any(sup):
            return np.zeros(self.n, dtype=int)
        return np.sign(self.dilation[sup][0]).astype(int)

    @property
    def is_positive(self):
        return bool(np.all(self.signs >= 0))

    @property
    def is_negative(self):
        return bool(np.any(self.support)) and bool(np.all(self.signs < 0))

    @property
    def has_rotation(self):
        return self.conjugator is not None and not np.allclose(self.conjugator, np.eye(self.n), rtol=0, atol=ORTHO_TOL)

    @property
    def mass(self):
        """``int Phi dmu``."""
        return omega_mod.integrate(self.omega, self.kernel)

    def with_p(self, p):
        p = _parse_p(p)
        cfg = dict(self.config)
        cfg["p"] = _p_json(p)
        return replace(self, p=p, config=cfg)

    def to_config(self):
        return dict(self.config)


# --------------------------------------------------------------------------
# construction
# --------------------------------------------------------------------------


def _eval_expr(src, points, what):
    try:
        e = kexpr.parse(src)
        return kexpr.evaluate_many(e, points)
    except EvalDomainError as exc:
        raise ValidationError(f"{what}: {exc}") from exc


def _kernel_values(spec, m):
    if isinstance(spec, (str, int, float)):
        spec = {"re": str(spec)}
    if not isinstance(spec, dict):
        raise ValidationError("kernel must be an expression string or an object")
    if "re_values" in spec or "values" in spec:
        re = np.asarray(spec.get("re_values", spec.get("values")), dtype=float)
        im = np.asarray(spec.get("im_values", np.zeros_like(re)), dtype=float)
        vals = re + 1j * im
    else:
        if "re" not in spec:
            raise ValidationError("kernel object needs 're' (and optionally 'im')")
        vals = _eval_expr(str(spec["re"]), m.points, "kernel (re)").astype(complex)
        if spec.get("im") not in (None, "", "0"):
            vals = vals + 1j * _eval_expr(str(spec["im"]), m.points, "kernel (im)")
    vals = np.asarray(vals, dtype=complex).ravel()
    if vals.size != m.size:
        raise ValidationError(f"kernel has {vals.size} values for {m.size} atoms")
    if not np.all(np.isfinite(vals)):
        raise ValidationError("kernel values must be finite")
    return vals


def _dilation_values(spec, m, support):
    if isinstance(spec, dict):
        vals = np.asarray(spec["values"], dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.shape[0] != m.size:
            raise ValidationError(f"dilation table has {vals.shape[0]} rows for {m.size} atoms")
        vals = vals.copy()
    else:
        if isinstance(spec, str):
            spec = [spec]
        if not spec:
            raise ValidationError("dilation needs at least one component")
        vals = np.ones((m.size, len(spec)))
        pts = m.points[support]
        if pts.shape[0]:
            for j, src in enumerate(spec):
                vals[support, j] = _eval_expr(str(src), pts, f"dilation a{j + 1}")
    vals[~support] = 1.0
    if not np.all(np.isfinite(vals)):
        raise ValidationError("dilation values must be finite")
    return vals


def _check_invariants(kernel, dilation, conjugator, m):
    sup = kernel != 0
    if not np.any(sup):
        return
    d = dilation[sup]
    zero = np.nonzero(np.any(d == 0, axis=1))[0]
    if zero.size:
        u = m.points[sup][zero[0]]
        raise ValidationError(f"singular dilation: a(u) vanishes at atom u={u.tolist()} inside the kernel support")
    for j in range(d.shape[1]):
        s = np.sign(d[:, j])
        if np.any(s != s[0]):
            k = int(np.argmax(s != s[0]))
            u = m.points[sup][k]
            raise ValidationError(
                f"mixed sign pattern: a{j + 1} changes sign on the kernel support (near u={u.tolist()}), "
                "so it vanishes in between"
            )
    if conjugator is not None:
        c = conjugator
        if c.shape != (d.shape[1], d.shape[1]):
            raise ValidationError(f"conjugator must be {d.shape[1]}x{d.shape[1]}")
        if np.max(np.abs(c @ c.T - np.eye(c.shape[0]))) > ORTHO_TOL:
            raise ValidationError("conjugator is not orthogonal (C C^T != I)")


def _from_arrays(m, kernel, dilation, p=2.0, conjugator=None, config=None, name=""):
    kernel = np.asarray(kernel, dtype=complex).ravel()
    dilation = np.array(dilation, dtype=float)
    if dilation.ndim == 1:
        dilation = dilation[:, None]
    if conjugator is not None:
        conjugator = np.array(conjugator, dtype=float)
    _check_invariants(kernel, dilation, conjugator, m)
    for arr in (kernel, dilation) + ((conjugator,) if conjugator is not None else ()):
        arr.setflags(write=False)
    if config is None:
        config = {
            "omega": m.to_json(),
            "kernel": {"re_values": kernel.real.tolist(), "im_values": kernel.imag.tolist()},
            "a": {"values": dilation.tolist()},
            "conjugator": None if conjugator is None else conjugator.tolist(),
            "p": _p_json(p),
        }
    return HausdorffOperator(m, kernel, dilation, _parse_p(p), conjugator, config, name)


def build(config, name=""):
    """Validate an operator config and tabulate it at the atoms."""
    if not isinstance(config, dict):
        raise ValidationError("operator config must be a JSON object")
    for key in ("omega", "kernel", "a"):
        if key not in config:
            raise ValidationError(f"operator config is missing '{key}'")
    m = config["omega"]
    if not isinstance(m, omega_mod.MeasureSpace):
        m = omega_mod.from_json(m)
    kernel = _kernel_values(config["kernel"], m)
    dilation = _dilation_values(config["a"], m, kernel != 0)
    conj = config.get("conjugator")
    conj = None if conj is None else np.asarray(conj, dtype=float)
    p = _parse_p(config.get("p", 2))
    resolved = dict(config)
    resolved["omega"] = m.to_json()
    resolved["p"] = _p_json(p)
    resolved.setdefault("conjugator", None)
    return _from_arrays(m, kernel, dilation, p, conj, resolved, name or config.get("name", ""))


def scale_kernel(op, c):
    """Operator with kernel ``c * Phi`` (same measure and dilations)."""
    return _from_arrays(op.omega, op.kernel * c, op.dilation, op.p, op.conjugator, name=f"{c}*{op.name}")


# --------------------------------------------------------------------------
# application
# --------------------------------------------------------------------------


def _active(op):
    sup = op.support
    return op.coef[sup], op.dilation[sup]


def _check_domain(op, spec):
    if spec.dim != op.n:
        raise ValidationError(f"operator acts on R^{op.n}, grid is {spec.dim}-dimensional")
    if op.has_rotation and not spec.all_uniform:
        raise ValidationError("a conjugated family needs a full-space (uniform) grid")
    for d, a in enumerate(spec.axes):
        if a.kind == LOG and op.signs[d] < 0:
            raise ValidationError(
                f"a{d + 1} is negative: it maps the hyperoctant out of itself; use reflect() or a uniform grid"
            )


def _separable_args(spec, dil):
    K = dil.shape[0]
    alpha = np.ones((K, spec.dim))
    beta = np.zeros((K, spec.dim))
    offset = np.zeros(spec.dim)
    for d, a in enumerate(spec.axes):
        if a.kind == LOG:
            beta[:, d] = -np.log(dil[:, d]) / a.step
        else:
            alpha[:, d] = dil[:, d]
            offset[d] = a.start / a.step
    return alpha, beta, offset


def _matrices(op, dil):
    C = op.conjugator
    return np.einsum("ij,kj,lj->kil", C, dil, C)


def _output_tail(op, f):
    if f.tail.kind == "constant":
        return Tail("constant", op.mass * f.tail.value), ()
    if f.tail.kind == "nearest":
        return ZERO_TAIL, ("output tail set to zero: input tail is not a constant limit",)
    return ZERO_TAIL, ()


def apply(op, f):
    """``H f`` sampled on ``f``'s grid."""
    spec = f.spec
    _check_domain(op, spec)
    coef, dil = _active(op)
    low, high = _inf_sides(spec)
    if not op.has_rotation:
        alpha, beta, offset = _separable_args(spec, dil)
        vals = kernels.apply_nodes(
            f.values, spec.shape, spec.strides, f.tail.code, f.tail.value, low, high, coef, alpha, beta, offset
        )
    else:
        mats = _matrices(op, dil)
        pts = spec.points
        K = coef.size
        vals = np.empty(spec.size, dtype=complex)
        block = max(1, kernels._CHUNK_PAIRS // max(K, 1))
        for s in range(0, spec.size, block):
            p = np.einsum("kil,bl->bki", mats, pts[s : s + block])
            pos = spec.positions(p.reshape(-1, spec.dim))
            v = kernels.interp_points(
                f.values, pos, spec.shape, spec.strides, f.tail.code, f.tail.value, low, high, True
            ).reshape(-1, K)
            vals[s : s + block] = kernels.pairwise_rows(coef[None, :] * v)
    tail, notes = _output_tail(op, f)
    return GridFunction(spec, vals, tail, notes)


def evaluate_at(op, f, x):
    """``(H f)(x)`` at one point, using ``f``'s tail rule off the grid."""
    spec = f.spec
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.size == 1 and spec.dim > 1:
        x = np.full(spec.dim, x[0])
    _check_domain(op, spec)
    coef, dil = _active(op)
    if op.has_rotation:
        pts = np.einsum("kil,l->ki", _matrices(op, dil), x)
    else:
        pts = dil * x[None, :]
    low, high = _inf_sides(spec)
    v = kernels.interp_points(
        f.values, spec.positions(pts), spec.shape, spec.strides, f.tail.code, f.tail.value, low, high
    )
    return complex(kernels.pairwise_sum(coef * v))


# --------------------------------------------------------------------------
# norm bound, adjoint, reflection, regularity
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundReport:
    """``int |Phi| |det A|^(-1/p) dmu``.

    ``value`` is inf when the extrapolated tail beyond a truncated end of the
    parameter range exceeds ``CONVERGENCE_RTOL`` of the sum (or does not decay).
    """

    value: float
    raw_value: float
    converged: bool
    tail: float
    p: float
    u: np.ndarray
    integrand: np.ndarray

    def to_dict(self):
        return {
            "value": "inf" if math.isinf(self.value) else self.value,
            "raw_value": self.raw_value,
            "converged": self.converged,
            "tail_estimate": self.tail,
            "p": _p_json(self.p),
        }


CONVERGENCE_RTOL = 1e-6


def bound_integrand(op, p=None):
    p = op.p if p is None else _parse_p(p)
    mag = np.abs(op.kernel)
    if math.isinf(p):
        return mag.copy()
    return mag * np.abs(op.det) ** (-1.0 / p)


def lemma1_bound(op, p=None):
    """Norm bound of ``op`` on ``L^p`` from the kernel and dilation determinants."""
    p = op.p if p is None else _parse_p(p)
    g = bound_integrand(op, p)
    full = float(np.real(omega_mod.integrate(op.omega, g)))
    tail = op.omega.tail_estimate(g)
    converged = tail <= CONVERGENCE_RTOL * abs(full) if full else tail == 0.0
    return BoundReport(full if converged else math.inf, full, converged, tail, p, op.omega.points.copy(), g)


def adjoint(op):
    """Hausdorff form of the adjoint: kernel ``conj(Phi)/|det A|``, dilation ``A^{-1}``, exponent ``q``."""
    sup = op.support
    kernel = np.zeros_like(op.kernel)
    kernel[sup] = np.conj(op.kernel[sup]) / np.abs(op.det[sup])
    dil = np.ones_like(op.dilation)
    dil[sup] = 1.0 / op.dilation[sup]
    name = op.name[len("adjoint(") : -1] if op.name.startswith("adjoint(") else f"adjoint({op.name})"
    return _from_arrays(op.omega, kernel, dil, op.q, op.conjugator, name=name)


def adjoint_identity_check(op, f, g):
    """Relative defect of ``<Hf, g> = <f, H* g>`` (sesquilinear discrete pairings)."""
    if f.spec != g.spec:
        raise ValidationError("f and g must share a grid")
    lhs = pairing(apply(op, f), g.conj())
    rhs = pairing(f, apply(adjoint(op), g).conj())
    denom = lp_norm(f, op.p) * lp_norm(g, op.q)
    if denom == 0:
        raise ValidationError("test functions must be non-zero")
    return abs(lhs - rhs) / denom


@dataclass(frozen=True)
class Reflection:
    """``H_{Phi,A} = J o H_{Phi,-A}`` with ``(J f)(x) = f(-x)``."""

    flip: bool
    operator: HausdorffOperator


def reflect(op):
    """Split a negative family into the reflection ``J`` and a positive family."""
    if not op.is_negative:
        raise ValidationError("reflect() needs every a_j strictly negative on the kernel support")
    sup = op.support
    dil = np.array(op.dilation)
    dil[sup] = -dil[sup]
    pos = _from_arrays(op.omega, op.kernel, dil, op.p, op.conjugator, name=f"reflected({op.name})")
    return Reflection(True, pos)


def apply_reflected(refl, f):
    out = apply(refl.operator, f)
    return reflect_function(out) if refl.flip else out


def regularity_probe(op, f, X):
    """``(int Phi dmu, (H f)(X, ..., X))``; compare the second against ``mass * limit``."""
    if f.tail.kind != "constant":
        warnings.warn("regularity_probe expects a constant-limit tail", stacklevel=2)
    return op.mass, evaluate_at(op, f, X)
