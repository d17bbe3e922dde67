"""Parameter measure spaces as weighted atoms.

A :class:`MeasureSpace` is a finite list of atoms ``(u_k, w_k)`` with positive
weights.  Discrete measures are given atom by atom and integrate exactly;
continuous intervals are discretized by a quadrature rule, with infinite ends
handled through ``u = exp(v)`` and truncation of the ``v`` range.

Rules: ``trapezoid`` (default, second order) and ``gregory``, the trapezoid
rule with fourth-order endpoint corrections
``h * (17/48, 59/48, 43/48, 49/48, 1, ..., 1, 49/48, 43/48, 59/48, 17/48)``.
Both keep every weight positive.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, ValidationError
from .kernels import pairwise_sum

RULES = ("trapezoid", "gregory")
MAPS = ("identity", "log")

# default log-range: exp(-v/2) (a t^(-3/2) norm-bound integrand in log form) falls to 1e-14
DEFAULT_LOG_SPAN = 2.0 * math.log(1e14)
_SCAN_STEP = 0.125
_SCAN_SPAN = 700.0

_GREGORY_END = np.array([17.0, 59.0, 43.0, 49.0]) / 48.0


@dataclass(frozen=True, eq=False)
class MeasureSpace:
    """Weighted atoms.

    ``points`` has shape ``(K, m)``.  ``mapped`` holds the coordinate the rule
    is uniform in (``v = log u`` on log-mapped axes) and ``truncated`` flags,
    per axis, which ends were cut off from an unbounded range.
    """

    points: np.ndarray
    weights: np.ndarray
    provenance: dict
    mapped: np.ndarray = None
    truncated: tuple = field(default=())

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        w = np.array(self.weights, dtype=float).ravel()
        if pts.shape[0] == 0:
            raise ValidationError("a measure space needs at least one atom")
        if pts.shape[0] != w.size:
            raise ValidationError("points and weights differ in length")
        if not np.all(np.isfinite(pts)):
            raise ValidationError("atom locations must be finite")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValidationError("atom weights must be positive and finite")
        mapped = pts if self.mapped is None else np.array(self.mapped, dtype=float).reshape(pts.shape)
        for arr in (pts, w, mapped):
            arr.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "mapped", mapped)
        if not self.truncated:
            object.__setattr__(self, "truncated", tuple((False, False) for _ in range(pts.shape[1])))

    @property
    def size(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def is_discrete(self):
        return self.provenance.get("type") == "discrete"

    @property
    def total(self):
        return float(pairwise_sum(self.weights))

    def tail_estimate(self, g, slabs=64):
        """Extrapolated mass of ``w * |g|`` beyond every truncated end.

        The outermost two slabs (each ``1/slabs`` of the mapped range) are
        compared; their ratio ``r`` is taken as a geometric decay rate and the
        missing tail as ``S_last * r / (1 - r)``.  Returns ``inf`` when the
        integrand does not decay toward a cut end.
        """
        mass = self.weights * np.abs(np.asarray(g, dtype=complex).ravel())
        total = 0.0
        for d, cuts in enumerate(self.truncated):
            v = self.mapped[:, d]
            lo, hi = v.min(), v.max()
            width = (hi - lo) / slabs
            for cut, sign in zip(cuts, (-1.0, 1.0)):
                if not cut:
                    continue
                # distance from the cut end, in slab units
                depth = (v - lo) / width if sign < 0 else (hi - v) / width
                last = float(pairwise_sum(mass[depth < 1.0]))
                prev = float(pairwise_sum(mass[(depth >= 1.0) & (depth < 2.0)]))
                if last == 0.0:
                    continue
                if prev <= last:
                    return math.inf
                r = last / prev
                total += last * r / (1.0 - r)
        return total

    def to_json(self):
        return dict(self.provenance)


def rule_weights(n, h, rule="trapezoid"):
    if rule not in RULES:
        raise ValidationError(f"rule must be one of {RULES}, got {rule!r}")
    w = np.ones(n)
    if rule == "trapezoid":
        if n < 2:
            raise ValidationError("trapezoid rule needs at least 2 nodes")
        w[0] = w[-1] = 0.5
    else:
        if n < 8:
            raise ValidationError("gregory rule needs at least 8 nodes")
        w[:4] = _GREGORY_END
        w[-4:] = _GREGORY_END[::-1]
    return w * h


def discrete(atoms):
    """Measure with exactly the given ``(u, weight)`` atoms."""
    atoms = list(atoms)
    if not atoms:
        raise ValidationError("a discrete measure needs at least one atom")
    pts, ws = [], []
    for u, w in atoms:
        pts.append(np.atleast_1d(np.asarray(u, dtype=float)))
        ws.append(float(w))
    dims = {p.size for p in pts}
    if len(dims) != 1:
        raise ValidationError("all atoms must have the same dimension")
    prov = {"type": "discrete", "atoms": [{"u": p.tolist(), "w": w} for p, w in zip(pts, ws)]}
    return MeasureSpace(np.array(pts), np.array(ws), prov)


def _scan_truncation(integrand, start, direction, tol):
    v = start + direction * np.arange(0.0, _SCAN_SPAN, _SCAN_STEP)
    with np.errstate(all="ignore"):
        vals = np.abs(np.asarray(integrand(np.exp(v)), dtype=complex)) * np.exp(v)
    vals = np.where(np.isfinite(vals), vals, 0.0)
    peak = vals.max()
    if peak == 0:
        return float(v[1])
    big = np.nonzero(vals >= tol * peak)[0]
    return float(v[min(big[-1] + 1, v.size - 1)])


def _interval_axis(a, b, nodes, map="identity", rule="trapezoid", vmin=None, vmax=None, integrand=None, tol=1e-14):
    a = float(a)
    b = math.inf if b in ("inf", math.inf) else float(b)
    if map not in MAPS:
        raise ValidationError(f"map must be one of {MAPS}, got {map!r}")
    if not a < b:
        raise ValidationError(f"interval needs a < b, got ({a}, {b})")
    nodes = int(nodes)
    if nodes < 2:
        raise ValidationError("an interval needs at least 2 nodes")
    if math.isinf(b) and map != "log":
        raise ValidationError("an unbounded interval requires the log map")
    prov = {"type": "interval", "a": a, "b": "inf" if math.isinf(b) else b, "nodes": nodes, "map": map, "rule": rule}
    lo_cut = hi_cut = False
    if map == "identity":
        v = np.linspace(a, b, nodes)
        w = rule_weights(nodes, (b - a) / (nodes - 1), rule)
        return v, w, v, (False, False), prov
    if a < 0:
        raise ValidationError("the log map needs a >= 0")
    if a == 0:
        lo_cut = True
        if vmin is None:
            upper = math.log(b) if math.isfinite(b) else 0.0
            vmin = _scan_truncation(integrand, upper, -1.0, tol) if integrand else upper - DEFAULT_LOG_SPAN
        vlo = float(vmin)
        prov["vmin"] = vlo
    else:
        vlo = math.log(a)
    if math.isinf(b):
        hi_cut = True
        if vmax is None:
            vmax = _scan_truncation(integrand, vlo, 1.0, tol) if integrand else vlo + DEFAULT_LOG_SPAN
        vhi = float(vmax)
        prov["vmax"] = vhi
    else:
        vhi = math.log(b)
    if not vhi > vlo:
        raise ValidationError("truncated log range is empty")
    v = np.linspace(vlo, vhi, nodes)
    u = np.exp(v)
    w = rule_weights(nodes, (vhi - vlo) / (nodes - 1), rule) * u
    return u, w, v, (lo_cut, hi_cut), prov


def quadrature_interval(a, b, nodes, map="identity", rule="trapezoid", vmin=None, vmax=None, integrand=None, tol=1e-14):
    """Quadrature measure on ``(a, b)``; ``b`` may be ``"inf"`` with ``map="log"``.

    With the log map ``u = exp(v)`` and the rule is applied uniformly in ``v``.
    An unbounded end is truncated at ``vmax`` (or ``vmin`` when ``a = 0``);
    if not given, ``integrand`` (a callable of ``u``) is scanned and the range
    is cut where ``|integrand(u)| u`` drops below ``tol`` times its peak.
    Without either, a fixed span of ``2 log(1e14)`` is used.
    """
    u, w, v, cut, prov = _interval_axis(a, b, nodes, map, rule, vmin, vmax, integrand, tol)
    return MeasureSpace(u[:, None], w, prov, v[:, None], (cut,))


def box(axes):
    """Tensor product of interval quadratures; ``axes`` is a list of interval dicts."""
    parts = [_interval_axis(**_interval_kwargs(ax)) for ax in axes]
    if not parts:
        raise ValidationError("a box needs at least one axis")
    us = np.meshgrid(*[p[0] for p in parts], indexing="ij")
    vs = np.meshgrid(*[p[2] for p in parts], indexing="ij")
    ws = np.meshgrid(*[p[1] for p in parts], indexing="ij")
    w = np.ones_like(ws[0])
    for x in ws:
        w = w * x
    prov = {"type": "box", "axes": [p[4] for p in parts]}
    return MeasureSpace(
        np.stack([x.ravel() for x in us], axis=1),
        w.ravel(),
        prov,
        np.stack([x.ravel() for x in vs], axis=1),
        tuple(p[3] for p in parts),
    )


def _interval_kwargs(d):
    try:
        kw = {"a": d["a"], "b": d["b"], "nodes": d["nodes"]}
    except KeyError as exc:
        raise ValidationError(f"interval config is missing {exc}") from exc
    for key in ("map", "rule", "vmin", "vmax"):
        if key in d:
            kw[key] = d[key]
    return kw


def from_json(d):
    """Build a measure space from its JSON description."""
    if not isinstance(d, dict) or "type" not in d:
        raise ValidationError("omega config must be an object with a 'type'")
    kind = d["type"]
    if kind == "discrete":
        try:
            return discrete((a["u"], a["w"]) for a in d["atoms"])
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed discrete atoms: {exc}") from exc
    if kind == "interval":
        return quadrature_interval(**_interval_kwargs(d))
    if kind == "box":
        return box(d.get("axes", []))
    raise ValidationError(f"unknown omega type {kind!r}")


def integrate(m, g):
    """``sum_k w_k g(u_k)``; ``g`` is a callable of the ``(K, m)`` atom array or a value array."""
    vals = g(m.points) if callable(g) else g
    vals = np.asarray(vals, dtype=np.complex128).ravel()
    if vals.size != m.size:
        raise ValidationError(f"integrand gave {vals.size} values for {m.size} atoms")
    if not np.all(np.isfinite(vals)):
        raise NumericalError("integrand is not finite at every atom")
    return complex(pairwise_sum(m.weights * vals))
