"""Sampled functions on tensor grids.

Two axis kinds are supported.  A *log* axis covers ``(0, inf)`` through the
coordinate ``y = -log x``, sampled uniformly in ``y``; a *uniform* axis covers
a real interval sampled uniformly in ``x``.  Dilations ``x -> a x`` become
translations along log axes, which is why interpolation is linear in grid
coordinates rather than in ``x``.

Values are stored flattened in C order.  Norms and pairings are Riemann sums
with the cell measure ``h`` (uniform axes) or ``exp(-y) h`` (log axes), reduced
with the deterministic pairwise tree from :mod:`hausdorff_lab.kernels`.
"""

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .errors import NumericalError, ValidationError

LOG = "log"
UNIFORM = "uniform"

TAIL_KINDS = ("zero", "constant", "nearest")
_TAIL_CODES = {"zero": kernels.TAIL_ZERO, "nearest": kernels.TAIL_NEAREST, "constant": kernels.TAIL_CONSTANT}


@dataclass(frozen=True)
class Axis:
    """One grid axis: ``count`` nodes at ``start + j * step`` in grid coordinates.

    For log axes the grid coordinate is ``y = -log x``.
    """

    kind: str
    start: float
    step: float
    count: int

    def __post_init__(self):
        if self.kind not in (LOG, UNIFORM):
            raise ValidationError(f"axis kind must be 'log' or 'uniform', got {self.kind!r}")
        if int(self.count) != self.count or self.count < 2:
            raise ValidationError(f"axis needs at least 2 nodes, got {self.count}")
        if not (math.isfinite(self.step) and self.step > 0):
            raise ValidationError(f"axis step must be positive and finite, got {self.step}")
        if not math.isfinite(self.start):
            raise ValidationError("axis start must be finite")
        object.__setattr__(self, "count", int(self.count))
        object.__setattr__(self, "start", float(self.start))
        object.__setattr__(self, "step", float(self.step))

    @property
    def coords(self):
        """Grid coordinates (``y`` for log axes, ``x`` for uniform axes)."""
        return self.start + self.step * np.arange(self.count)

    @property
    def x(self):
        """Physical node coordinates."""
        c = self.coords
        return np.exp(-c) if self.kind == LOG else c

    @property
    def stop(self):
        return self.start + self.step * (self.count - 1)

    def to_dict(self):
        return {"kind": self.kind, "start": self.start, "step": self.step, "count": self.count}


def log_axis(ymin, ymax, count):
    """Log axis with ``count`` nodes spanning ``y`` in ``[ymin, ymax]``."""
    if not ymax > ymin:
        raise ValidationError("log axis needs ymax > ymin")
    return Axis(LOG, ymin, (ymax - ymin) / (count - 1), count)


def log_axis_spacing(count, step, center=0.0):
    """Log axis of ``count`` nodes with spacing ``step``, centred at ``y = center``."""
    return Axis(LOG, center - 0.5 * step * (count - 1), step, count)


def uniform_axis(xmin, xmax, count):
    if not xmax > xmin:
        raise ValidationError("uniform axis needs xmax > xmin")
    return Axis(UNIFORM, xmin, (xmax - xmin) / (count - 1), count)


@dataclass(frozen=True)
class GridSpec:
    axes: tuple

    def __post_init__(self):
        axes = tuple(self.axes)
        if not axes:
            raise ValidationError("a grid needs at least one axis")
        for a in axes:
            if not isinstance(a, Axis):
                raise ValidationError("grid axes must be Axis instances")
        object.__setattr__(self, "axes", axes)

    @property
    def dim(self):
        return len(self.axes)

    @property
    def shape(self):
        return tuple(a.count for a in self.axes)

    @property
    def size(self):
        return int(np.prod(self.shape))

    @property
    def strides(self):
        shape = self.shape
        out = [1] * len(shape)
        for d in range(len(shape) - 2, -1, -1):
            out[d] = out[d + 1] * shape[d + 1]
        return tuple(out)

    @property
    def kinds(self):
        return tuple(a.kind for a in self.axes)

    @property
    def all_log(self):
        return all(k == LOG for k in self.kinds)

    @property
    def all_uniform(self):
        return all(k == UNIFORM for k in self.kinds)

    def mesh(self, which="x"):
        """Per-axis coordinate arrays broadcast to the grid shape (``which`` = "x" or "coords")."""
        arrs = [a.x if which == "x" else a.coords for a in self.axes]
        return np.meshgrid(*arrs, indexing="ij")

    @property
    def points(self):
        """Physical node coordinates, shape ``(size, dim)``."""
        return np.stack([m.ravel() for m in self.mesh("x")], axis=1)

    @property
    def cell_measure(self):
        """Riemann cell measure at every node (flattened)."""
        w = np.ones(self.shape)
        for d, a in enumerate(self.axes):
            shape = [1] * self.dim
            shape[d] = a.count
            ax = np.full(a.count, a.step)
            if a.kind == LOG:
                ax = ax * np.exp(-a.coords)
            w = w * ax.reshape(shape)
        return w.ravel()

    @property
    def log_weight_sum(self):
        """``sum_j y_j`` over log axes at every node (0 contribution from uniform axes)."""
        tot = np.zeros(self.shape)
        for d, a in enumerate(self.axes):
            if a.kind == LOG:
                shape = [1] * self.dim
                shape[d] = a.count
                tot = tot + a.coords.reshape(shape)
        return tot.ravel()

    def positions(self, pts):
        """Fractional node indices of physical points ``pts`` (P x dim)."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if pts.shape[1] != self.dim:
            raise ValidationError(f"points have dimension {pts.shape[1]}, grid has {self.dim}")
        pos = np.empty_like(pts)
        for d, a in enumerate(self.axes):
            col = pts[:, d]
            if a.kind == LOG:
                if np.any(col <= 0):
                    raise ValidationError("log-uniform axes only hold strictly positive coordinates")
                pos[:, d] = (-np.log(col) - a.start) / a.step
            else:
                pos[:, d] = (col - a.start) / a.step
        return pos

    def to_dict(self):
        return {"axes": [a.to_dict() for a in self.axes]}

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(tuple(Axis(a["kind"], a["start"], a["step"], a["count"]) for a in d["axes"]))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed grid spec: {exc}") from exc


@dataclass(frozen=True)
class Tail:
    """Behaviour outside the grid.

    ``constant`` holds ``value`` toward infinity (both ends of a uniform axis,
    the large-``x`` end of a log axis) and extends by the nearest node toward
    the origin of log axes.
    """

    kind: str = "zero"
    value: complex = 0j

    def __post_init__(self):
        if self.kind not in TAIL_KINDS:
            raise ValidationError(f"tail kind must be one of {TAIL_KINDS}, got {self.kind!r}")
        v = complex(self.value)
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise ValidationError("tail value must be finite")
        object.__setattr__(self, "value", v)

    @property
    def code(self):
        return _TAIL_CODES[self.kind]

    def to_dict(self):
        return {"kind": self.kind, "re": self.value.real, "im": self.value.imag}


ZERO_TAIL = Tail("zero")
NEAREST_TAIL = Tail("nearest")


def constant_tail(value):
    return Tail("constant", value)


@dataclass(frozen=True, eq=False)
class GridFunction:
    spec: GridSpec
    values: np.ndarray
    tail: Tail = ZERO_TAIL
    notes: tuple = field(default=())

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.complex128).ravel()
        if vals.size != self.spec.size:
            raise ValidationError(f"expected {self.spec.size} values, got {vals.size}")
        if not np.all(np.isfinite(vals)):
            raise ValidationError("grid function values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_callable(cls, spec, func, tail=ZERO_TAIL):
        """Sample ``func(x_1, ..., x_n)`` (broadcast arrays) at the grid nodes."""
        vals = np.asarray(func(*spec.mesh("x")), dtype=np.complex128)
        return cls(spec, np.broadcast_to(vals, spec.shape).ravel(), tail)

    @classmethod
    def from_coords(cls, spec, func, tail=ZERO_TAIL):
        """Sample ``func`` of the grid coordinates (``y`` on log axes)."""
        vals = np.asarray(func(*spec.mesh("coords")), dtype=np.complex128)
        return cls(spec, np.broadcast_to(vals, spec.shape).ravel(), tail)

    def grid(self):
        """Values reshaped to the grid shape."""
        return self.values.reshape(self.spec.shape)

    def with_values(self, values, tail=None, notes=()):
        return GridFunction(self.spec, values, self.tail if tail is None else tail, tuple(notes))

    def _combine(self, other, op):
        if isinstance(other, GridFunction):
            if other.spec != self.spec:
                raise ValidationError("grid functions live on different grids")
            tail = Tail(self.tail.kind, op(self.tail.value, other.tail.value)) if self.tail.kind == other.tail.kind else ZERO_TAIL
            return GridFunction(self.spec, op(self.values, other.values), tail)
        c = complex(other)
        tail = Tail(self.tail.kind, op(self.tail.value, c)) if self.tail.kind == "constant" else self.tail
        return GridFunction(self.spec, op(self.values, c), tail)

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b)

    def __mul__(self, other):
        if isinstance(other, GridFunction):
            return self._combine(other, lambda a, b: a * b)
        c = complex(other)
        return GridFunction(self.spec, self.values * c, Tail(self.tail.kind, self.tail.value * c))

    __rmul__ = __mul__

    def conj(self):
        return GridFunction(self.spec, np.conj(self.values), Tail(self.tail.kind, np.conj(self.tail.value)))


def _check_p(p):
    p = float(p)
    if not (p >= 1.0):
        raise ValidationError(f"exponent p must lie in [1, inf], got {p}")
    return p


def conjugate_exponent(p):
    p = _check_p(p)
    if p == 1.0:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def lp_norm(f, p):
    """Discrete ``L^p`` norm of ``f``; ``p = inf`` is the max over nodes."""
    p = _check_p(p)
    mag = np.abs(f.values)
    peak = float(mag.max()) if mag.size else 0.0
    if math.isinf(p) or peak == 0.0:
        out = peak
    else:
        # scaled by the peak so |f|^p neither underflows nor overflows
        total = kernels.pairwise_sum((mag / peak) ** p * f.spec.cell_measure)
        with np.errstate(over="ignore"):
            out = peak * float(total) ** (1.0 / p)
    if not math.isfinite(out):
        raise NumericalError("L^p norm overflowed; rescale the data")
    return out


def pairing(f, g):
    """Bilinear pairing ``sum f g * cell`` (no conjugation)."""
    if f.spec != g.spec:
        raise ValidationError("pairing needs identical grids")
    return complex(kernels.pairwise_sum(f.values * g.values * f.spec.cell_measure))


def _inf_sides(spec):
    low = np.array([True for _ in spec.axes])
    # y beyond the end of a log axis means x -> 0, not infinity
    high = np.array([a.kind == UNIFORM for a in spec.axes])
    return low, high


def interpolate_positions(f, pos, snap=False):
    """Interpolate ``f`` at fractional node positions (P x dim)."""
    low, high = _inf_sides(f.spec)
    return kernels.interp_points(
        f.values, pos, f.spec.shape, f.spec.strides, f.tail.code, f.tail.value, low, high, snap
    )


def interpolate(f, x):
    """Multilinear interpolation (in grid coordinates) at a point or array of points."""
    pts = np.asarray(x, dtype=float)
    dim = f.spec.dim
    single = pts.ndim == 0 or (pts.ndim == 1 and dim > 1)
    out = interpolate_positions(f, f.spec.positions(pts.reshape(-1, dim)))
    return complex(out[0]) if single else out


# --------------------------------------------------------------------------
# reflection  J f(x) = f(-x)
# --------------------------------------------------------------------------


def is_symmetric(spec, rtol=1e-12):
    for a in spec.axes:
        if a.kind != UNIFORM:
            return False
        if abs(a.start + a.stop) > rtol * max(abs(a.start), abs(a.stop), 1.0):
            return False
    return True


def reflect_function(f):
    """``(J f)(x) = f(-x)`` on a grid symmetric about the origin."""
    if not is_symmetric(f.spec):
        raise ValidationError("reflection needs uniform axes symmetric about 0")
    flipped = np.flip(f.grid(), axis=tuple(range(f.spec.dim))).ravel()
    return GridFunction(f.spec, flipped, f.tail, f.notes)


# --------------------------------------------------------------------------
# serialization: CSV of values plus a JSON sidecar
# --------------------------------------------------------------------------


def coord_names(dim, prefix="x"):
    return [prefix] if dim == 1 else [f"{prefix}{d + 1}" for d in range(dim)]


def save_gridfunction(f, path, prefix="x"):
    """Write ``path`` (CSV: ``coords..., re, im``) and ``path.json`` (grid + tail)."""
    path = Path(path)
    pts = f.spec.points
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(coord_names(f.spec.dim, prefix) + ["re", "im"])
        for row, v in zip(pts, f.values):
            w.writerow([repr(float(c)) for c in row] + [repr(float(v.real)), repr(float(v.imag))])
    side = {"grid": f.spec.to_dict(), "tail": f.tail.to_dict(), "notes": list(f.notes)}
    Path(str(path) + ".json").write_text(json.dumps(side, indent=2, sort_keys=True) + "\n")
    return path


def load_gridfunction(path):
    path = Path(path)
    side = json.loads(Path(str(path) + ".json").read_text())
    spec = GridSpec.from_dict(side["grid"])
    t = side.get("tail", {"kind": "zero"})
    tail = Tail(t["kind"], complex(t.get("re", 0.0), t.get("im", 0.0)))
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if header[-2:] != ["re", "im"]:
        raise ValidationError("CSV must end with columns re, im")
    vals = np.array([complex(float(r[-2]), float(r[-1])) for r in body])
    return GridFunction(spec, vals, tail, tuple(side.get("notes", ())))
