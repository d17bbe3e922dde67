"""Finite-section matrices and spectral diagnostics on ``L^2``.

Two discretizations of a positive diagonal family on a log-uniform grid:

``boundary="tail"``
    the exact linearization of :func:`hausdorff.apply` (zero or nearest tail),
    so ``T @ f.values == apply(op, f).values``.
``boundary="periodic"``
    the operator in the unitary frame ``F(y) = f(e^(-y)) e^(-y/2)`` of
    ``L^2(dx) -> L^2(dy)``, where dilations are pure translations, closed
    periodically.  Translations commute, so the matrix is (nearly) circulant and
    its spectrum samples the symbol; a zero-tail section of a one-sided
    average is triangular and its eigenvalues collapse onto the diagonal.

Dense decompositions are LAPACK's (``numpy.linalg.svd``, ``scipy.linalg.eig``).
"""

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import hausdorff, kernels
from .errors import NumericalError, ValidationError
from .numgrid import LOG, GridSpec, log_axis_spacing

MAX_SVD = 2048
MAX_EIG = 1024
LOCUS_FLOOR = 0.1
EIG_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense finite section ``T`` on a grid with cell measures ``d``.

    ``entries`` holds ``B = D^(1/2) T D^(-1/2)`` when ``symmetrized`` is set
    (the form that is unitarily equivalent to the operator on ``L^2``), and
    ``T`` otherwise.
    """

    entries: np.ndarray
    symmetrized: bool
    cell_measure: np.ndarray
    boundary: str = "tail"

    @property
    def n_grid(self):
        return self.entries.shape[0]

    def _ratio(self):
        # sqrt(d_i / d_j) without forming d^(+-1/2) separately
        ld = 0.5 * np.log(self.cell_measure)
        return np.exp(ld[:, None] - ld[None, :])

    def symmetric_form(self):
        if self.symmetrized:
            return self
        return OperatorMatrix(self.entries * self._ratio(), True, self.cell_measure, self.boundary)

    def plain_form(self):
        if not self.symmetrized:
            return self
        return OperatorMatrix(self.entries / self._ratio(), False, self.cell_measure, self.boundary)


def _check_spec(op, spec):
    if not isinstance(spec, GridSpec):
        raise ValidationError("discretize needs a GridSpec")
    if not spec.all_log:
        raise ValidationError("spectral diagnostics need a log-uniform grid")
    if spec.size > MAX_SVD:
        raise ValidationError(f"grid too large for dense work: {spec.size} > {MAX_SVD} nodes")
    if spec.dim != op.n:
        raise ValidationError(f"operator acts on R^{op.n}, grid is {spec.dim}-dimensional")
    if op.has_rotation or not op.is_positive:
        raise ValidationError("discretize needs a positive diagonal family")


def discretize(op, spec, boundary="tail", tail="zero", symmetrized=True):
    """Collocation matrix of ``op`` on the log grid ``spec``."""
    _check_spec(op, spec)
    coef, dil = hausdorff._active(op)
    alpha, beta, offset = hausdorff._separable_args(spec, dil)
    if boundary == "tail":
        code = {"zero": kernels.TAIL_ZERO, "nearest": kernels.TAIL_NEAREST}.get(tail)
        if code is None:
            raise ValidationError("matrix tails are 'zero' or 'nearest' (a constant tail is affine)")
        T = kernels.assemble(spec.shape, spec.strides, code, coef, alpha, beta, offset)
        m = OperatorMatrix(T, False, spec.cell_measure, boundary)
        return m.symmetric_form() if symmetrized else m
    if boundary == "periodic":
        # unitary frame: (U H U^-1 F)(y) = sum_k c_k det(a_k)^(-1/2) F(y - log a_k)
        c = coef * np.exp(-0.5 * np.log(dil).sum(axis=1))
        B = kernels.assemble(spec.shape, spec.strides, kernels.TAIL_ZERO, c, alpha, beta, offset, periodic=True)
        m = OperatorMatrix(B, True, spec.cell_measure, boundary)
        return m if symmetrized else m.plain_form()
    raise ValidationError(f"boundary must be 'tail' or 'periodic', got {boundary!r}")


def gaussian_control_matrix(n, interval=(0.0, 10.0), width=1.0):
    """Symmetrized Nystrom matrix of ``k(x, y) = exp(-(x - y)^2 / width^2)`` on ``interval``.

    A compact integral operator: the negative control of :func:`riesz_report`.
    """
    n = int(n)
    if n < 2 or n > MAX_SVD:
        raise ValidationError(f"control size must lie in [2, {MAX_SVD}]")
    a, b = map(float, interval)
    x = np.linspace(a, b, n)
    w = np.full(n, (b - a) / (n - 1))
    w[0] = w[-1] = 0.5 * w[0]
    sw = np.sqrt(w)
    K = np.exp(-((x[:, None] - x[None, :]) ** 2) / width**2)
    return OperatorMatrix((sw[:, None] * K * sw[None, :]).astype(complex), True, w, "control")


def _entries(m):
    A = m.entries if isinstance(m, OperatorMatrix) else np.asarray(m, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValidationError("expected a square matrix")
    if not np.all(np.isfinite(A)):
        raise NumericalError("matrix has non-finite entries")
    return A


def svd_values(m):
    """All singular values, descending."""
    A = _entries(m)
    if A.shape[0] > MAX_SVD:
        raise ValidationError(f"matrix too large: {A.shape[0]} > {MAX_SVD}")
    return np.linalg.svd(A, compute_uv=False)


@dataclass(frozen=True)
class EigenResult:
    values: np.ndarray
    max_residual: float  # relative, over re-checked extremal pairs
    ok: bool
    message: str = ""


def eigenvalues(m, check=5):
    """All eigenvalues; the ``check`` largest and smallest in modulus are re-verified."""
    A = _entries(m)
    n = A.shape[0]
    if n > MAX_EIG:
        raise ValidationError(f"matrix too large for eigenvalues: {n} > {MAX_EIG}")
    try:
        lam, vec = scipy.linalg.eig(A)
    except (np.linalg.LinAlgError, ValueError) as exc:
        return EigenResult(np.array([], dtype=complex), math.inf, False, f"eigen-solver failed: {exc}")
    order = np.argsort(-np.abs(lam), kind="stable")
    lam, vec = lam[order], vec[:, order]
    idx = sorted(set(range(min(check, n))) | set(range(max(n - check, 0), n)))
    scale = max(np.linalg.norm(A, 2), np.finfo(float).tiny)
    res = 0.0
    for k in idx:
        v = vec[:, k]
        res = max(res, float(np.linalg.norm(A @ v - lam[k] * v) / (np.linalg.norm(v) * scale)))
    ok = res <= EIG_RTOL
    return EigenResult(lam, res, ok, "" if ok else f"eigenpair residual {res:.3e} exceeds {EIG_RTOL}")


def _point_polyline_distance(z, curve):
    a, b = curve[:-1], curve[1:]
    ab = b - a
    denom = np.abs(ab) ** 2
    out = np.empty(z.size)
    for i, zi in enumerate(z):
        t = np.where(denom > 0, np.real((zi - a) * np.conj(ab)) / np.where(denom > 0, denom, 1.0), 0.0)
        t = np.clip(t, 0.0, 1.0)
        out[i] = np.min(np.abs(a + t * ab - zi))
    return out


def locus_distances(lam, curve, floor=LOCUS_FLOOR):
    """Distance of each eigenvalue with ``|lam| > floor`` to the polyline ``curve``."""
    lam = np.asarray(lam)
    keep = lam[np.abs(lam) > floor]
    if keep.size == 0:
        return keep.real
    return _point_polyline_distance(keep, np.asarray(curve))


@dataclass
class SpectralReport:
    n: int
    sigma: np.ndarray
    eigenvalues: np.ndarray
    threshold_counts: dict
    locus_distance: float = None
    rank_k_error: np.ndarray = None  # sigma_{k+1}, k = 0..N-1
    eig_ok: bool = True
    eig_message: str = ""

    def relative_rank_error(self, k):
        return float(self.rank_k_error[k] / self.sigma[0]) if self.sigma[0] else 0.0

    def to_dict(self):
        return {
            "n": self.n,
            "sigma_1": float(self.sigma[0]),
            "threshold_counts": {repr(float(c)): int(v) for c, v in self.threshold_counts.items()},
            "locus_distance": None if self.locus_distance is None else float(self.locus_distance),
            "rank_error_quarter": self.relative_rank_error(self.n // 4),
            "rank_error_30": self.relative_rank_error(min(30, self.n - 1)),
            "eigenvalues_ok": self.eig_ok,
            "eigen_message": self.eig_message,
        }


def spectral_report(m, thresholds=(0.5,), curve=None):
    sigma = svd_values(m)
    eig = eigenvalues(m)
    counts = {float(c): int(np.count_nonzero(sigma > c)) for c in thresholds}
    rank_err = np.append(sigma[1:], 0.0)
    locus = None
    if curve is not None and eig.values.size:
        d = locus_distances(eig.values, curve)
        locus = float(d.max()) if d.size else 0.0
    return SpectralReport(sigma.shape[0], sigma, eig.values, counts, locus, rank_err, eig.ok, eig.message)


CONTROL = "gaussian-compact-control"

NON_COMPACT = "NON-COMPACT-EVIDENCE"
COMPACT = "COMPACT-LIKE"
INCONCLUSIVE = "INCONCLUSIVE"


def verdict(counts, growth=1.5):
    """Classify a sequence of threshold counts taken at successive grid doublings."""
    counts = list(counts)
    pairs = list(zip(counts[:-1], counts[1:]))
    if pairs and all(b > a and b >= growth * a for a, b in pairs):
        return NON_COMPACT
    if pairs and all(abs(b - a) <= 1 for a, b in pairs):
        return COMPACT
    return INCONCLUSIVE


@dataclass
class RieszReport:
    sizes: list
    reports: list
    verdict: str
    threshold: float
    spacing: float = None
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "threshold": self.threshold,
            "spacing": self.spacing,
            "sizes": list(self.sizes),
            "counts": [r.threshold_counts[self.threshold] for r in self.reports],
            "per_n": [r.to_dict() for r in self.reports],
            "notes": list(self.notes),
        }


def riesz_grid(n, spacing=0.5):
    """Centred 1-D log grid of ``n`` nodes at fixed spacing: doubling ``n`` doubles the ``y`` extent."""
    return GridSpec((log_axis_spacing(int(n), spacing),))


def symbol_curve(op, spec):
    """Symbol at ``p = 2`` sampled on the Nyquist frequency grid of ``spec``, as a polyline."""
    from .mellin import frequency_spec, symbol

    phi = symbol(op, frequency_spec(spec), 2.0).values
    return np.append(phi, phi[0])


def riesz_report(target, sizes, thresholds=(0.5,), spacing=0.5):
    """Grid-refinement study of threshold counts, eigenvalue loci and rank-k errors.

    ``target`` is a 1-D positive Hausdorff operator (periodic unitary-frame
    section on a log grid of fixed ``spacing``) or :data:`CONTROL`.
    """
    sizes = [int(n) for n in sizes]
    if len(sizes) < 2:
        raise ValidationError("riesz_report needs at least two grid sizes")
    if any(n > MAX_EIG or n < 2 for n in sizes):
        raise ValidationError(f"grid sizes must lie in [2, {MAX_EIG}]")
    thresholds = tuple(float(c) for c in thresholds)
    if not thresholds:
        raise ValidationError("need at least one threshold")
    reports = []
    notes = []
    for n in sizes:
        if isinstance(target, str):
            if target != CONTROL:
                raise ValidationError(f"unknown spectral target {target!r}")
            reports.append(spectral_report(gaussian_control_matrix(n), thresholds))
        else:
            if target.n != 1:
                raise ValidationError("riesz_report supports 1-D operators")
            spec = riesz_grid(n, spacing)
            m = discretize(target, spec, boundary="periodic")
            reports.append(spectral_report(m, thresholds, symbol_curve(target, spec)))
        if not reports[-1].eig_ok:
            notes.append(f"N={n}: {reports[-1].eig_message}")
    c = thresholds[0]
    v = verdict([r.threshold_counts[c] for r in reports])
    return RieszReport(sizes, reports, v, c, None if isinstance(target, str) else spacing, notes)
