"""Hot numeric kernels.

Every kernel exists twice: a loop version compiled with ``numba.njit`` and a
vectorized numpy version.  Both follow the same arithmetic order (same
pairwise reduction tree, same interpolation corner order), so the two backends
agree to rounding and each one is bit-reproducible from run to run.  The
active backend is chosen in :mod:`hausdorff_lab._backend`.

Grid positions are fractional node indices along each axis.  Tail codes:
``TAIL_ZERO``, ``TAIL_NEAREST`` (clamp), ``TAIL_CONSTANT`` (tail value on the
sides flagged as "infinity", clamp on the others).
"""

import math

import numpy as np

from . import _backend

TAIL_ZERO = 0
TAIL_NEAREST = 1
TAIL_CONSTANT = 2

SNAP_TOL = 1e-9

# numpy chunking budget (number of (node, atom) pairs held at once)
_CHUNK_PAIRS = 1 << 21


def _njit(fn):
    if not _backend.HAVE_NUMBA:
        return None
    import numba

    return numba.njit(cache=True)(fn)


# --------------------------------------------------------------------------
# pairwise reduction
# --------------------------------------------------------------------------


def _pairwise_sum_loop(buf, n):
    # level-wise tree: pair neighbours, carry an odd tail element to the end
    while n > 1:
        half = n // 2
        for i in range(half):
            buf[i] = buf[2 * i] + buf[2 * i + 1]
        if n & 1:
            buf[half] = buf[n - 1]
            n = half + 1
        else:
            n = half
    if n == 0:
        return 0j
    return buf[0]


def _pairwise_rows_np(x):
    x = np.asarray(x)
    if x.shape[-1] == 0:
        return np.zeros(x.shape[:-1], dtype=x.dtype)
    while x.shape[-1] > 1:
        n = x.shape[-1]
        half = n // 2
        paired = x[..., 0 : 2 * half : 2] + x[..., 1 : 2 * half : 2]
        if n & 1:
            x = np.concatenate([paired, x[..., n - 1 : n]], axis=-1)
        else:
            x = paired
    return x[..., 0]


def _pairwise_1d_nb_impl(x):
    n = x.shape[0]
    if n == 0:
        return x.dtype.type(0)
    buf = x.copy()
    while n > 1:
        half = n // 2
        for i in range(half):
            buf[i] = buf[2 * i] + buf[2 * i + 1]
        if n & 1:
            buf[half] = buf[n - 1]
            n = half + 1
        else:
            n = half
    return buf[0]


_pairwise_1d_nb = _njit(_pairwise_1d_nb_impl)


def pairwise_sum(x):
    """Deterministic pairwise-tree sum of a 1-D array (real or complex)."""
    x = np.ascontiguousarray(x)
    if x.ndim != 1:
        raise ValueError("pairwise_sum expects a 1-D array")
    if x.size == 0:
        return x.dtype.type(0)
    if _backend.backend() == "numba" and x.dtype in (np.float64, np.complex128):
        return _pairwise_1d_nb(x)
    return _pairwise_rows_np(x)[()]


def pairwise_rows(x):
    """Pairwise-tree sum along the last axis (numpy path, any backend)."""
    return _pairwise_rows_np(x)


# --------------------------------------------------------------------------
# multilinear interpolation at fractional grid positions
# --------------------------------------------------------------------------


def _interp_one_impl(values, pos, shape, strides, tail_kind, tail_value, inf_low, inf_high, ibuf, tbuf):
    n = pos.shape[0]
    for d in range(n):
        p = pos[d]
        top = shape[d] - 1.0
        if p < 0.0 or p > top:
            if tail_kind == 0:
                return 0j
            if tail_kind == 2:
                if (p < 0.0 and inf_low[d]) or (p > top and inf_high[d]):
                    return tail_value
            if p < 0.0:
                p = 0.0
            else:
                p = top
        i = int(math.floor(p))
        ibuf[d] = i
        tbuf[d] = p - i
    acc = 0j
    for corner in range(1 << n):
        w = 1.0
        idx = 0
        skip = False
        for d in range(n):
            if (corner >> d) & 1:
                t = tbuf[d]
                if t == 0.0:
                    skip = True
                    break
                w *= t
                idx += (ibuf[d] + 1) * strides[d]
            else:
                w *= 1.0 - tbuf[d]
                idx += ibuf[d] * strides[d]
        if not skip:
            acc += w * values[idx]
    return acc


_interp_one_nb = _njit(_interp_one_impl)


def _snap_scalar(p):
    r = math.floor(p + 0.5)
    if abs(p - r) < SNAP_TOL:
        return r
    return p


_snap_nb = _njit(_snap_scalar)


def _interp_points_nb_impl(values, positions, shape, strides, tail_kind, tail_value, inf_low, inf_high, snap):
    npts, n = positions.shape
    out = np.empty(npts, dtype=np.complex128)
    ibuf = np.empty(n, dtype=np.int64)
    tbuf = np.empty(n, dtype=np.float64)
    pos = np.empty(n, dtype=np.float64)
    for m in range(npts):
        for d in range(n):
            p = positions[m, d]
            if snap:
                p = _snap_nb(p)
            pos[d] = p
        out[m] = _interp_one_nb(values, pos, shape, strides, tail_kind, tail_value, inf_low, inf_high, ibuf, tbuf)
    return out


_interp_points_nb = _njit(_interp_points_nb_impl) if _backend.HAVE_NUMBA else None


def _snap_np(pos):
    r = np.floor(pos + 0.5)
    return np.where(np.abs(pos - r) < SNAP_TOL, r, pos)


def _interp_points_np(values, positions, shape, strides, tail_kind, tail_value, inf_low, inf_high, snap):
    pos = np.array(positions, dtype=np.float64, copy=True)
    if snap:
        pos = _snap_np(pos)
    npts, n = pos.shape
    top = shape.astype(np.float64) - 1.0
    low = pos < 0.0
    high = pos > top
    outside = low | high
    to_zero = np.zeros(npts, dtype=bool)
    to_tail = np.zeros(npts, dtype=bool)
    # first out-of-range axis decides, matching the loop kernel
    decided = np.zeros(npts, dtype=bool)
    for d in range(n):
        cur = outside[:, d] & ~decided
        if tail_kind == TAIL_ZERO:
            to_zero |= cur
            decided |= cur
        elif tail_kind == TAIL_CONSTANT:
            hit = cur & ((low[:, d] & inf_low[d]) | (high[:, d] & inf_high[d]))
            to_tail |= hit
            decided |= hit
    pos = np.clip(pos, 0.0, top)
    i0 = np.floor(pos).astype(np.int64)
    t = pos - i0
    acc = np.zeros(npts, dtype=np.complex128)
    for corner in range(1 << n):
        w = np.ones(npts)
        idx = np.zeros(npts, dtype=np.int64)
        skip = np.zeros(npts, dtype=bool)
        for d in range(n):
            if (corner >> d) & 1:
                skip |= t[:, d] == 0.0
                w = w * t[:, d]
                idx += np.where(t[:, d] == 0.0, i0[:, d], i0[:, d] + 1) * strides[d]
            else:
                w = w * (1.0 - t[:, d])
                idx += i0[:, d] * strides[d]
        live = ~skip
        acc[live] = acc[live] + w[live] * values[idx[live]]
    acc[to_zero] = 0j
    acc[to_tail] = tail_value
    return acc


def interp_points(values, positions, shape, strides, tail_kind, tail_value, inf_low, inf_high, snap=False):
    """Interpolate flattened grid ``values`` at fractional ``positions`` (P x n)."""
    args = (
        np.ascontiguousarray(values, dtype=np.complex128),
        np.ascontiguousarray(positions, dtype=np.float64),
        np.ascontiguousarray(shape, dtype=np.int64),
        np.ascontiguousarray(strides, dtype=np.int64),
        int(tail_kind),
        complex(tail_value),
        np.ascontiguousarray(inf_low, dtype=np.bool_),
        np.ascontiguousarray(inf_high, dtype=np.bool_),
        bool(snap),
    )
    if _backend.backend() == "numba":
        return _interp_points_nb(*args)
    return _interp_points_np(*args)


# --------------------------------------------------------------------------
# Hausdorff sum at grid nodes for diagonal (separable) dilation families
#   position along axis d of A(u_k) x_j  =  alpha[k,d] * (i_d + o_d) - o_d + beta[k,d]
# --------------------------------------------------------------------------


def _apply_nodes_nb_impl(values, shape, strides, tail_kind, tail_value, inf_low, inf_high, coef, alpha, beta, offset):
    n = shape.shape[0]
    size = values.shape[0]
    natoms = coef.shape[0]
    out = np.empty(size, dtype=np.complex128)
    buf = np.empty(natoms, dtype=np.complex128)
    ibuf = np.empty(n, dtype=np.int64)
    tbuf = np.empty(n, dtype=np.float64)
    node = np.empty(n, dtype=np.float64)
    pos = np.empty(n, dtype=np.float64)
    for j in range(size):
        rem = j
        for d in range(n):
            node[d] = rem // strides[d]
            rem = rem % strides[d]
        for k in range(natoms):
            for d in range(n):
                pos[d] = _snap_nb(alpha[k, d] * (node[d] + offset[d]) - offset[d] + beta[k, d])
            v = _interp_one_nb(values, pos, shape, strides, tail_kind, tail_value, inf_low, inf_high, ibuf, tbuf)
            buf[k] = coef[k] * v
        out[j] = _pairwise_sum_loop_nb(buf, natoms)
    return out


def _apply_nodes_1d_nb_impl(values, size, tail_kind, tail_value, inf_low, inf_high, coef, alpha, beta, offset):
    # same arithmetic as the n-D kernel with n = 1, without the per-pair calls
    natoms = coef.shape[0]
    out = np.empty(size, dtype=np.complex128)
    buf = np.empty(natoms, dtype=np.complex128)
    top = size - 1.0
    for j in range(size):
        for k in range(natoms):
            p = alpha[k] * (j + offset) - offset + beta[k]
            r = math.floor(p + 0.5)
            if abs(p - r) < SNAP_TOL:
                p = r
            if p < 0.0 or p > top:
                if tail_kind == 0:
                    buf[k] = 0j
                    continue
                if tail_kind == 2 and ((p < 0.0 and inf_low) or (p > top and inf_high)):
                    buf[k] = coef[k] * tail_value
                    continue
                p = 0.0 if p < 0.0 else top
            i = int(math.floor(p))
            t = p - i
            v = (1.0 - t) * values[i]
            if t != 0.0:
                v += t * values[i + 1]
            buf[k] = coef[k] * v
        out[j] = _pairwise_sum_loop_nb(buf, natoms)
    return out


def _axis_pos(p, top, tail_kind, low_inf, high_inf):
    # tail handling along one axis: code 0 inside (or clamped), 1 zero, 2 tail value
    if p < 0.0 or p > top:
        if tail_kind == 0:
            return p, 1
        if tail_kind == 2 and ((p < 0.0 and low_inf) or (p > top and high_inf)):
            return p, 2
        return (0.0 if p < 0.0 else top), 0
    return p, 0


def _apply_nodes_2d_nb_impl(values, shape, strides, tail_kind, tail_value, inf_low, inf_high, coef, alpha, beta, offset):
    # the n-D kernel unrolled for n = 2 (same corner order and tail precedence)
    size = values.shape[0]
    natoms = coef.shape[0]
    out = np.empty(size, dtype=np.complex128)
    buf = np.empty(natoms, dtype=np.complex128)
    top0 = shape[0] - 1.0
    top1 = shape[1] - 1.0
    s0 = strides[0]
    s1 = strides[1]
    for j in range(size):
        n0 = float(j // s0)
        n1 = float((j % s0) // s1)
        for k in range(natoms):
            p0 = _snap_nb(alpha[k, 0] * (n0 + offset[0]) - offset[0] + beta[k, 0])
            p1 = _snap_nb(alpha[k, 1] * (n1 + offset[1]) - offset[1] + beta[k, 1])
            p0, c0 = _axis_pos_nb(p0, top0, tail_kind, inf_low[0], inf_high[0])
            if c0 == 1:
                buf[k] = 0j
                continue
            if c0 == 2:
                buf[k] = coef[k] * tail_value
                continue
            p1, c1 = _axis_pos_nb(p1, top1, tail_kind, inf_low[1], inf_high[1])
            if c1 == 1:
                buf[k] = 0j
                continue
            if c1 == 2:
                buf[k] = coef[k] * tail_value
                continue
            i0 = int(math.floor(p0))
            i1 = int(math.floor(p1))
            t0 = p0 - i0
            t1 = p1 - i1
            base = i0 * s0 + i1 * s1
            acc = 0j
            acc += ((1.0 - t0) * (1.0 - t1)) * values[base]
            if t0 != 0.0:
                acc += (t0 * (1.0 - t1)) * values[base + s0]
            if t1 != 0.0:
                acc += ((1.0 - t0) * t1) * values[base + s1]
                if t0 != 0.0:
                    acc += (t0 * t1) * values[base + s0 + s1]
            buf[k] = coef[k] * acc
        out[j] = _pairwise_sum_loop_nb(buf, natoms)
    return out


_axis_pos_nb = _njit(_axis_pos) if _backend.HAVE_NUMBA else None
_pairwise_sum_loop_nb = _njit(_pairwise_sum_loop) if _backend.HAVE_NUMBA else None
_apply_nodes_nb = _njit(_apply_nodes_nb_impl) if _backend.HAVE_NUMBA else None
_apply_nodes_1d_nb = _njit(_apply_nodes_1d_nb_impl) if _backend.HAVE_NUMBA else None
_apply_nodes_2d_nb = _njit(_apply_nodes_2d_nb_impl) if _backend.HAVE_NUMBA else None


def _node_indices(shape):
    grids = np.meshgrid(*[np.arange(s, dtype=np.float64) for s in shape], indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def _apply_nodes_np(values, shape, strides, tail_kind, tail_value, inf_low, inf_high, coef, alpha, beta, offset):
    nodes = _node_indices(shape)
    size, n = nodes.shape
    natoms = coef.shape[0]
    out = np.empty(size, dtype=np.complex128)
    block = max(1, _CHUNK_PAIRS // max(natoms, 1))
    for start in range(0, size, block):
        nd = nodes[start : start + block]
        pos = alpha[None, :, :] * (nd[:, None, :] + offset) - offset + beta[None, :, :]
        vals = _interp_points_np(
            values, pos.reshape(-1, n), shape, strides, tail_kind, tail_value, inf_low, inf_high, True
        ).reshape(nd.shape[0], natoms)
        out[start : start + block] = _pairwise_rows_np(coef[None, :] * vals)
    return out


def apply_nodes(values, shape, strides, tail_kind, tail_value, inf_low, inf_high, coef, alpha, beta, offset):
    """Evaluate ``sum_k coef[k] * f(A_k x_j)`` at every grid node ``x_j``."""
    args = (
        np.ascontiguousarray(values, dtype=np.complex128),
        np.ascontiguousarray(shape, dtype=np.int64),
        np.ascontiguousarray(strides, dtype=np.int64),
        int(tail_kind),
        complex(tail_value),
        np.ascontiguousarray(inf_low, dtype=np.bool_),
        np.ascontiguousarray(inf_high, dtype=np.bool_),
        np.ascontiguousarray(coef, dtype=np.complex128),
        np.ascontiguousarray(alpha, dtype=np.float64),
        np.ascontiguousarray(beta, dtype=np.float64),
        np.ascontiguousarray(offset, dtype=np.float64),
    )
    if args[7].shape[0] == 0:
        return np.zeros(args[0].shape[0], dtype=np.complex128)
    if _backend.backend() == "numba":
        if args[1].shape[0] == 1:
            v, shape, _, tk, tv, lo, hi, c, al, be, of = args
            return _apply_nodes_1d_nb(v, int(shape[0]), tk, tv, bool(lo[0]), bool(hi[0]), c, al[:, 0].copy(), be[:, 0].copy(), float(of[0]))
        if args[1].shape[0] == 2:
            return _apply_nodes_2d_nb(*args)
        return _apply_nodes_nb(*args)
    return _apply_nodes_np(*args)


# --------------------------------------------------------------------------
# matrix assembly: the linearization of apply_nodes
#   periodic=True wraps corner indices modulo the axis length instead of
#   applying a tail (used for circulant closures in the unitary frame)
# --------------------------------------------------------------------------


def _assemble_nb_impl(shape, strides, tail_kind, coef, alpha, beta, offset, periodic):
    n = shape.shape[0]
    size = 1
    for d in range(n):
        size *= shape[d]
    natoms = coef.shape[0]
    mat = np.zeros((size, size), dtype=np.complex128)
    ibuf = np.empty(n, dtype=np.int64)
    tbuf = np.empty(n, dtype=np.float64)
    node = np.empty(n, dtype=np.float64)
    for j in range(size):
        rem = j
        for d in range(n):
            node[d] = rem // strides[d]
            rem = rem % strides[d]
        for k in range(natoms):
            dropped = False
            for d in range(n):
                p = _snap_nb(alpha[k, d] * (node[d] + offset[d]) - offset[d] + beta[k, d])
                top = shape[d] - 1.0
                if not periodic and (p < 0.0 or p > top):
                    if tail_kind == 0:
                        dropped = True
                        break
                    p = 0.0 if p < 0.0 else top
                i = int(math.floor(p))
                ibuf[d] = i
                tbuf[d] = p - i
            if dropped:
                continue
            for corner in range(1 << n):
                w = 1.0
                idx = 0
                skip = False
                for d in range(n):
                    if (corner >> d) & 1:
                        t = tbuf[d]
                        if t == 0.0:
                            skip = True
                            break
                        w *= t
                        ii = ibuf[d] + 1
                    else:
                        w *= 1.0 - tbuf[d]
                        ii = ibuf[d]
                    if periodic:
                        ii = ii % shape[d]
                    idx += ii * strides[d]
                if not skip:
                    mat[j, idx] += coef[k] * w
    return mat


_assemble_nb = _njit(_assemble_nb_impl) if _backend.HAVE_NUMBA else None


def _assemble_np(shape, strides, tail_kind, coef, alpha, beta, offset, periodic):
    nodes = _node_indices(shape)
    size, n = nodes.shape
    natoms = coef.shape[0]
    top = shape.astype(np.float64) - 1.0
    flat = np.zeros(size * size, dtype=np.complex128)
    block = max(1, _CHUNK_PAIRS // max(natoms, 1))
    for start in range(0, size, block):
        nd = nodes[start : start + block]
        rows = np.arange(start, start + nd.shape[0])
        pos = _snap_np(alpha[None, :, :] * (nd[:, None, :] + offset) - offset + beta[None, :, :])
        keep = np.ones(pos.shape[:2], dtype=bool)
        if not periodic:
            outside = (pos < 0.0) | (pos > top)
            if tail_kind == TAIL_ZERO:
                keep = ~outside.any(axis=2)
            pos = np.clip(pos, 0.0, top)
        i0 = np.floor(pos).astype(np.int64)
        t = pos - i0
        rr = np.broadcast_to(rows[:, None], keep.shape)
        cc = np.broadcast_to(coef[None, :], keep.shape)
        idx_l, w_l, live_l = [], [], []
        for corner in range(1 << n):
            w = np.ones(keep.shape)
            idx = np.zeros(keep.shape, dtype=np.int64)
            live = keep.copy()
            for d in range(n):
                if (corner >> d) & 1:
                    live &= t[..., d] != 0.0
                    w = w * t[..., d]
                    ii = i0[..., d] + 1
                else:
                    w = w * (1.0 - t[..., d])
                    ii = i0[..., d]
                if periodic:
                    ii = ii % shape[d]
                else:
                    ii = np.minimum(ii, shape[d] - 1)
                idx += ii * strides[d]
            idx_l.append(idx)
            w_l.append(w)
            live_l.append(live)
        # (row, atom, corner) order, matching the loop kernel
        idx = np.stack(idx_l, axis=-1)
        w = np.stack(w_l, axis=-1)
        live = np.stack(live_l, axis=-1)
        contrib = cc[..., None] * w
        lin = (rr[..., None] * size + idx)[live]
        contrib = contrib[live]
        flat += np.bincount(lin, weights=contrib.real, minlength=size * size) + 1j * np.bincount(
            lin, weights=contrib.imag, minlength=size * size
        )
    return flat.reshape(size, size)


def assemble(shape, strides, tail_kind, coef, alpha, beta, offset, periodic=False):
    """Dense matrix ``T`` with ``T @ values == apply_nodes(values, ...)`` (zero/nearest tails)."""
    args = (
        np.ascontiguousarray(shape, dtype=np.int64),
        np.ascontiguousarray(strides, dtype=np.int64),
        int(tail_kind),
        np.ascontiguousarray(coef, dtype=np.complex128),
        np.ascontiguousarray(alpha, dtype=np.float64),
        np.ascontiguousarray(beta, dtype=np.float64),
        np.ascontiguousarray(offset, dtype=np.float64),
        bool(periodic),
    )
    if tail_kind == TAIL_CONSTANT:
        raise ValueError("a constant tail makes the map affine; no matrix exists")
    if _backend.backend() == "numba":
        return _assemble_nb(*args)
    return _assemble_np(*args)


# --------------------------------------------------------------------------
# symbol sums:  out[m] = sum_k base[k] * exp(-i * s_m . L_k)
# --------------------------------------------------------------------------


def _symbol_nb_impl(base, logs, s):
    npts, n = s.shape
    natoms = base.shape[0]
    out = np.empty(npts, dtype=np.complex128)
    buf = np.empty(natoms, dtype=np.complex128)
    for m in range(npts):
        for k in range(natoms):
            th = 0.0
            for d in range(n):
                th += s[m, d] * logs[k, d]
            buf[k] = base[k] * complex(math.cos(th), -math.sin(th))
        out[m] = _pairwise_sum_loop_nb(buf, natoms)
    return out


_symbol_nb = _njit(_symbol_nb_impl) if _backend.HAVE_NUMBA else None


def _symbol_np(base, logs, s):
    npts, n = s.shape
    natoms = base.shape[0]
    out = np.empty(npts, dtype=np.complex128)
    block = max(1, _CHUNK_PAIRS // max(natoms, 1))
    for start in range(0, npts, block):
        sc = s[start : start + block]
        th = np.zeros((sc.shape[0], natoms))
        for d in range(n):
            th = th + sc[:, d : d + 1] * logs[None, :, d]
        phase = np.empty(th.shape, dtype=np.complex128)
        phase.real = np.cos(th)
        phase.imag = -np.sin(th)
        out[start : start + block] = _pairwise_rows_np(base[None, :] * phase)
    return out


def symbol_sum(base, logs, s):
    """Evaluate ``sum_k base[k] exp(-i s.L_k)`` for each row of ``s``."""
    args = (
        np.ascontiguousarray(base, dtype=np.complex128),
        np.ascontiguousarray(logs, dtype=np.float64),
        np.ascontiguousarray(s, dtype=np.float64),
    )
    if args[0].shape[0] == 0:
        return np.zeros(args[2].shape[0], dtype=np.complex128)
    if _backend.backend() == "numba":
        return _symbol_nb(*args)
    return _symbol_np(*args)
