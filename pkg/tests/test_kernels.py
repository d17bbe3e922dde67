"""Both backends must agree to rounding and each must be bit-reproducible."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hausdorff_lab import _backend, kernels


def run_both(fn, *args, **kw):
    out = {}
    for name in ("numba", "numpy"):
        prev = _backend.use_backend(name)
        try:
            out[name] = fn(*args, **kw)
        finally:
            _backend.use_backend(prev)
    return out["numba"], out["numpy"]


def _grid_args(shape):
    shape = np.array(shape, dtype=np.int64)
    strides = np.ones(len(shape), dtype=np.int64)
    for d in range(len(shape) - 2, -1, -1):
        strides[d] = strides[d + 1] * shape[d + 1]
    return shape, strides


class TestPairwise:
    def test_matches_tree_definition(self):
        x = np.array([1.0, 2.0, 3.0, 4.0, 5.0])
        # ((1+2)+(3+4))+5
        assert kernels.pairwise_sum(x) == 15.0
        assert kernels.pairwise_rows(np.arange(10.0).reshape(2, 5)).tolist() == [10.0, 35.0]

    def test_empty(self):
        assert kernels.pairwise_sum(np.array([])) == 0.0

    @given(arrays(np.float64, st.integers(1, 300), elements=st.floats(-1e6, 1e6)))
    def test_backends_bit_identical(self, x):
        a, b = run_both(kernels.pairwise_sum, x)
        assert a == b

    def test_complex(self, rng):
        z = rng.normal(size=1001) + 1j * rng.normal(size=1001)
        a, b = run_both(kernels.pairwise_sum, z)
        assert a == b
        assert a == pytest.approx(z.sum(), rel=1e-12)


class TestInterp:
    @pytest.mark.parametrize("tail", [kernels.TAIL_ZERO, kernels.TAIL_NEAREST, kernels.TAIL_CONSTANT])
    @pytest.mark.parametrize("shape", [(17,), (6, 5), (4, 3, 5)])
    def test_backends_agree(self, rng, shape, tail):
        shape, strides = _grid_args(shape)
        vals = rng.normal(size=int(np.prod(shape))) + 1j * rng.normal(size=int(np.prod(shape)))
        pos = rng.uniform(-2.0, shape + 1.0, size=(400, len(shape)))
        pos[::7] = np.round(pos[::7])
        low = np.ones(len(shape), dtype=bool)
        high = np.zeros(len(shape), dtype=bool)
        a, b = run_both(kernels.interp_points, vals, pos, shape, strides, tail, 0.3 - 0.1j, low, high)
        np.testing.assert_array_equal(a, b)

    def test_snap(self):
        shape, strides = _grid_args((5,))
        vals = np.arange(5.0) ** 2
        pos = np.array([[2.0 + 1e-12], [2.0 + 1e-6]])
        snapped = kernels.interp_points(vals, pos, shape, strides, 0, 0, [True], [False], snap=True)
        assert snapped[0] == 4.0
        assert snapped[1] != 4.0


def _random_family(rng, n, natoms, kinds):
    coef = rng.normal(size=natoms) + 1j * rng.normal(size=natoms)
    alpha = np.ones((natoms, n))
    beta = np.zeros((natoms, n))
    offset = np.zeros(n)
    for d, kind in enumerate(kinds):
        if kind == "log":
            beta[:, d] = rng.uniform(-6, 6, size=natoms)
            beta[::3, d] = np.round(beta[::3, d])
        else:
            alpha[:, d] = rng.uniform(-1.5, 1.5, size=natoms)
            offset[d] = -4.5
    return coef, alpha, beta, offset


class TestApplyNodes:
    @pytest.mark.parametrize("tail", [kernels.TAIL_ZERO, kernels.TAIL_NEAREST, kernels.TAIL_CONSTANT])
    @pytest.mark.parametrize("shape, kinds", [((40,), ("log",)), ((10,), ("uniform",)), ((7, 6), ("log", "uniform"))])
    def test_backends_agree(self, rng, shape, kinds, tail):
        shape_a, strides = _grid_args(shape)
        size = int(np.prod(shape))
        vals = rng.normal(size=size) + 1j * rng.normal(size=size)
        coef, alpha, beta, offset = _random_family(rng, len(shape), 57, kinds)
        low = np.ones(len(shape), dtype=bool)
        high = np.array([k == "uniform" for k in kinds])
        a, b = run_both(kernels.apply_nodes, vals, shape_a, strides, tail, 1.5, low, high, coef, alpha, beta, offset)
        np.testing.assert_allclose(a, b, rtol=0, atol=1e-13 * np.abs(coef).sum() * np.abs(vals).max())

    @pytest.mark.skipif(not _backend.HAVE_NUMBA, reason="numba not installed")
    @pytest.mark.parametrize("tail", [kernels.TAIL_ZERO, kernels.TAIL_NEAREST, kernels.TAIL_CONSTANT])
    @pytest.mark.parametrize("shape, kinds", [((40,), ("log",)), ((10,), ("uniform",)), ((7, 6), ("log", "uniform")), ((5, 8), ("log", "log"))])
    def test_unrolled_match_generic(self, rng, shape, kinds, tail):
        shape_a, strides = _grid_args(shape)
        size = int(np.prod(shape))
        vals = rng.normal(size=size) + 1j * rng.normal(size=size)
        coef, alpha, beta, offset = _random_family(rng, len(shape), 57, kinds)
        low = np.ones(len(shape), dtype=bool)
        high = np.array([k == "uniform" for k in kinds])
        args = (vals, shape_a, strides, tail, 1.5 + 0j, low, high, coef, alpha, beta, offset)
        prev = _backend.use_backend("numba")
        try:
            fast = kernels.apply_nodes(*args)
        finally:
            _backend.use_backend(prev)
        assert np.array_equal(fast, kernels._apply_nodes_nb(*args))

    def test_reproducible(self, rng):
        shape, strides = _grid_args((64,))
        vals = rng.normal(size=64).astype(complex)
        coef, alpha, beta, offset = _random_family(rng, 1, 1001, ("log",))
        args = (vals, shape, strides, 0, 0, [True], [False], coef, alpha, beta, offset)
        assert np.array_equal(kernels.apply_nodes(*args), kernels.apply_nodes(*args))


class TestAssemble:
    @pytest.mark.parametrize("periodic", [False, True])
    @pytest.mark.parametrize("tail", [kernels.TAIL_ZERO, kernels.TAIL_NEAREST])
    @pytest.mark.parametrize("shape, kinds", [((30,), ("log",)), ((6, 5), ("log", "log"))])
    def test_backends_agree_and_linearize(self, rng, shape, kinds, tail, periodic):
        shape_a, strides = _grid_args(shape)
        size = int(np.prod(shape))
        coef, alpha, beta, offset = _random_family(rng, len(shape), 23, kinds)
        a, b = run_both(kernels.assemble, shape_a, strides, tail, coef, alpha, beta, offset, periodic)
        np.testing.assert_allclose(a, b, rtol=0, atol=1e-14 * np.abs(coef).sum())
        if not periodic:
            vals = rng.normal(size=size) + 1j * rng.normal(size=size)
            low = np.ones(len(shape), dtype=bool)
            ref = kernels.apply_nodes(vals, shape_a, strides, tail, 0, low, ~low, coef, alpha, beta, offset)
            np.testing.assert_allclose(a @ vals, ref, rtol=0, atol=1e-12 * np.abs(ref).max())

    def test_constant_tail_rejected(self):
        shape, strides = _grid_args((4,))
        with pytest.raises(ValueError):
            kernels.assemble(shape, strides, kernels.TAIL_CONSTANT, [1.0], [[1.0]], [[0.0]], [0.0])

    def test_periodic_shift_is_permutation(self):
        shape, strides = _grid_args((8,))
        m = kernels.assemble(shape, strides, 0, [1.0], [[1.0]], [[3.0]], [0.0], periodic=True)
        np.testing.assert_array_equal(m, np.roll(np.eye(8), 3, axis=1))


class TestSymbolSum:
    def test_backends_agree(self, rng):
        base = rng.normal(size=300) + 1j * rng.normal(size=300)
        logs = rng.normal(size=(300, 2))
        s = rng.uniform(-5, 5, size=(50, 2))
        a, b = run_both(kernels.symbol_sum, base, logs, s)
        np.testing.assert_allclose(a, b, rtol=0, atol=1e-13 * np.abs(base).sum())

    def test_matches_direct(self, rng):
        base = rng.normal(size=40)
        logs = rng.normal(size=(40, 1))
        s = np.linspace(-3, 3, 11)[:, None]
        want = (base[None, :] * np.exp(-1j * s * logs[:, 0][None, :])).sum(axis=1)
        np.testing.assert_allclose(kernels.symbol_sum(base, logs, s), want, rtol=1e-13, atol=1e-13)
