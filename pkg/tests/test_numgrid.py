import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hausdorff_lab import numgrid as ng
from hausdorff_lab.errors import ValidationError

LOG1 = ng.GridSpec((ng.log_axis(-30.0, 30.0, 2001),))


def unit_indicator(spec):
    return ng.GridFunction.from_coords(spec, lambda y: (y >= 0).astype(float))


class TestGridSpec:
    def test_strides_and_shape(self):
        spec = ng.GridSpec((ng.uniform_axis(0, 1, 3), ng.log_axis(-1, 1, 4), ng.uniform_axis(0, 1, 5)))
        assert spec.shape == (3, 4, 5)
        assert spec.strides == (20, 5, 1)
        assert spec.points.shape == (60, 3)

    @pytest.mark.parametrize("count, step", [(1, 0.1), (5, 0.0), (5, -1.0), (5, math.inf)])
    def test_invalid_axes(self, count, step):
        with pytest.raises(ValidationError):
            ng.Axis("log", 0.0, step, count)

    def test_log_axis_rejects_nonpositive_points(self):
        with pytest.raises(ValidationError):
            LOG1.positions([[0.0]])
        with pytest.raises(ValidationError):
            LOG1.positions([[-1.0]])

    def test_cell_measure_log(self):
        a = LOG1.axes[0]
        np.testing.assert_allclose(LOG1.cell_measure, a.step * np.exp(-a.coords), rtol=1e-15)

    def test_dict_round_trip(self):
        spec = ng.GridSpec((ng.uniform_axis(-2, 2, 9), ng.log_axis(-1, 3, 4)))
        assert ng.GridSpec.from_dict(json.loads(json.dumps(spec.to_dict()))) == spec


class TestGridFunction:
    def test_values_length_checked(self):
        with pytest.raises(ValidationError):
            ng.GridFunction(LOG1, np.zeros(5))

    def test_values_must_be_finite(self):
        v = np.zeros(LOG1.size)
        v[3] = np.nan
        with pytest.raises(ValidationError):
            ng.GridFunction(LOG1, v)

    def test_immutable(self):
        f = unit_indicator(LOG1)
        with pytest.raises(ValueError):
            f.values[0] = 2.0

    def test_tail_kinds(self):
        with pytest.raises(ValidationError):
            ng.Tail("periodic")
        with pytest.raises(ValidationError):
            ng.Tail("constant", math.inf)


class TestLpNorm:
    def test_zero(self):
        assert ng.lp_norm(ng.GridFunction(LOG1, np.zeros(LOG1.size)), 2) == 0.0

    def test_indicator_unit_interval(self):
        # int_0^1 dx = 1; the only error is the half cell at the jump
        h = LOG1.axes[0].step
        assert ng.lp_norm(unit_indicator(LOG1), 2) ** 2 == pytest.approx(1.0, abs=h)

    def test_indicator_aligned_half_cell(self):
        # even count centred at 0: nodes at +-h/2, the jump sits mid-cell
        spec = ng.GridSpec((ng.log_axis_spacing(4000, 0.01),))
        assert ng.lp_norm(unit_indicator(spec), 2) ** 2 == pytest.approx(1.0, abs=1e-4)

    def test_constant_p1(self):
        spec = ng.GridSpec((ng.uniform_axis(-1.0, 3.0, 41),))
        f = ng.GridFunction(spec, np.full(41, 2.5))
        total = float(np.sum(spec.cell_measure))
        assert ng.lp_norm(f, 1) == pytest.approx(2.5 * total, rel=1e-14)

    def test_inf_norm(self):
        f = ng.GridFunction(LOG1, np.linspace(-3, 1, LOG1.size))
        assert ng.lp_norm(f, math.inf) == 3.0

    def test_invalid_p(self):
        with pytest.raises(ValidationError):
            ng.lp_norm(unit_indicator(LOG1), 0.5)

    def test_extreme_scales(self):
        f = ng.GridFunction(SMALL, np.linspace(1.0, 2.0, 64))
        base = ng.lp_norm(f, 2)
        assert ng.lp_norm(f * 1e300, 2) == pytest.approx(1e300 * base, rel=1e-14)
        assert ng.lp_norm(f * 1e-300, 2) == pytest.approx(1e-300 * base, rel=1e-14)

    def test_overflow_is_reported(self):
        spec = ng.GridSpec((ng.uniform_axis(0.0, 100.0, 11),))
        f = ng.GridFunction(spec, np.full(11, 1e308))
        with pytest.raises(ng.NumericalError):
            ng.lp_norm(f, 1)


class TestPairing:
    def test_with_zero(self):
        f = unit_indicator(LOG1)
        assert ng.pairing(f, f * 0) == 0

    def test_indicators(self):
        spec = ng.GridSpec((ng.log_axis_spacing(4000, 0.01),))
        f = unit_indicator(spec)
        assert ng.pairing(f, f) == pytest.approx(1.0, abs=1e-4)

    def test_symmetric(self, rng):
        f = ng.GridFunction(LOG1, rng.normal(size=LOG1.size) + 1j * rng.normal(size=LOG1.size))
        g = ng.GridFunction(LOG1, rng.normal(size=LOG1.size))
        assert ng.pairing(f, g) == ng.pairing(g, f)

    def test_spec_mismatch(self):
        other = ng.GridSpec((ng.log_axis(-1, 1, 5),))
        with pytest.raises(ValidationError):
            ng.pairing(unit_indicator(LOG1), unit_indicator(other))


class TestInterpolate:
    spec = ng.GridSpec((ng.log_axis(-2.0, 2.0, 41),))

    def test_node_collocation(self, rng):
        f = ng.GridFunction(self.spec, rng.normal(size=41))
        x = self.spec.axes[0].x
        for j in (0, 7, 40):
            # x = exp(-y) rounds, so the node is hit to rounding
            assert ng.interpolate(f, x[j]) == pytest.approx(f.values[j], rel=1e-13, abs=1e-15)
        assert ng.interpolate_positions(f, np.array([[7.0]]))[0] == f.values[7]

    def test_linear_in_y_is_exact(self):
        f = ng.GridFunction.from_coords(self.spec, lambda y: 3.0 * y - 1.0)
        for y in (-1.93, -0.01, 0.37, 1.999):
            assert ng.interpolate(f, math.exp(-y)) == pytest.approx(3.0 * y - 1.0, rel=1e-12)

    def test_constant_tail_toward_infinity(self):
        f = ng.GridFunction(self.spec, np.zeros(41), ng.constant_tail(0.75))
        assert ng.interpolate(f, 1e6) == 0.75

    def test_constant_tail_clamps_toward_origin(self):
        f = ng.GridFunction.from_coords(self.spec, lambda y: y, ng.constant_tail(9.0))
        assert ng.interpolate(f, 1e-6) == pytest.approx(2.0)

    def test_zero_and_nearest_tails(self):
        f = ng.GridFunction.from_coords(self.spec, lambda y: y + 5.0)
        assert ng.interpolate(f, 1e6) == 0
        g = f.with_values(f.values, ng.NEAREST_TAIL)
        assert ng.interpolate(g, 1e6) == pytest.approx(3.0)
        assert ng.interpolate(g, 1e-6) == pytest.approx(7.0)

    def test_array_of_points(self):
        f = ng.GridFunction.from_coords(self.spec, lambda y: y)
        out = ng.interpolate(f, np.array([1.0, math.e]))
        np.testing.assert_allclose(out, [0.0, -1.0], atol=1e-12)

    def test_rejects_nonpositive(self):
        f = ng.GridFunction.from_coords(self.spec, lambda y: y)
        with pytest.raises(ValidationError):
            ng.interpolate(f, -1.0)

    def test_multilinear_2d_exact(self):
        spec = ng.GridSpec((ng.uniform_axis(-1, 1, 11), ng.log_axis(-1, 1, 9)))
        f = ng.GridFunction.from_coords(spec, lambda a, b: 2 * a - b + 0.5 * a * b + 1)
        pts = np.array([[0.33, math.exp(-0.21)], [-0.97, math.exp(0.8)]])
        c = np.array([[0.33, 0.21], [-0.97, -0.8]])
        want = 2 * c[:, 0] - c[:, 1] + 0.5 * c[:, 0] * c[:, 1] + 1
        np.testing.assert_allclose(ng.interpolate(f, pts), want, rtol=1e-12)


class TestReflection:
    spec = ng.GridSpec((ng.uniform_axis(-3, 3, 61),))

    def test_involution_exact(self, rng):
        f = ng.GridFunction(self.spec, rng.normal(size=61) + 1j * rng.normal(size=61))
        assert np.array_equal(ng.reflect_function(ng.reflect_function(f)).values, f.values)

    def test_maps_x_to_minus_x(self):
        f = ng.GridFunction.from_callable(self.spec, lambda x: x**3 + x)
        np.testing.assert_allclose(ng.reflect_function(f).values, -f.values, atol=1e-12)

    def test_needs_symmetric_grid(self):
        with pytest.raises(ValidationError):
            ng.reflect_function(ng.GridFunction(ng.GridSpec((ng.uniform_axis(0, 3, 7),)), np.zeros(7)))


class TestSerialization:
    def test_csv_round_trip(self, tmp_path, rng):
        spec = ng.GridSpec((ng.log_axis(-1, 1, 5), ng.uniform_axis(0, 2, 3)))
        f = ng.GridFunction(spec, rng.normal(size=15) + 1j * rng.normal(size=15), ng.constant_tail(0.5 - 2j))
        path = ng.save_gridfunction(f, tmp_path / "f.csv")
        header = path.read_text().splitlines()[0]
        assert header == "x1,x2,re,im"
        g = ng.load_gridfunction(path)
        assert g.spec == spec
        assert g.tail == f.tail
        assert np.array_equal(g.values, f.values)


# --- properties --------------------------------------------------------------

_vals = arrays(np.float64, 64, elements=st.floats(-1e3, 1e3, allow_nan=False))
_p = st.one_of(st.floats(1.0, 8.0), st.just(math.inf))
SMALL = ng.GridSpec((ng.log_axis(-2.0, 3.0, 64),))


class TestProperties:
    @given(_vals, st.floats(-50, 50), _p)
    def test_homogeneity(self, v, c, p):
        f = ng.GridFunction(SMALL, v)
        assert ng.lp_norm(f * c, p) == pytest.approx(abs(c) * ng.lp_norm(f, p), rel=1e-12, abs=1e-300)

    @given(_vals, _vals, _p)
    def test_triangle(self, a, b, p):
        f, g = ng.GridFunction(SMALL, a), ng.GridFunction(SMALL, b)
        assert ng.lp_norm(f + g, p) <= ng.lp_norm(f, p) + ng.lp_norm(g, p) + 1e-12 * (1 + ng.lp_norm(f, p) + ng.lp_norm(g, p))

    @given(_vals, _vals, st.floats(1.0, 8.0))
    def test_holder(self, a, b, p):
        f, g = ng.GridFunction(SMALL, a), ng.GridFunction(SMALL, b)
        q = ng.conjugate_exponent(p)
        lhs = abs(ng.pairing(f, g))
        assert lhs <= ng.lp_norm(f, p) * ng.lp_norm(g, q) * (1 + 1e-12) + 1e-9

    @given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-3, 3), st.floats(-0.99, 0.99), st.floats(-1.99, 0.99))
    def test_multilinear_reproduced(self, c0, c1, c2, a, b):
        spec = ng.GridSpec((ng.uniform_axis(-1, 1, 7), ng.log_axis(-2, 1, 5)))
        f = ng.GridFunction.from_coords(spec, lambda s, t: c0 + c1 * s + c2 * s * t)
        want = c0 + c1 * a + c2 * a * b
        got = ng.interpolate(f, [a, math.exp(-b)])
        assert abs(got - want) <= 1e-12 * max(1.0, abs(c0) + abs(c1) + abs(c2))
