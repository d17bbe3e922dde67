import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hausdorff_lab import hausdorff as H
from hausdorff_lab import mellin as M
from hausdorff_lab import numgrid as ng
from hausdorff_lab import presets, samples
from hausdorff_lab.errors import ValidationError

RT2PI = math.sqrt(2.0 * math.pi)


def unit_indicator(n):
    # jump of 1_(0,1] at y = 0, the first node
    spec = ng.GridSpec((ng.log_axis(0.0, 60.0, n),))
    return samples.indicator_unit(spec)


def bump_grid(n=1024, half=20.0, dim=1):
    return ng.GridSpec((ng.log_axis(-half, half, n),) * dim)


def two_atom(dil=(1.0, 2.0), w=(0.5, 0.5)):
    return H.build(
        {"omega": {"type": "discrete", "atoms": [{"u": [a], "w": b} for a, b in zip(dil, w)]}, "kernel": "1", "a": ["u"]}
    )


class TestMellin:
    def test_indicator_at_zero(self):
        Mf = M.mellin(unit_indicator(4096), 2)
        k = int(np.argmin(np.abs(Mf.spec.axes[0].coords)))
        assert Mf.spec.axes[0].coords[k] == 0.0
        assert Mf.values[k] == pytest.approx(2.0 / RT2PI, abs=1e-4)

    def test_indicator_closed_form(self):
        Mf = M.mellin(unit_indicator(4096), 2)
        s = Mf.spec.axes[0].coords
        sel = np.abs(s) <= 4
        want = 1.0 / (RT2PI * (0.5 + 1j * s[sel]))
        assert np.max(np.abs(Mf.values[sel] - want)) <= 1e-4

    def test_zero(self):
        spec = bump_grid(256)
        assert not np.any(M.mellin(ng.GridFunction(spec, np.zeros(256)), 1.5).values)

    def test_frequency_grid(self):
        spec = ng.GridSpec((ng.log_axis_spacing(8, 0.25),))
        s = M.frequency_spec(spec).axes[0].coords
        np.testing.assert_allclose(s, 2 * math.pi / 2.0 * np.arange(-4, 4), rtol=1e-15)

    def test_gaussian_closed_form(self):
        # f(e^-y) = exp(-y^2/2) gives Mf(s) = exp((1/2 + i s)^2 / 2) at p = 2
        spec = bump_grid(2048)
        f = samples.gauss_y(spec, 0.0, 1.0)
        Mf = M.mellin(f, 2)
        s = Mf.spec.axes[0].coords
        want = np.exp(0.5 * (-0.5 - 1j * s) ** 2)
        sel = np.abs(s) <= 6
        np.testing.assert_allclose(Mf.values[sel], want[sel], atol=1e-12)

    @pytest.mark.parametrize("p", [0.5, 2.5, math.inf])
    def test_bad_p(self, p):
        with pytest.raises(ValidationError):
            M.mellin(unit_indicator(16), p)

    def test_needs_log_grid(self):
        spec = ng.GridSpec((ng.uniform_axis(0, 1, 8),))
        with pytest.raises(ValidationError, match="log-uniform"):
            M.mellin(ng.GridFunction(spec, np.ones(8)))


class TestAdjoint:
    def test_pairing(self, rng):
        spec = bump_grid(512)
        fs = M.frequency_spec(spec)
        for p in (1.0, 1.5, 2.0):
            for _ in range(5):
                f = samples.node_random(spec, rng)
                g = samples.node_random(fs, rng)
                lhs = ng.pairing(M.mellin(f, p), g)
                rhs = ng.pairing(f, M.mellin_adjoint(g, p, spec))
                assert abs(lhs - rhs) <= 1e-6 * ng.lp_norm(f, p) * ng.lp_norm(g, ng.conjugate_exponent(p))

    def test_pairing_2d(self, rng):
        spec = bump_grid(32, 5.0, dim=2)
        fs = M.frequency_spec(spec)
        f, g = samples.node_random(spec, rng), samples.node_random(fs, rng)
        lhs = ng.pairing(M.mellin(f, 1.25), g)
        rhs = ng.pairing(f, M.mellin_adjoint(g, 1.25, spec))
        assert abs(lhs - rhs) <= 1e-12 * abs(lhs)

    def test_zero(self):
        spec = bump_grid(64)
        g = ng.GridFunction(M.frequency_spec(spec), np.zeros(64))
        assert not np.any(M.mellin_adjoint(g, 2, spec).values)

    def test_round_trip(self, rng):
        spec = bump_grid(1024)
        for _ in range(3):
            f = samples.smooth_random(spec, rng)
            back = M.mellin_adjoint(M.mellin(f, 2, conjugate_kernel=True), 2, spec)
            assert ng.lp_norm(back - f, 2) <= 1e-6 * ng.lp_norm(f, 2)

    def test_grid_mismatch(self):
        spec = bump_grid(64)
        g = ng.GridFunction(M.frequency_spec(bump_grid(32)), np.ones(32))
        with pytest.raises(ValidationError):
            M.mellin_adjoint(g, 2, spec)


class TestSymbol:
    def test_cesaro(self, cesaro):
        s = np.linspace(-4, 4, 161)
        phi = M.symbol(cesaro, s)
        assert np.max(np.abs(phi.values - 1.0 / (0.5 - 1j * s))) <= 1e-6
        assert M.symbol(cesaro, [0.0]).values[0] == pytest.approx(2.0, abs=1e-6)
        assert abs(M.symbol(cesaro, [1.0]).values[0]) == pytest.approx(2 / math.sqrt(5), abs=1e-6)

    def test_identity(self, identity):
        phi = M.symbol(identity, M.symbol_spec(4.0, 128))
        assert np.array_equal(phi.values, np.ones(128, dtype=complex))

    def test_zero(self):
        phi = M.symbol(presets.build_preset("zero"), np.linspace(-3, 3, 7))
        assert not np.any(phi.values)

    def test_direct_route(self, cesaro, dyadic):
        s = np.linspace(-3, 3, 13)
        for op in (cesaro, dyadic):
            for p in (1.0, 1.5, 2.0):
                np.testing.assert_allclose(M.symbol(op, s, p).values, M._symbol_direct(op, s, p), rtol=1e-12)

    def test_large_p_via_adjoint(self, cesaro):
        s = np.linspace(-3, 3, 13)
        # the closed form holds for every p, so it checks the duality route independently
        np.testing.assert_allclose(M.symbol(cesaro, s, 4.0).values, 1.0 / (0.75 - 1j * s), atol=1e-6)
        np.testing.assert_allclose(M.symbol(cesaro, s, 4.0).values, M._symbol_direct(cesaro, s, 4.0), rtol=1e-6)

    def test_example2(self):
        op = presets.build_preset("example2-gauss")
        s = np.array([[0.0, 0.0], [0.5, -1.0], [2.0, 1.5]])
        want = presets.ORACLES["example2-gauss"]["symbol"](s, 2.0)
        np.testing.assert_allclose(M.symbol(op, s).values, want, atol=1e-6)

    def test_grid_input(self, cesaro):
        spec = M.symbol_spec(2.0, 9)
        phi = M.symbol(cesaro, spec)
        assert phi.as_gridfunction().spec == spec
        assert phi.s[0, 0] == -2.0 and phi.s[-1, 0] == 2.0

    def test_nonpositive_rejected(self):
        with pytest.raises(ValidationError, match="nonpositive"):
            M.symbol(presets.build_preset("reflected-cesaro"), [0.0])

    def test_inf_rejected(self, cesaro):
        with pytest.raises(ValidationError):
            M.symbol(cesaro, [0.0], math.inf)

    def test_dimension_checked(self, cesaro):
        with pytest.raises(ValidationError):
            M.symbol(cesaro, M.symbol_spec(1.0, 3, dim=2))

    def test_csv(self, identity, tmp_path):
        path = M.symbol(identity, M.symbol_spec(1.0, 3)).to_csv(tmp_path / "phi.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == "s,re_phi,im_phi,abs_phi"
        assert lines[1] == "-1.0,1.0,0.0,1.0"


class TestDiagonalization:
    def test_identity(self, identity, rng):
        f = samples.smooth_random(bump_grid(512), rng)
        assert M.diagonalization_residual(identity, f) <= 1e-10

    def test_two_atom_aligned(self):
        spec = ng.GridSpec((ng.log_axis_spacing(1024, math.log(2) / 16),))
        f = samples.gauss_y(spec, 0.0, 2.0)
        assert M.diagonalization_residual(two_atom(), f) <= 1e-8

    def test_dyadic_aligned(self, dyadic):
        spec = ng.GridSpec((ng.log_axis_spacing(4096, math.log(2) / 16),))
        f = samples.gauss_y(spec, 0.0, 2.0)
        assert M.diagonalization_residual(dyadic, f) <= 1e-8

    def test_degenerate(self, identity):
        spec = bump_grid(16)
        with pytest.raises(ValidationError):
            M.diagonalization_residual(identity, ng.GridFunction(spec, np.zeros(16)))


# --- properties --------------------------------------------------------------

GRID = bump_grid(1024)


def compact(seed):
    # narrow bumps keep the weighted pullback below 1e-12 at the grid edges
    return samples.smooth_random(GRID, np.random.default_rng(seed), widths=(0.01, 0.04))


class TestProperties:
    @settings(max_examples=30)
    @given(st.integers(0, 2**32 - 1))
    def test_plancherel(self, seed):
        f = compact(seed)
        a, b = ng.lp_norm(M.mellin(f, 2), 2), ng.lp_norm(f, 2)
        assert abs(a - b) <= 1e-6 * b

    @settings(max_examples=30)
    @given(st.integers(0, 2**32 - 1), st.floats(1.05, 1.95))
    def test_hausdorff_young(self, seed, p):
        f = compact(seed)
        assert ng.lp_norm(M.mellin(f, p), ng.conjugate_exponent(p)) <= ng.lp_norm(f, p) * (1 + 1e-6)

    @settings(max_examples=20)
    @given(st.floats(1.0, 2.0), st.lists(st.floats(-20, 20), min_size=1, max_size=8))
    def test_symbol_bound(self, dyadic, p, s):
        assert M.symbol(dyadic, s, p).sup <= H.lemma1_bound(dyadic, p).value + 1e-9

    @settings(max_examples=10)
    @given(st.floats(1.0, 2.0))
    def test_symbol_bound_cesaro(self, cesaro, p):
        phi = M.symbol(cesaro, np.linspace(-10, 10, 41), p)
        assert phi.sup <= H.lemma1_bound(cesaro, p).value + 1e-9

    @settings(max_examples=20)
    @given(st.floats(1.0, 2.0), st.lists(st.floats(-20, 20), min_size=1, max_size=8))
    def test_adjoint_symbol(self, dyadic, p, s):
        q = ng.conjugate_exponent(p)
        lhs = M.symbol(H.adjoint(dyadic), s, q).values if math.isfinite(q) else None
        if lhs is None:
            return
        np.testing.assert_allclose(lhs, np.conj(M.symbol(dyadic, s, p).values), rtol=0, atol=1e-10)

    @settings(max_examples=20)
    @given(st.lists(st.floats(0, 20), min_size=1, max_size=8), st.floats(1.0, 2.0))
    def test_conjugate_symmetry(self, dyadic, s, p):
        s = np.asarray(s)
        np.testing.assert_allclose(
            M.symbol(dyadic, -s, p).values, np.conj(M.symbol(dyadic, s, p).values), rtol=0, atol=1e-10
        )

    @settings(max_examples=5)
    @given(st.integers(0, 2**32 - 1))
    def test_multiplicativity(self, cesaro, seed):
        r = np.random.default_rng(seed)
        other = two_atom(dil=tuple(r.uniform(0.5, 2.0, 2)), w=tuple(r.uniform(0.2, 1.0, 2)))
        spec = ng.GridSpec((ng.log_axis(-40, 20, 4096),))
        f = samples.gauss_y(spec, r.uniform(-2, 2), r.uniform(1.0, 2.0))
        Mf = M.mellin(f, 2)
        lhs = M.mellin(H.apply(cesaro, H.apply(other, f)), 2)
        prod = M.symbol(cesaro, Mf.spec).values * M.symbol(other, Mf.spec).values
        assert ng.lp_norm(lhs - Mf.with_values(prod * Mf.values), 2) <= 2e-3 * ng.lp_norm(Mf, 2)
