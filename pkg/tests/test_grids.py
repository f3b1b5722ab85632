"""Grid, field, and finite-difference substrate tests."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flowmaplab import Field, LabelGrid, StencilSpec, differentiate
from flowmaplab.grids import summarize_residual


def periodic_grid(n, length=2 * np.pi):
    return LabelGrid((n,), (0.0,), (length / n,), (True,))


def line_grid(n, lo=0.0, hi=1.0):
    return LabelGrid((n,), (lo,), ((hi - lo) / (n - 1),), (False,))


class TestLabelGrid:
    def test_rejects_small_extent(self):
        with pytest.raises(ValueError):
            LabelGrid((3,), (0.0,), (0.1,))

    def test_rejects_nonpositive_spacing(self):
        with pytest.raises(ValueError):
            LabelGrid((8,), (0.0,), (0.0,))

    def test_rejects_bad_dimensionality(self):
        with pytest.raises(ValueError):
            LabelGrid((4, 4, 4, 4), (0,) * 4, (1,) * 4)

    def test_nodes_multiplicative_no_drift(self):
        # spacing 0.1 is inexact in binary; accumulation would drift by ~1e-13
        g = LabelGrid((10001,), (0.0,), (0.1,))
        coords = g.axis_coords(0)
        assert coords[10000] == pytest.approx(1000.0, abs=0.0)
        assert coords[10000] == 10000 * 0.1

    def test_node_layout(self):
        g = LabelGrid((4, 5), (1.0, 2.0), (0.5, 0.25))
        pts = g.nodes()
        assert pts.shape == (20, 2)
        # row-major: second axis fastest
        assert pts[1] == pytest.approx([1.0, 2.25])
        assert pts[5] == pytest.approx([1.5, 2.0])


class TestField:
    def test_shape_checks(self):
        g = LabelGrid((4, 4), (0, 0), (1, 1))
        with pytest.raises(ValueError):
            Field(g, np.zeros((4, 5)))
        with pytest.raises(ValueError):
            Field(g, np.zeros((4, 4, 2)))  # components must be 3 or 3x3
        assert Field(g, np.zeros((4, 4))).rank == "scalar"
        assert Field(g, np.zeros((4, 4, 3))).rank == "vector"
        assert Field(g, np.zeros((4, 4, 3, 3))).rank == "tensor"

    def test_data_frozen(self):
        g = LabelGrid((4, 4), (0, 0), (1, 1))
        f = Field(g, np.zeros((4, 4)))
        with pytest.raises(ValueError):
            f.data[0, 0] = 1.0


class TestDifferentiate:
    def test_constant_gives_zero(self):
        g = line_grid(16)
        vals = np.full(16, 3.7)
        assert np.max(np.abs(differentiate(vals, 0, grid=g))) == 0.0

    def test_linear_exact_everywhere(self):
        g = line_grid(16)
        x = g.axis_coords(0)
        d = differentiate(x, 0, StencilSpec(order=2), grid=g)
        assert np.max(np.abs(d - 1.0)) < 1e-13

    def test_order4_exact_on_cubics(self):
        g = line_grid(16, 0.0, 2.0)
        x = g.axis_coords(0)
        d = differentiate(x ** 3, 0, StencilSpec(order=4), grid=g)
        assert np.max(np.abs(d - 3 * x ** 2)) < 1e-11

    def test_sin_order2_convergence(self):
        # frozen oracle: analytic derivative of sin is cos
        errs = []
        for n in (64, 128):
            g = periodic_grid(n)
            x = g.axis_coords(0)
            d = differentiate(np.sin(x), 0, StencilSpec(order=2), grid=g)
            errs.append(np.max(np.abs(d - np.cos(x))))
        order = np.log2(errs[0] / errs[1])
        assert errs[0] <= 0.7 * (2 * np.pi / 64) ** 2  # C*h^2 with C < 1
        assert 1.9 <= order <= 2.1

    def test_richardson_order_within_band(self):
        for spec, formal in ((StencilSpec(order=2), 2), (StencilSpec(order=4), 4)):
            errs = []
            for n in (48, 96):
                g = periodic_grid(n)
                x = g.axis_coords(0)
                d = differentiate(np.sin(2 * x), 0, spec, grid=g)
                errs.append(np.max(np.abs(d - 2 * np.cos(2 * x))))
            order = np.log2(errs[0] / errs[1])
            assert abs(order - formal) <= 0.15

    def test_one_sided_boundary_matches_order(self):
        g = line_grid(32)
        x = g.axis_coords(0)
        d = differentiate(x ** 2, 0, StencilSpec(order=2), grid=g)
        # 3-point one-sided rows are exact on quadratics
        assert abs(d[0] - 0.0) < 1e-12 and abs(d[-1] - 2.0) < 1e-12

    def test_rejects_small_grid_for_order4(self):
        g = line_grid(5)
        with pytest.raises(ValueError):
            differentiate(np.zeros(5), 0, StencilSpec(order=4), grid=g)

    def test_rejects_nonfinite(self):
        g = line_grid(8)
        vals = np.zeros(8)
        vals[3] = np.nan
        with pytest.raises(ValueError):
            differentiate(vals, 0, grid=g)

    def test_rejects_bad_axis(self):
        g = line_grid(8)
        with pytest.raises(ValueError):
            differentiate(np.zeros(8), 1, grid=g)

    @settings(max_examples=25, deadline=None)
    @given(
        a=st.floats(-5, 5, allow_nan=False),
        b=st.floats(-5, 5, allow_nan=False),
        order=st.sampled_from([2, 4]),
    )
    def test_linearity(self, a, b, order):
        g = periodic_grid(32)
        x = g.axis_coords(0)
        f, h = np.sin(x), np.cos(2 * x)
        spec = StencilSpec(order=order)
        lhs = differentiate(a * f + b * h, 0, spec, grid=g)
        rhs = a * differentiate(f, 0, spec, grid=g) + b * differentiate(h, 0, spec, grid=g)
        assert np.max(np.abs(lhs - rhs)) < 1e-12 * (1 + abs(a) + abs(b))

    def test_field_roundtrip(self):
        g = LabelGrid((8, 8), (0, 0), (0.1, 0.1))
        f = Field(g, np.random.default_rng(0).normal(size=(8, 8, 3)))
        out = differentiate(f, 0)
        assert isinstance(out, Field) and out.data.shape == (8, 8, 3)


class TestResidualSummary:
    def test_rind_excludes_boundary(self):
        g = LabelGrid((8, 8), (0, 0), (1, 1))
        vals = np.zeros((8, 8))
        vals[0, 0] = 10.0  # boundary spike
        vals[4, 4] = 1.0
        s_all = summarize_residual(vals, g, rind=0)
        s_int = summarize_residual(vals, g, rind=2)
        assert s_all.linf == 10.0
        assert s_int.linf == 1.0 and s_int.location == (4.0, 4.0)
        assert s_int.excluded == 64 - 16

    def test_l2_is_rms(self):
        g = LabelGrid((4,), (0.0,), (1.0,))
        s = summarize_residual(np.array([1.0, 1.0, 1.0, 1.0]), g)
        assert s.l2 == pytest.approx(1.0)

    def test_periodic_axes_have_no_rind(self):
        g = LabelGrid((8,), (0.0,), (1.0,), (True,))
        vals = np.zeros(8)
        vals[0] = 5.0
        assert summarize_residual(vals, g, rind=2).linf == 5.0
