"""Velocity reconstruction from vorticity and the element-law identities."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flowmaplab import (
    LabelGrid,
    StencilSpec,
    VorticitySource,
    biot_savart_geometry,
    gaussian_swirl_blob,
    velocity_from_vorticity,
)
from flowmaplab.grids import differentiate


def small_blob(n=32):
    src, u_exact, w_fn, w_mid = gaussian_swirl_blob(n=n)
    return src, u_exact, w_fn, w_mid


class TestSourceValidation:
    def test_non_compact_rejected(self):
        g = LabelGrid((8, 8, 8), (-1, -1, -1), (2 / 7,) * 3)

        def solid(p):
            return np.stack([0 * p[..., 0], 0 * p[..., 0], np.ones_like(p[..., 0])], -1)

        with pytest.raises(ValueError):
            VorticitySource.from_callable(solid, g)

    def test_divergent_field_rejected(self):
        g = LabelGrid((16, 16, 16), (-1 + 1 / 16, -1 + 1 / 16, -1 + 1 / 16), (1 / 8,) * 3)

        def leaky(p):
            r2 = np.einsum("...i,...i->...", p, p)
            c = np.exp(-r2 / (2 * 0.1 ** 2))
            return np.stack([0 * c, 0 * c, c], -1)  # d(wz)/dz != 0

        with pytest.raises(ValueError):
            VorticitySource.from_callable(leaky, g)

    def test_blob_divergence_shrinks_at_order_two(self):
        coarse, _, _, _ = small_blob(32)
        fine, _, _, _ = small_blob(64)
        assert fine.divergence_linf < coarse.divergence_linf / 2.5


class TestReconstruction:
    def test_zero_vorticity_zero_velocity(self):
        g = LabelGrid((8, 8, 8), (-1, -1, -1), (2 / 7,) * 3)
        src = VorticitySource(g, np.zeros((8, 8, 8, 3)))
        u = velocity_from_vorticity(src, [(2.0, 0.0, 0.0)])
        assert np.abs(u).max() == 0.0

    def test_single_element_matches_kernel(self):
        # one nonzero node: the sum has a single term, equal to the closed
        # form of the kernel
        g = LabelGrid((8, 8, 8), (-0.875, -0.875, -0.875), (0.25,) * 3)
        vals = np.zeros((8, 8, 8, 3))
        vals[4, 4, 4] = (0.0, 0.0, 1.0)
        src = VorticitySource(g, vals, compact=False)
        node = g.nodes3().reshape(g.shape + (3,))[4, 4, 4]
        target = node + np.array([0.5, 0.0, 0.0])
        u = velocity_from_vorticity(src, [target], allow_interior_targets=True)[0]
        dv = g.cell_volume
        expect = dv / (2 * np.pi) * np.cross([0.0, 0.0, 1.0], [0.5, 0.0, 0.0]) / 0.5 ** 3
        assert np.abs(u - expect).max() < 1e-15

    def test_axis_targets_see_no_velocity(self):
        src, _, _, _ = small_blob(32)
        targets = [(0.0, 0.0, 0.31), (0.0, 0.0, -0.17)]
        u = velocity_from_vorticity(src, targets, allow_interior_targets=True)
        assert np.abs(u).max() <= 1e-10

    def test_midradius_swirl_within_2pct_of_radial_oracle(self):
        # oracle: the axisymmetric swirl profile from 1D radial quadrature of
        # the midplane axial vorticity
        from scipy.integrate import quad

        src, u_exact, _, w_mid = gaussian_swirl_blob(n=64)
        sigma = 0.105
        r = 1.5 * sigma
        val, _ = quad(lambda s: 2 * w_mid(s) * s, 0.0, r)
        u_theta_oracle = val / r
        target = np.array([r, 0.0, 0.0])
        u = velocity_from_vorticity(src, [target], allow_interior_targets=True)[0]
        assert abs(u[1] - u_theta_oracle) <= 0.02 * abs(u_theta_oracle)
        # the closed-form field agrees with the quadrature oracle
        assert u_exact(target)[1] == pytest.approx(u_theta_oracle, rel=1e-9)

    def test_refinement_reduces_error(self):
        sigma = 0.105
        r = 1.5 * sigma
        errs = []
        for n in (32, 64):
            src, u_exact, _, _ = gaussian_swirl_blob(n=n)
            target = np.array([r, 0.0, 0.0])
            u = velocity_from_vorticity(src, [target], allow_interior_targets=True)[0]
            errs.append(np.linalg.norm(u - u_exact(target)))
        assert errs[0] / errs[1] >= 3.5

    def test_reconstructed_field_divergence_free(self):
        src, _, _, _ = small_blob(32)
        n = 6
        h = 0.05
        tg = LabelGrid((n, n, n), (1.2, 1.1, -0.12), (h,) * 3)
        pts = tg.nodes3().reshape(tg.shape + (3,))
        u = velocity_from_vorticity(src, pts.reshape(-1, 3)).reshape(tg.shape + (3,))
        div = sum(differentiate(u[..., k], k, StencilSpec(2), grid=tg) for k in range(3))
        assert np.abs(div).max() <= 1e-6

    def test_antisymmetry_exact(self):
        src, _, w_fn, _ = small_blob(32)
        flipped = VorticitySource(src.grid, -src.values)
        t = [(1.3, 0.2, 0.1)]
        a = velocity_from_vorticity(src, t)
        b = velocity_from_vorticity(flipped, t)
        assert np.array_equal(a, -b)

    def test_proximity_gate(self):
        src, _, _, _ = small_blob(32)
        with pytest.raises(ValueError):
            velocity_from_vorticity(src, [(0.0, 0.0, 0.0)])

    def test_harmonic_correction_added(self):
        g = LabelGrid((8, 8, 8), (-1, -1, -1), (2 / 7,) * 3)
        src = VorticitySource(g, np.zeros((8, 8, 8, 3)))
        u = velocity_from_vorticity(src, [(2.0, 0.0, 0.0)],
                                    grad_P=lambda t: np.full((len(t), 3), 0.5))
        assert np.abs(u - 0.5).max() == 0.0


class TestElementLaw:
    def test_axis_through_target(self):
        out = biot_savart_geometry((0, 0, 0), (0, 0, 1.0), 1.0, (0, 0, 2.0))
        assert np.linalg.norm(out["du"]) == 0.0

    def test_perpendicular_unit_case(self):
        # eps = pi/2, r = 1, Delta = 1, unit volume: |du| = 1/(2 pi)
        out = biot_savart_geometry((0, 0, 0), (0, 0, 1.0), 1.0, (1.0, 0, 0))
        assert np.linalg.norm(out["du"]) == pytest.approx(1 / (2 * np.pi), abs=1e-15)
        assert out["magnitude_law"].max() <= 1e-12

    def test_hundred_thousand_random_pairs(self):
        rng = np.random.default_rng(0)
        pos = rng.normal(size=(100000, 3))
        w = rng.normal(size=(100000, 3))
        tgt = pos + rng.normal(size=(100000, 3)) * 2 + 0.5
        out = biot_savart_geometry(pos, w, 0.37, tgt)
        assert out["radial_orthogonality"].max() <= 1e-12
        assert out["axis_orthogonality"].max() <= 1e-12
        assert out["magnitude_law"].max() <= 1e-12

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1))
    def test_identity_properties(self, seed):
        rng = np.random.default_rng(seed)
        pos = rng.uniform(-2, 2, 3)
        w = rng.uniform(-3, 3, 3)
        tgt = pos + rng.uniform(0.2, 2, 3)
        out = biot_savart_geometry(pos, w, 1.0, tgt)
        assert out["radial_orthogonality"].max() <= 1e-12
        assert out["axis_orthogonality"].max() <= 1e-12
        assert out["magnitude_law"].max() <= 1e-12
