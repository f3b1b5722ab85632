"""Clebsch decomposition residuals and the potential-flow specialization."""

import numpy as np
import pytest

from flowmaplab import (
    ClebschTriple,
    LabelGrid,
    clebsch_advection_residual,
    clebsch_fixture,
    clebsch_fixture_names,
    clebsch_velocity,
    clebsch_vorticity_residual,
    potential_flow_checks,
)
from flowmaplab.clebsch import incompressibility_residual


def grid_2d(n=33, lo=-1.0, hi=1.0):
    h = (hi - lo) / (n - 1)
    return LabelGrid((n, n), (lo, lo), (h, h))


def grid_3d(n=17, lo=-1.0, hi=1.0):
    h = (hi - lo) / (n - 1)
    return LabelGrid((n, n, n), (lo,) * 3, (h,) * 3)


def pts_of(grid):
    return grid.nodes3().reshape(grid.shape + (3,))


class TestVelocityAssembly:
    def test_pure_potential(self):
        fx = clebsch_fixture("uniform", k=2.0)
        pts = pts_of(grid_2d())
        u = clebsch_velocity(fx["triple"], pts)
        assert np.abs(u - np.array([2.0, 0.0, 0.0])).max() < 1e-9

    def test_phi_grad_psi_term(self):
        # oracle: F=0, phi=x, psi=y gives u = (0, x, 0) by hand
        fx = clebsch_fixture("shear_xy")
        pts = pts_of(grid_2d())
        u = clebsch_velocity(fx["triple"], pts)
        assert np.abs(u[..., 1] - pts[..., 0]).max() < 1e-9
        assert np.abs(u[..., 0]).max() < 1e-9

    def test_rigid_rotation_fixture(self):
        # oracle: F = -w x y, phi = 2 w x, psi = y assembles (-w y, w x, 0)
        w = 1.0
        fx = clebsch_fixture("rigid_rotation", omega=w)
        pts = pts_of(grid_2d())
        u = clebsch_velocity(fx["triple"], pts)
        expect = np.stack([-w * pts[..., 1], w * pts[..., 0], 0 * pts[..., 0]], -1)
        assert np.abs(u - expect).max() < 1e-9


class TestVorticityIdentity:
    @pytest.mark.parametrize("name,expected_curl", [
        ("uniform", (0.0, 0.0, 0.0)),
        ("shear_xy", (0.0, 0.0, 1.0)),
        ("rigid_rotation", (0.0, 0.0, 2.0)),
    ])
    def test_curl_equals_cross_gradients(self, name, expected_curl):
        fx = clebsch_fixture(name)
        g = grid_2d()
        s = clebsch_vorticity_residual(fx["triple"], g)
        h2 = max(g.spacing) ** 2
        assert s.linf <= 5 * h2

    def test_consistency_with_half_curl_module(self):
        # eulerian_vorticity of the assembled field equals half the cross of
        # the potential gradients
        from flowmaplab import Field, eulerian_vorticity

        w = 1.0
        fx = clebsch_fixture("rigid_rotation", omega=w)
        g = grid_2d()
        pts = pts_of(g)
        u = clebsch_velocity(fx["triple"], pts)
        W = eulerian_vorticity(*(Field(g, u[..., i]) for i in range(3)))
        assert np.abs(W.values[..., 2] - w).max() <= max(g.spacing) ** 2


class TestAdvection:
    def test_material_scalars_under_rotation(self):
        fx = clebsch_fixture("rotation_material")
        g = grid_2d()
        r_phi, r_psi = clebsch_advection_residual(fx["triple"], fx["velocity"], g)
        h2 = max(g.spacing) ** 2
        assert r_phi.linf <= 5 * h2 and r_psi.linf <= 5 * h2

    def test_rest_steady(self):
        fx = clebsch_fixture("rotation_material")
        g = grid_2d()
        r_phi, r_psi = clebsch_advection_residual(
            fx["triple"], lambda p, t: np.zeros_like(p), g)
        assert r_phi.linf <= 1e-10 and r_psi.linf <= 1e-10

    def test_translating_level_set(self):
        # oracle: d(x - t)/dt = -1 cancels u . grad(x - t) = 1 exactly
        fx = clebsch_fixture("translation_material")
        g = grid_2d()
        r_phi, _ = clebsch_advection_residual(fx["triple"], fx["velocity"], g)
        assert r_phi.linf <= 1e-9


class TestPotentialFlow:
    def test_uniform_flow(self):
        fx = clebsch_fixture("uniform", k=1.5)
        g = grid_2d()
        lap, bern = potential_flow_checks(fx["triple"].F, fx["omega"], g)
        assert lap.linf <= 1e-12 and bern.linf <= 1e-12

    def test_stagnation_quadratics_are_stencil_exact(self):
        fx = clebsch_fixture("stagnation", k=1.0)
        g = grid_2d()
        lap, bern = potential_flow_checks(fx["triple"].F, fx["omega"], g)
        assert lap.linf <= 1e-12
        assert bern.linf <= 1e-12

    def test_point_vortex_away_from_cut(self):
        # residuals away from the cut and core are pure stencil truncation:
        # bounded by C h^2 (C set by the closest included radius) and
        # shrinking at order 2 under refinement
        fx = clebsch_fixture("point_vortex")
        g = grid_2d(n=65, lo=-2.0, hi=2.0)
        lap, bern = potential_flow_checks(fx["triple"].F, fx["omega"], g,
                                          cut_mask=fx["cut"])
        assert lap.excluded > 0  # stencils near cut/core were dropped
        h2 = max(g.spacing) ** 2
        assert lap.linf <= 400 * h2 and bern.linf <= 50 * h2

        # order study at a fixed standoff: excluding a larger disk pins the
        # truncation constant, so the residual shrinks cleanly at order 2
        def wide_cut(p):
            return fx["cut"](p) | (p[..., 0] ** 2 + p[..., 1] ** 2 < 0.5 ** 2)

        laps, berns = [], []
        for n in (65, 129):
            gn = grid_2d(n=n, lo=-2.0, hi=2.0)
            lapn, bernn = potential_flow_checks(fx["triple"].F, fx["omega"], gn,
                                                cut_mask=wide_cut)
            laps.append(lapn.l2)
            berns.append(bernn.l2)
        # rms order: the Linf max rides the exclusion rim, whose truncation
        # constant grows as nodes approach it, so the bulk norm carries the
        # convergence statement
        assert np.log2(laps[0] / laps[1]) >= 1.8
        assert np.log2(berns[0] / berns[1]) >= 1.8

    def test_gauge_function_of_time_changes_nothing(self):
        k = 1.0
        g = grid_2d()

        def F0(p, t):
            return 0.5 * k * (p[..., 0] ** 2 - p[..., 1] ** 2)

        def F1(p, t):
            return F0(p, t) + 3.0 * t + 7.0

        pts = pts_of(g)
        u0 = ClebschTriple(F=F0).velocity(pts, 0.3)
        u1 = ClebschTriple(F=F1).velocity(pts, 0.3)
        assert np.abs(u0 - u1).max() <= 1e-9


class TestIncompressibility:
    def test_divergence_of_fixtures(self):
        for name in ("uniform", "shear_xy", "rigid_rotation", "stagnation"):
            fx = clebsch_fixture(name)
            g = grid_2d()
            s = incompressibility_residual(fx["triple"], g)
            assert s.linf <= 5 * max(g.spacing) ** 2, name


def test_fixture_names():
    assert "rigid_rotation" in clebsch_fixture_names()
    with pytest.raises(KeyError):
        clebsch_fixture("nope")


def test_smoothness_probe():
    fx = clebsch_fixture("stagnation")
    pts = pts_of(grid_2d(9))
    assert fx["triple"].smoothness_residual(pts) <= 1e-6
