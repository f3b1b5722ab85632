"""Clebsch decomposition u = grad F + phi grad psi and its residual checks.

The library checks GIVEN triples (F, phi, psi); it never constructs phi and
psi from a velocity field (an ill-posed global problem). Checks cover the
velocity assembly, the vorticity identity curl u = grad phi x grad psi, the
material advection of phi and psi, incompressibility, and the irrotational
specialization: Laplace residual of a velocity potential and the unsteady
Bernoulli integral dF/dt + |grad F|^2 / 2 - Omega = 0.

Multivalued potentials (the point-vortex azimuth) declare a branch cut; every
stencil touching the cut is dropped from norms and the dropped count is
reported.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import StencilSpec, summarize_residual

__all__ = [
    "ClebschTriple",
    "clebsch_velocity",
    "clebsch_vorticity_residual",
    "clebsch_advection_residual",
    "potential_flow_checks",
    "clebsch_fixture",
    "clebsch_fixture_names",
]


def _call_scalar(fn, pts, t):
    if fn is None:
        return np.zeros(np.asarray(pts).shape[:-1])
    return np.asarray(fn(pts, t), dtype=float)


@dataclass
class ClebschTriple:
    """Scalar callables (points, t) -> values for F, phi, psi.

    cut_mask: optional callable (points) -> bool array, True where a point
    is adjacent to a declared branch cut (those stencils are excluded from
    norms). smoothness of the fields is probed at construction sites by the
    mixed-partial commutation check in ``smoothness_residual``.
    """

    F: object = None
    phi: object = None
    psi: object = None
    name: str = "clebsch"
    cut_mask: object = None

    def velocity(self, pts, t=0.0, h=1e-6):
        gF = _fd_gradient(self.F, pts, t, h)
        gpsi = _fd_gradient(self.psi, pts, t, h)
        phi = _call_scalar(self.phi, pts, t)
        return gF + phi[..., None] * gpsi

    def smoothness_residual(self, pts, t=0.0, h=1e-4):
        """Max mixed-partial commutation defect over F, phi, psi (FD probe)."""
        worst = 0.0
        for fn in (self.F, self.phi, self.psi):
            if fn is None:
                continue
            for i in range(3):
                for j in range(i + 1, 3):
                    worst = max(worst, float(np.max(np.abs(
                        _fd_mixed(fn, pts, t, i, j, h) - _fd_mixed(fn, pts, t, j, i, h)
                    ))))
        return worst


def _fd_gradient(fn, pts, t, h=1e-6):
    pts = np.asarray(pts, dtype=float)
    if fn is None:
        return np.zeros(pts.shape)
    out = np.empty(pts.shape)
    for k in range(3):
        dp = np.zeros(3)
        dp[k] = h
        out[..., k] = (np.asarray(fn(pts + dp, t)) - np.asarray(fn(pts - dp, t))) / (2 * h)
    return out


def _fd_mixed(fn, pts, t, i, j, h):
    pts = np.asarray(pts, dtype=float)
    di = np.zeros(3)
    di[i] = h
    dj = np.zeros(3)
    dj[j] = h
    return (
        np.asarray(fn(pts + di + dj, t)) - np.asarray(fn(pts + di - dj, t))
        - np.asarray(fn(pts - di + dj, t)) + np.asarray(fn(pts - di - dj, t))
    ) / (4 * h * h)


def _grid_points(grid):
    return grid.nodes3().reshape(grid.shape + (3,))


def _grid_gradient(values, grid, spec):
    from .grids import differentiate

    out = np.zeros(grid.shape + (3,))
    for k in range(grid.ndim):
        out[..., k] = differentiate(values, k, spec, grid=grid)
    return out


def _cut_exclusion_mask(ct, grid, spec):
    """Nodes whose stencil neighbourhood touches the declared cut."""
    if ct.cut_mask is None:
        return None, 0
    pts = _grid_points(grid)
    near = np.asarray(ct.cut_mask(pts), dtype=bool)
    reach = 2 if spec.order == 4 else 1
    bad = near.copy()
    for axis in range(grid.ndim):
        for shift in range(1, reach + 1):
            bad |= np.roll(near, shift, axis=axis) | np.roll(near, -shift, axis=axis)
    return ~bad, int(np.count_nonzero(bad))


def clebsch_velocity(ct, pts, t=0.0, h=1e-6):
    """u = grad F + phi grad psi at the given points."""
    return ct.velocity(pts, t, h)


def clebsch_vorticity_residual(ct, grid, t=0.0, spec=StencilSpec(), rind=1):
    """Linf of curl(u) - grad phi x grad psi on a spatial grid.

    All derivatives are taken by the grid stencils, so the residual measures
    how well the sampled triple realizes its own curl identity, at O(h^2).
    """
    pts = _grid_points(grid)
    u = ct.velocity(pts, t)
    from .grids import curl

    cu = curl(u, spec, grid=grid)
    gphi = _grid_gradient(_call_scalar(ct.phi, pts, t), grid, spec)
    gpsi = _grid_gradient(_call_scalar(ct.psi, pts, t), grid, spec)
    cross = np.cross(gphi, gpsi)
    mask, _ = _cut_exclusion_mask(ct, grid, spec)
    res = np.max(np.abs(cu - cross), axis=-1)
    return summarize_residual(res, grid, rind=rind, mask=mask)


def clebsch_advection_residual(ct, velocity_fn, grid, t=0.0, spec=StencilSpec(),
                               dt=1e-5, rind=1):
    """Material-derivative residuals (for phi, for psi) under a velocity field.

    d/dt + u . grad of each potential, with the time term by a centered
    difference of the callable and the space term by grid stencils.
    """
    pts = _grid_points(grid)
    u = np.asarray(velocity_fn(pts, t), dtype=float)
    out = []
    mask, _ = _cut_exclusion_mask(ct, grid, spec)
    for fn in (ct.phi, ct.psi):
        vals_p = _call_scalar(fn, pts, t + dt)
        vals_m = _call_scalar(fn, pts, t - dt)
        ddt = (vals_p - vals_m) / (2 * dt)
        grad = _grid_gradient(_call_scalar(fn, pts, t), grid, spec)
        res = ddt + np.einsum("...i,...i->...", u, grad)
        out.append(summarize_residual(res, grid, rind=rind, mask=mask))
    return tuple(out)


def incompressibility_residual(ct, grid, t=0.0, spec=StencilSpec(), rind=1):
    """Linf of div(grad F + phi grad psi) on the grid."""
    pts = _grid_points(grid)
    u = ct.velocity(pts, t)
    from .grids import divergence

    mask, _ = _cut_exclusion_mask(ct, grid, spec)
    return summarize_residual(divergence(u, spec, grid=grid), grid, rind=rind, mask=mask)


def potential_flow_checks(F_fn, omega_fn, grid, t=0.0, spec=StencilSpec(),
                          dt=1e-5, rind=1, cut_mask=None):
    """Laplace and Bernoulli residuals for a velocity potential.

    Returns (laplace_summary, bernoulli_summary): Linf of the grid Laplacian
    of F, and of dF/dt + |grad F|^2 / 2 - Omega. omega_fn(points, t) is the
    combined potential; a function of t alone shifts nothing (gauge).
    """
    from .grids import differentiate

    pts = _grid_points(grid)
    vals = np.asarray(F_fn(pts, t), dtype=float)
    lap = np.zeros(grid.shape)
    for k in range(grid.ndim):
        d1 = differentiate(vals, k, spec, grid=grid)
        lap += differentiate(d1, k, spec, grid=grid)
    gF = _grid_gradient(vals, grid, spec)
    dFdt = (np.asarray(F_fn(pts, t + dt)) - np.asarray(F_fn(pts, t - dt))) / (2 * dt)
    bern = dFdt + 0.5 * np.einsum("...i,...i->...", gF, gF) - np.asarray(omega_fn(pts, t), dtype=float)
    mask = None
    dropped = 0
    if cut_mask is not None:
        ct = ClebschTriple(F=F_fn, cut_mask=cut_mask)
        mask, dropped = _cut_exclusion_mask(ct, grid, spec)
    lap_s = summarize_residual(lap, grid, rind=max(rind, 1), mask=mask)
    bern_s = summarize_residual(bern, grid, rind=rind, mask=mask)
    return lap_s, bern_s


# ---------------------------------------------------------------------------
# named fixtures (each docstring records the hand derivation it encodes)


def _fixture_uniform(k=1.0):
    """Pure potential flow u = (k, 0, 0): F = k x, phi = psi = 0.

    Bernoulli: |grad F|^2/2 = k^2/2, so Omega = k^2/2 (constant).
    """
    return {
        "triple": ClebschTriple(F=lambda p, t: k * p[..., 0], name="uniform"),
        "velocity": lambda p, t: np.stack(
            [k * np.ones_like(p[..., 0]), np.zeros_like(p[..., 0]), np.zeros_like(p[..., 0])],
            axis=-1),
        "omega": lambda p, t: np.full(p.shape[:-1], 0.5 * k * k),
        "incompressible": True,
    }


def _fixture_shear_xy():
    """F = 0, phi = x, psi = y: u = phi grad psi = (0, x, 0).

    curl u = (0, 0, 1) = grad x cross grad y; divergence-free.
    """
    return {
        "triple": ClebschTriple(phi=lambda p, t: p[..., 0], psi=lambda p, t: p[..., 1],
                                name="shear_xy"),
        "velocity": lambda p, t: np.stack(
            [np.zeros_like(p[..., 0]), p[..., 0], np.zeros_like(p[..., 0])], axis=-1),
        "incompressible": True,
    }


def _fixture_rigid_rotation(omega=1.0):
    """Rigid body rotation u = (-w y, w x, 0) as a Clebsch field.

    One valid triple is F = -w x y, phi = 2 w x, psi = y:
    grad F = (-w y, -w x, 0) and phi grad psi = (0, 2 w x, 0) sum to u;
    curl u = (0, 0, 2 w) = grad phi x grad psi.
    """
    w = float(omega)
    return {
        "triple": ClebschTriple(
            F=lambda p, t: -w * p[..., 0] * p[..., 1],
            phi=lambda p, t: 2 * w * p[..., 0],
            psi=lambda p, t: p[..., 1],
            name="rigid_rotation",
        ),
        "velocity": lambda p, t: np.stack(
            [-w * p[..., 1], w * p[..., 0], np.zeros_like(p[..., 0])], axis=-1),
        "incompressible": True,
    }


def _fixture_rotation_material(omega=1.0):
    """Materially advected scalars under rigid rotation: phi = x^2 + y^2,
    psi = z. Both are constant along circular orbits, so their material
    derivatives vanish (u . grad phi = 0, steady fields). This pair checks
    advection only; it does not reproduce the vorticity of the rotation.
    """
    w = float(omega)
    return {
        "triple": ClebschTriple(
            phi=lambda p, t: p[..., 0] ** 2 + p[..., 1] ** 2,
            psi=lambda p, t: p[..., 2],
            name="rotation_material",
        ),
        "velocity": lambda p, t: np.stack(
            [-w * p[..., 1], w * p[..., 0], np.zeros_like(p[..., 0])], axis=-1),
        "advection_only": True,
    }


def _fixture_translation_material():
    """Uniform translation u = (1, 0, 0) with phi = x - t, psi = y:
    dphi/dt = -1 and u . grad phi = 1 cancel exactly."""
    return {
        "triple": ClebschTriple(
            phi=lambda p, t: p[..., 0] - t,
            psi=lambda p, t: p[..., 1],
            name="translation_material",
        ),
        "velocity": lambda p, t: np.stack(
            [np.ones_like(p[..., 0]), np.zeros_like(p[..., 0]), np.zeros_like(p[..., 0])],
            axis=-1),
        "advection_only": True,
    }


def _fixture_stagnation(k=1.0):
    """Potential flow F = k (x^2 - y^2) / 2, u = (k x, -k y, 0).

    Laplacian of F vanishes; Bernoulli requires
    Omega = |grad F|^2 / 2 = k^2 (x^2 + y^2) / 2.
    """
    kk = float(k)
    return {
        "triple": ClebschTriple(F=lambda p, t: 0.5 * kk * (p[..., 0] ** 2 - p[..., 1] ** 2),
                                name="stagnation"),
        "velocity": lambda p, t: np.stack(
            [kk * p[..., 0], -kk * p[..., 1], np.zeros_like(p[..., 0])], axis=-1),
        "omega": lambda p, t: 0.5 * kk * kk * (p[..., 0] ** 2 + p[..., 1] ** 2),
        "incompressible": True,
    }


def _fixture_point_vortex(gamma=2 * np.pi):
    """Multivalued potential F = Gamma * atan2(y, x) / (2 pi), cut on the
    negative-x half plane. u = Gamma/(2 pi r^2) (-y, x, 0);
    Omega = |u|^2/2 = Gamma^2 / (8 pi^2 r^2).
    """
    G = float(gamma)

    def F(p, t):
        return G / (2 * np.pi) * np.arctan2(p[..., 1], p[..., 0])

    def omega(p, t):
        r2 = p[..., 0] ** 2 + p[..., 1] ** 2
        # the origin is inside the declared exclusion; keep it finite so
        # masked nodes do not poison array arithmetic
        return G ** 2 / (8 * np.pi ** 2 * np.where(r2 < 1e-12, 1.0, r2))

    def cut(p):
        # points adjacent to the branch cut {y = 0, x < 0}, plus the core
        # disk where the potential itself is singular
        near_cut = (p[..., 0] < 0.0) & (np.abs(p[..., 1]) < 0.35 * np.abs(p[..., 0]) + 0.3)
        near_core = p[..., 0] ** 2 + p[..., 1] ** 2 < 0.25 ** 2
        return near_cut | near_core

    return {
        "triple": ClebschTriple(F=F, name="point_vortex", cut_mask=cut),
        "velocity": lambda p, t: np.stack(
            [-G / (2 * np.pi) * p[..., 1]
             / np.where(p[..., 0] ** 2 + p[..., 1] ** 2 < 1e-12, 1.0,
                        p[..., 0] ** 2 + p[..., 1] ** 2),
             G / (2 * np.pi) * p[..., 0]
             / np.where(p[..., 0] ** 2 + p[..., 1] ** 2 < 1e-12, 1.0,
                        p[..., 0] ** 2 + p[..., 1] ** 2),
             np.zeros_like(p[..., 0])], axis=-1),
        "omega": omega,
        "incompressible": True,
        "cut": cut,
    }


_FIXTURES = {
    "uniform": _fixture_uniform,
    "shear_xy": _fixture_shear_xy,
    "rigid_rotation": _fixture_rigid_rotation,
    "rotation_material": _fixture_rotation_material,
    "translation_material": _fixture_translation_material,
    "stagnation": _fixture_stagnation,
    "point_vortex": _fixture_point_vortex,
}


def clebsch_fixture_names():
    return sorted(_FIXTURES)


def clebsch_fixture(name, **params):
    """Named preset: dict with the triple, its velocity field, and extras."""
    if name not in _FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(clebsch_fixture_names())}")
    return _FIXTURES[name](**params)
