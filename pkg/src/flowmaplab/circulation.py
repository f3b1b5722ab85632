"""Material loops and surfaces: circulation, vorticity flux, Stokes and
Kelvin checks, and vortex-tube section equality.

Loops and surfaces are defined by label points and advected exactly through
the flow map (sampled maps advect the actual loop labels through their
generating field, never re-interpolating the trajectory table). Velocity
along a loop is the map's velocity at the loop's label points.

Conventions: loop samples are uniform in parameter; circulation integrates
u . dx/ds ds with order-4 tangents (keeps absolute circulation values near
machine precision on smooth loops); surface tangents default to order-2
parameter differences, so flux-vs-circulation mismatches converge at second
order. Surface normals follow the right-hand rule relative to the boundary
orientation, and the flux integrand is 2 * (X, Y, Z) . n dS, i.e. the full
vorticity vector against the advected normal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quadrature import closed_path_tangents
from .flowmap import deformation_at, velocity_gradient_at, inv3

__all__ = [
    "MaterialLoop",
    "MaterialSurface",
    "CirculationValues",
    "circulation",
    "vorticity_flux",
    "stokes_residual",
    "kelvin_drift",
    "tube_section_flux",
    "spatial_half_vorticity_at",
]


def _frame_from_normal(normal):
    n = np.asarray(normal, dtype=float)
    n = n / np.linalg.norm(n)
    trial = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(n, trial)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    return e1, e2, n


@dataclass
class MaterialLoop:
    """Ordered closed polyline of particle labels (closure implicit).

    Samples are uniform in the loop parameter; n >= 16 for quadrature
    validity, no repeated consecutive points.
    """

    labels: np.ndarray  # (N, 3)

    def __post_init__(self):
        pts = np.asarray(self.labels, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError("loop labels must have shape (N, 3)")
        if pts.shape[0] < 16:
            raise ValueError("loops need at least 16 points")
        seg = np.linalg.norm(np.diff(np.vstack([pts, pts[:1]]), axis=0), axis=1)
        if np.any(seg == 0.0):
            raise ValueError("repeated consecutive loop points")
        self.labels = pts

    @classmethod
    def circle(cls, center=(0.0, 0.0, 0.0), radius=1.0, normal=(0.0, 0.0, 1.0), n=256):
        if radius <= 0:
            raise ValueError("loop radius must be positive")
        e1, e2, _ = _frame_from_normal(normal)
        s = 2 * np.pi * np.arange(n) / n
        pts = (np.asarray(center, float)[None, :]
               + radius * np.cos(s)[:, None] * e1[None, :]
               + radius * np.sin(s)[:, None] * e2[None, :])
        return cls(pts)

    def reversed(self):
        return MaterialLoop(self.labels[::-1].copy())

    def advected(self, m, t):
        return m.positions(self.labels, t)


@dataclass
class MaterialSurface:
    """Parameterized patch of labels on an (M, N) parameter grid.

    param_periodic marks which parameter axis wraps (e.g. the angular axis
    of a disk). ``boundary_loop`` extracts the outer boundary in the
    orientation matching the right-hand rule with the patch normal.
    """

    labels: np.ndarray  # (M, N, 3)
    param_periodic: tuple = (False, False)

    def __post_init__(self):
        lab = np.asarray(self.labels, dtype=float)
        if lab.ndim != 3 or lab.shape[2] != 3:
            raise ValueError("surface labels must have shape (M, N, 3)")
        if lab.shape[0] < 2 or lab.shape[1] < 8:
            raise ValueError("surface parameter grid too coarse")
        self.labels = lab
        self.param_periodic = tuple(bool(p) for p in self.param_periodic)

    @classmethod
    def disk(cls, center=(0.0, 0.0, 0.0), radius=1.0, normal=(0.0, 0.0, 1.0),
             nr=32, ntheta=256, lift=None, inner_radius=0.0):
        """Flat disk (or annulus, or cap lifted by ``lift(r)`` along the normal).

        Parameter axes: radius (non-periodic) x angle (periodic). The outer
        boundary ring equals MaterialLoop.circle with the same n and
        orientation (counterclockwise around the normal).
        """
        if radius <= 0 or inner_radius < 0 or inner_radius >= radius:
            raise ValueError("need 0 <= inner_radius < radius")
        e1, e2, nrm = _frame_from_normal(normal)
        r = np.linspace(inner_radius, radius, nr)
        s = 2 * np.pi * np.arange(ntheta) / ntheta
        R, S = np.meshgrid(r, s, indexing="ij")
        pts = (np.asarray(center, float)[None, None, :]
               + (R * np.cos(S))[..., None] * e1
               + (R * np.sin(S))[..., None] * e2)
        if lift is not None:
            pts = pts + np.asarray(lift(R))[..., None] * nrm
        return cls(pts, param_periodic=(False, True))

    @classmethod
    def rectangle(cls, corner, edge1, edge2, n1=32, n2=32):
        """Flat parallelogram patch spanned by edge vectors from a corner."""
        c = np.asarray(corner, float)
        e1 = np.asarray(edge1, float)
        e2 = np.asarray(edge2, float)
        s1 = np.linspace(0.0, 1.0, n1)
        s2 = np.linspace(0.0, 1.0, n2)
        A, B = np.meshgrid(s1, s2, indexing="ij")
        pts = c[None, None, :] + A[..., None] * e1 + B[..., None] * e2
        return cls(pts, param_periodic=(False, False))

    def boundary_loop(self):
        """Outer boundary of the patch as a MaterialLoop, in patch orientation."""
        if self.param_periodic[1] and not self.param_periodic[0]:
            return MaterialLoop(self.labels[-1])
        if self.param_periodic == (False, False):
            # traverse the four edges right-handedly about e1 x e2
            ring = np.vstack([self.labels[:, 0], self.labels[-1, 1:],
                              self.labels[-2::-1, -1], self.labels[0, -2:0:-1]])
            return MaterialLoop(ring)
        raise ValueError("boundary extraction unsupported for this periodicity")

    def advected(self, m, t):
        return m.positions(self.labels, t)

    def advected_normals(self, m, t, order=2):
        """Unnormalized normals T1 x T2 (area-weighted) on the advected patch."""
        pos = self.advected(m, t)
        t1 = _param_derivative(pos, 0, self.param_periodic[0], order)
        t2 = _param_derivative(pos, 1, self.param_periodic[1], order)
        return pos, np.cross(t1, t2)

    def unit_normals(self, m, t, order=2):
        pos, nw = self.advected_normals(m, t, order)
        mag = np.linalg.norm(nw, axis=-1, keepdims=True)
        if np.any(mag == 0.0):
            # degenerate rows (disk center): leave zeros, quadrature weight is 0
            mag = np.where(mag == 0.0, 1.0, mag)
        return pos, nw / mag


def _param_derivative(pos, axis, periodic, order=2):
    """d(pos)/ds along one parameter axis; s spans 2*pi on periodic axes and
    [0, 1] on clamped axes (uniform samples either way)."""
    n = pos.shape[axis]
    moved = np.moveaxis(pos, axis, 0)
    if periodic:
        h = 2 * np.pi / n
        if order == 4:
            out = (np.roll(moved, 2, 0) - 8 * np.roll(moved, 1, 0)
                   + 8 * np.roll(moved, -1, 0) - np.roll(moved, -2, 0)) / (12 * h)
        else:
            out = (np.roll(moved, -1, 0) - np.roll(moved, 1, 0)) / (2 * h)
    else:
        h = 1.0 / (n - 1)
        out = np.empty_like(moved)
        out[1:-1] = (moved[2:] - moved[:-2]) / (2 * h)
        out[0] = (-3 * moved[0] + 4 * moved[1] - moved[2]) / (2 * h)
        out[-1] = (3 * moved[-1] - 4 * moved[-2] + moved[-3]) / (2 * h)
    return np.moveaxis(out, 0, axis)


def _param_weights(n, periodic):
    if periodic:
        return np.full(n, 2 * np.pi / n)
    w = np.full(n, 1.0 / (n - 1))
    w[0] = w[-1] = 0.5 / (n - 1)
    return w


@dataclass
class CirculationValues:
    """Circulation in both forms: along positions and along labels.

    The two are the same 1-form written in different variables, so they agree
    to quadrature tolerance; both are kept so the agreement can be asserted.
    """

    position_form: float
    label_form: float

    def __float__(self):
        return self.position_form


def circulation(m, loop, t, tangent_order=4):
    """Closed-loop integral of u . dx along the advected loop at time t.

    Also returns the label-space form: covelocity . dlabel along the label
    loop, computed with its own tangents (an independent discretization of
    the same value).
    """
    pos = loop.advected(m, t)
    if np.max(np.linalg.norm(pos - pos.mean(axis=0), axis=1)) < 1e-14:
        raise ValueError("degenerate loop: near-zero extent")
    vel = m.velocities(loop.labels, t)
    n = pos.shape[0]
    h = 2 * np.pi / n
    tan_x = closed_path_tangents(pos, order=tangent_order)
    position_form = float(np.sum(np.sum(vel * tan_x, axis=-1)) * h)
    F = deformation_at(m, loop.labels, t)
    covel = np.einsum("...i,...ij->...j", vel, F)
    tan_a = closed_path_tangents(loop.labels, order=tangent_order)
    label_form = float(np.sum(np.sum(covel * tan_a, axis=-1)) * h)
    return CirculationValues(position_form, label_form)


def spatial_half_vorticity_at(m, labels, t, h=1e-5):
    """(X, Y, Z) at the mapped points of arbitrary labels.

    Built from the instantaneous kinematics: the velocity gradient in space
    is G F^-1 (label derivatives chained through the inverse deformation
    gradient), and the half-curl is read off its antisymmetric part.
    """
    F = deformation_at(m, labels, t, h)
    G = velocity_gradient_at(m, labels, t, h)
    L = np.einsum("...ik,...kj->...ij", G, inv3(F))
    return 0.5 * np.stack(
        [L[..., 2, 1] - L[..., 1, 2],
         L[..., 0, 2] - L[..., 2, 0],
         L[..., 1, 0] - L[..., 0, 1]], axis=-1,
    )


def vorticity_flux(m, surf, t, tangent_order=2, stencil_h=1e-5):
    """2 * integral of (X, Y, Z) . n dS over the advected surface.

    The factor 2 makes the value the flux of the full vorticity vector, which
    is what circulation equals under the Stokes identity.
    """
    pos, nw = surf.advected_normals(m, t, order=tangent_order)
    w = spatial_half_vorticity_at(m, surf.labels, t, h=stencil_h)
    integrand = 2.0 * np.sum(w * nw, axis=-1)
    w1 = _param_weights(pos.shape[0], surf.param_periodic[0])
    w2 = _param_weights(pos.shape[1], surf.param_periodic[1])
    return float(np.sum(integrand * w1[:, None] * w2[None, :]))


@dataclass
class StokesCheck:
    circulation: float
    flux: float

    @property
    def residual(self):
        return abs(self.circulation - self.flux)


def stokes_residual(m, loop, surf, t, tangent_order=2, stencil_h=1e-5):
    """|circulation around the loop - vorticity flux through its spanning
    surface| at time t, with both values reported."""
    circ = circulation(m, loop, t).position_form
    flux = vorticity_flux(m, surf, t, tangent_order=tangent_order, stencil_h=stencil_h)
    return StokesCheck(circ, flux)


def kelvin_drift(m, loop, times, surf=None):
    """Max over times of |circulation(t) - circulation(t0)| on a material loop.

    When a spanning surface is supplied its flux drift is reported alongside
    (the surface form of the same conservation law).
    """
    times = np.asarray(times, dtype=float)
    if times.size < 2:
        raise ValueError("kelvin drift needs at least two times")
    c0 = circulation(m, loop, times[0]).position_form
    rows = {"circulation_t0": c0, "per_time": {}, "drift": 0.0}
    if surf is not None:
        f0 = vorticity_flux(m, surf, times[0])
        rows["flux_t0"] = f0
        rows["flux_per_time"] = {}
        rows["flux_drift"] = 0.0
    for t in times[1:]:
        c = circulation(m, loop, t).position_form
        rows["per_time"][float(t)] = abs(c - c0)
        rows["drift"] = max(rows["drift"], abs(c - c0))
        if surf is not None:
            f = vorticity_flux(m, surf, t)
            rows["flux_per_time"][float(t)] = abs(f - f0)
            rows["flux_drift"] = max(rows["flux_drift"], abs(f - f0))
    return rows


def tube_section_flux(m, section_a, section_b, t):
    """Vorticity flux through two sections cutting one vortex tube.

    Returns (flux_a, flux_b, |difference|); equal fluxes are the discrete
    form of the equal-section property of vortex tubes.
    """
    fa = vorticity_flux(m, section_a, t)
    fb = vorticity_flux(m, section_b, t)
    return fa, fb, abs(fa - fb)
