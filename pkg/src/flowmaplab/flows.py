"""Catalog of exact Euler solutions expressed as Lagrangian flow maps.

Closed-form entries: rigid_rotation, uniform_translation, simple_shear,
stagnation, gerstner. Trajectory-integrated entries (classical 4-stage
Runge-Kutta over a steady velocity field): point_vortex, taylor_green.

Every entry carries the force potential and pressure it solves the momentum
balance under, plus its known kinematic properties, and self-validates at
construction: registered analytic partials are cross-checked against finite
differences and the Lagrangian momentum residual is evaluated on the entry's
grid at a nonzero time.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .grids import LabelGrid, StencilSpec
from .flowmap import (
    AnalyticFlowMap,
    SampledFlowMap,
    validate_analytic_partials,
)
from .dynamics import ForcePotential, lagrangian_eom_residual

__all__ = [
    "CatalogEntry",
    "default_grid",
    "TrajectoryIntegrator",
    "catalog_flow",
    "catalog_names",
    "describe_flow",
    "integrate_trajectories",
    "rk4_advect",
]


class ParticleEscapeError(RuntimeError):
    """A trajectory left the caller-declared bounding box: the flow is
    unbounded there or the integration is under-resolved."""


def rk4_advect(field_fn, labels, t0, t1, dt, bbox=None):
    """Advect points through a velocity field with fixed-step RK4.

    field_fn(points, t) -> velocities. dt is a target step; the interval is
    covered by equal steps no larger than dt (reversed sign for t1 < t0).
    """
    pts = np.array(labels, dtype=float)
    span = float(t1) - float(t0)
    if span == 0.0:
        return pts
    nsteps = max(1, int(np.ceil(abs(span) / dt - 1e-12)))
    h = span / nsteps
    t = float(t0)
    for _ in range(nsteps):
        k1 = np.asarray(field_fn(pts, t))
        k2 = np.asarray(field_fn(pts + 0.5 * h * k1, t + 0.5 * h))
        k3 = np.asarray(field_fn(pts + 0.5 * h * k2, t + 0.5 * h))
        k4 = np.asarray(field_fn(pts + h * k3, t + h))
        pts = pts + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
        if bbox is not None:
            lo, hi = np.asarray(bbox[0]), np.asarray(bbox[1])
            if np.any(pts < lo) or np.any(pts > hi):
                raise ParticleEscapeError(
                    f"particle left bounding box {bbox} at t={t:.6g}"
                )
    return pts


@dataclass
class TrajectoryIntegrator:
    """Classical RK4 with a fixed step over a (possibly unsteady) field."""

    field_fn: object
    dt: float
    bbox: object = None

    def advect(self, labels, t0, t1):
        return rk4_advect(self.field_fn, labels, t0, t1, self.dt, self.bbox)

    def integrate_grid(self, grid, times, convention="identity",
                       reference_density=1.0, name="sampled", timescale=None,
                       halving_check=True):
        """Build a SampledFlowMap by marching the grid labels through ``times``.

        Stores a step-halving error estimate (max final-position change when
        dt is halved), which bounds the integration error at ~O(dt^4)/15.
        """
        times = np.asarray(times, dtype=float)
        if times[0] != 0.0:
            raise ValueError("trajectory tables must start at t=0 (identity labels)")
        labels = grid.nodes3().reshape(grid.shape + (3,))
        table = np.empty((len(times),) + grid.shape + (3,))
        table[0] = labels
        pts = labels
        for j in range(1, len(times)):
            gap = times[j] - times[j - 1]
            if gap < self.dt - 1e-12 or abs(round(gap / self.dt) - gap / self.dt) > 1e-9:
                raise ValueError("dt must divide the gaps between requested times")
            pts = self.advect(pts, times[j - 1], times[j])
            table[j] = pts
        vel = np.stack([np.asarray(self.field_fn(table[j], times[j])) for j in range(len(times))])
        est = None
        if halving_check and len(times) > 1:
            fine = rk4_advect(self.field_fn, labels, times[0], times[-1], self.dt / 2, self.bbox)
            est = float(np.max(np.abs(fine - table[-1])))
        return SampledFlowMap(
            grid, times, table, velocities_table=vel, field_fn=self.field_fn,
            dt=self.dt, convention=convention, reference_density=reference_density,
            name=name, timescale=timescale if timescale is not None else float(times[-1] or 1.0),
            bbox=self.bbox, step_halving_error=est,
        )


def integrate_trajectories(field_fn, grid, times, dt, bbox=None, **kw):
    """Convenience wrapper over TrajectoryIntegrator.integrate_grid."""
    return TrajectoryIntegrator(field_fn, dt, bbox).integrate_grid(grid, times, **kw)


@dataclass
class CatalogEntry:
    """An exact solution: its flow map, driving potential, and known facts."""

    name: str
    params: dict
    dimensionality: int
    map: object
    force: ForcePotential
    properties: dict = dc_field(default_factory=dict)
    validation_residual: float = None

    def describe(self):
        lines = [f"{self.name} ({self.dimensionality}D embedded in 3D)"]
        lines.append(f"  parameters: {self.params}")
        for k, v in self.properties.items():
            lines.append(f"  {k}: {v}")
        if self.validation_residual is not None:
            lines.append(
                f"  construction EOM residual: {self.validation_residual:.3e}"
            )
        return "\n".join(lines)


def _grid2d(lo, hi, n, periodic=(False, False)):
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    n = np.asarray(n, int)
    spacing = []
    for k in range(2):
        cells = n[k] if periodic[k] else n[k] - 1
        spacing.append((hi[k] - lo[k]) / cells)
    return LabelGrid(tuple(n), tuple(lo), tuple(spacing), tuple(periodic))


def default_grid(name, **params):
    """Default label grid of a catalog flow, buildable without the flow.

    Used by the suite runner to re-mesh a flow's natural domain at requested
    resolutions without constructing (or integrating) the map first.
    """
    if name == "gerstner":
        k = float(params.get("k", 1.0))
        return _grid2d((0.0, -3.0), (2 * np.pi / k, -0.5), (33, 33))
    table = {
        "rigid_rotation": lambda: _grid2d((-0.5, -0.5), (0.5, 0.5), (33, 33)),
        "uniform_translation": lambda: _grid2d((0.0, 0.0), (1.0, 1.0), (17, 17)),
        "simple_shear": lambda: _grid2d((0.0, 0.0), (1.0, 1.0), (17, 17)),
        "stagnation": lambda: _grid2d((0.1, 0.1), (1.1, 1.1), (17, 17)),
        "point_vortex": lambda: _grid2d((0.7, 0.7), (1.7, 1.7), (33, 33)),
        "taylor_green": lambda: _grid2d((0.0, 0.0), (2 * np.pi, 2 * np.pi), (32, 32),
                                        periodic=(True, True)),
    }
    if name not in table:
        raise KeyError(f"unknown flow {name!r}")
    return table[name]()


def _rigid_rotation(omega=1.0, grid=None):
    w = float(omega)
    if grid is None:
        grid = default_grid("rigid_rotation")

    def pos(lab, t):
        c, s = np.cos(w * t), np.sin(w * t)
        a, b, cc = lab[..., 0], lab[..., 1], lab[..., 2]
        return np.stack([a * c - b * s, a * s + b * c, cc], axis=-1)

    def vel(lab, t):
        p = pos(lab, t)
        return np.stack([-w * p[..., 1], w * p[..., 0], np.zeros_like(p[..., 2])], axis=-1)

    def acc(lab, t):
        p = pos(lab, t)
        return np.stack([-w * w * p[..., 0], -w * w * p[..., 1], np.zeros_like(p[..., 2])], axis=-1)

    def partials(lab, t):
        c, s = np.cos(w * t), np.sin(w * t)
        F = np.zeros(lab.shape[:-1] + (3, 3))
        F[..., 0, 0] = c
        F[..., 0, 1] = -s
        F[..., 1, 0] = s
        F[..., 1, 1] = c
        F[..., 2, 2] = 1.0
        return F

    def vel_partials(lab, t):
        c, s = np.cos(w * t), np.sin(w * t)
        G = np.zeros(lab.shape[:-1] + (3, 3))
        G[..., 0, 0] = -w * s
        G[..., 0, 1] = -w * c
        G[..., 1, 0] = w * c
        G[..., 1, 1] = -w * s
        return G

    def second_partials(lab, t):
        return np.zeros(lab.shape[:-1] + (3, 3, 3))

    m = AnalyticFlowMap(
        grid, pos, vel, acc, partials, vel_partials, second_partials,
        name=f"rigid_rotation(omega={w})", timescale=2 * np.pi / abs(w),
    )
    force = ForcePotential(
        pressure=lambda x, t: 0.5 * w * w * (x[..., 0] ** 2 + x[..., 1] ** 2),
        pressure_grad=lambda x, t: np.stack(
            [w * w * x[..., 0], w * w * x[..., 1], np.zeros_like(x[..., 2])], axis=-1
        ),
    )
    props = {
        "jacobian": "1 everywhere (volume preserving)",
        "half_vorticity": (0.0, 0.0, w),
        "pressure": "rho * omega^2 (x^2+y^2) / 2 (centripetal balance)",
    }
    return CatalogEntry("rigid_rotation", {"omega": w}, 2, m, force, props)


def _uniform_translation(velocity=(1.0, 0.0, 0.0), grid=None):
    U = np.asarray(velocity, dtype=float)
    if grid is None:
        grid = default_grid("uniform_translation")

    def pos(lab, t):
        return lab + U * t

    def vel(lab, t):
        return np.broadcast_to(U, lab.shape).copy()

    def acc(lab, t):
        return np.zeros(lab.shape)

    def partials(lab, t):
        F = np.zeros(lab.shape[:-1] + (3, 3))
        F[..., 0, 0] = F[..., 1, 1] = F[..., 2, 2] = 1.0
        return F

    def vel_partials(lab, t):
        return np.zeros(lab.shape[:-1] + (3, 3))

    def second_partials(lab, t):
        return np.zeros(lab.shape[:-1] + (3, 3, 3))

    m = AnalyticFlowMap(grid, pos, vel, acc, partials, vel_partials, second_partials,
                        name="uniform_translation", timescale=1.0)
    force = ForcePotential(pressure=0.0)
    props = {"jacobian": "1", "half_vorticity": (0.0, 0.0, 0.0)}
    return CatalogEntry("uniform_translation", {"velocity": tuple(U)}, 2, m, force, props)


def _simple_shear(gamma=1.0, grid=None):
    g = float(gamma)
    if grid is None:
        grid = default_grid("simple_shear")

    def pos(lab, t):
        return np.stack(
            [lab[..., 0] + g * t * lab[..., 1], lab[..., 1], lab[..., 2]], axis=-1
        )

    def vel(lab, t):
        return np.stack(
            [g * lab[..., 1], np.zeros_like(lab[..., 1]), np.zeros_like(lab[..., 2])],
            axis=-1,
        )

    def acc(lab, t):
        return np.zeros(lab.shape)

    def partials(lab, t):
        F = np.zeros(lab.shape[:-1] + (3, 3))
        F[..., 0, 0] = F[..., 1, 1] = F[..., 2, 2] = 1.0
        F[..., 0, 1] = g * t
        return F

    def vel_partials(lab, t):
        G = np.zeros(lab.shape[:-1] + (3, 3))
        G[..., 0, 1] = g
        return G

    def second_partials(lab, t):
        return np.zeros(lab.shape[:-1] + (3, 3, 3))

    m = AnalyticFlowMap(grid, pos, vel, acc, partials, vel_partials, second_partials,
                        name=f"simple_shear(gamma={g})", timescale=1.0 / abs(g))
    force = ForcePotential(pressure=0.0)
    props = {"jacobian": "1", "half_vorticity": (0.0, 0.0, -g / 2)}
    return CatalogEntry("simple_shear", {"gamma": g}, 2, m, force, props)


def _stagnation(k=1.0, grid=None):
    kk = float(k)
    if grid is None:
        grid = default_grid("stagnation")

    def pos(lab, t):
        return np.stack(
            [lab[..., 0] * np.exp(kk * t), lab[..., 1] * np.exp(-kk * t), lab[..., 2]],
            axis=-1,
        )

    def vel(lab, t):
        p = pos(lab, t)
        return np.stack([kk * p[..., 0], -kk * p[..., 1], np.zeros_like(p[..., 2])], axis=-1)

    def acc(lab, t):
        p = pos(lab, t)
        return np.stack([kk * kk * p[..., 0], kk * kk * p[..., 1], np.zeros_like(p[..., 2])], axis=-1)

    def partials(lab, t):
        F = np.zeros(lab.shape[:-1] + (3, 3))
        F[..., 0, 0] = np.exp(kk * t)
        F[..., 1, 1] = np.exp(-kk * t)
        F[..., 2, 2] = 1.0
        return F

    def vel_partials(lab, t):
        G = np.zeros(lab.shape[:-1] + (3, 3))
        G[..., 0, 0] = kk * np.exp(kk * t)
        G[..., 1, 1] = -kk * np.exp(-kk * t)
        return G

    def second_partials(lab, t):
        return np.zeros(lab.shape[:-1] + (3, 3, 3))

    m = AnalyticFlowMap(grid, pos, vel, acc, partials, vel_partials, second_partials,
                        name=f"stagnation(k={kk})", timescale=1.0 / abs(kk))
    force = ForcePotential(
        pressure=lambda x, t: -0.5 * kk * kk * (x[..., 0] ** 2 + x[..., 1] ** 2),
        pressure_grad=lambda x, t: np.stack(
            [-kk * kk * x[..., 0], -kk * kk * x[..., 1], np.zeros_like(x[..., 2])], axis=-1
        ),
    )
    props = {
        "jacobian": "1",
        "half_vorticity": (0.0, 0.0, 0.0),
        "pressure": "-rho k^2 (x^2+y^2)/2 (Bernoulli)",
    }
    return CatalogEntry("stagnation", {"k": kk}, 2, m, force, props)


def _gerstner(k=1.0, g=1.0, grid=None):
    kk, gg = float(k), float(g)
    cw = np.sqrt(gg / kk)
    if grid is None:
        grid = default_grid("gerstner", k=kk)
    bmax = grid.origin[1] + grid.spacing[1] * (grid.shape[1] - 1)
    if np.exp(2 * kk * bmax) >= 1.0:
        raise ValueError(
            "Gerstner grid reaches e^(2kb) >= 1: degenerate (self-intersecting) map"
        )

    def _EB(lab, t):
        E = np.exp(kk * lab[..., 1])
        th = kk * (lab[..., 0] - cw * t)
        return E, th

    def pos(lab, t):
        E, th = _EB(lab, t)
        return np.stack(
            [lab[..., 0] - E / kk * np.sin(th), lab[..., 1] + E / kk * np.cos(th), lab[..., 2]],
            axis=-1,
        )

    def vel(lab, t):
        E, th = _EB(lab, t)
        return np.stack([cw * E * np.cos(th), cw * E * np.sin(th), np.zeros_like(E)], axis=-1)

    def acc(lab, t):
        E, th = _EB(lab, t)
        return np.stack([gg * E * np.sin(th), -gg * E * np.cos(th), np.zeros_like(E)], axis=-1)

    def partials(lab, t):
        E, th = _EB(lab, t)
        F = np.zeros(lab.shape[:-1] + (3, 3))
        F[..., 0, 0] = 1 - E * np.cos(th)
        F[..., 0, 1] = -E * np.sin(th)
        F[..., 1, 0] = -E * np.sin(th)
        F[..., 1, 1] = 1 + E * np.cos(th)
        F[..., 2, 2] = 1.0
        return F

    def vel_partials(lab, t):
        E, th = _EB(lab, t)
        G = np.zeros(lab.shape[:-1] + (3, 3))
        G[..., 0, 0] = -cw * kk * E * np.sin(th)
        G[..., 0, 1] = cw * kk * E * np.cos(th)
        G[..., 1, 0] = cw * kk * E * np.cos(th)
        G[..., 1, 1] = cw * kk * E * np.sin(th)
        return G

    def second_partials(lab, t):
        E, th = _EB(lab, t)
        H = np.zeros(lab.shape[:-1] + (3, 3, 3))
        H[..., 0, 0, 0] = kk * E * np.sin(th)
        H[..., 0, 0, 1] = H[..., 0, 1, 0] = -kk * E * np.cos(th)
        H[..., 0, 1, 1] = -kk * E * np.sin(th)
        H[..., 1, 0, 0] = -kk * E * np.cos(th)
        H[..., 1, 0, 1] = H[..., 1, 1, 0] = -kk * E * np.sin(th)
        H[..., 1, 1, 1] = kk * E * np.cos(th)
        return H

    def rho0(lab):
        return 1.0 - np.exp(2 * kk * lab[..., 1])

    m = AnalyticFlowMap(
        grid, pos, vel, acc, partials, vel_partials, second_partials,
        convention="generalized", reference_density=rho0,
        name=f"gerstner(k={kk})", timescale=2 * np.pi / (kk * cw),
    )
    force = ForcePotential(
        V=lambda x, t: -gg * x[..., 1],
        V_grad=lambda x, t: np.stack(
            [np.zeros_like(x[..., 0]), -gg * np.ones_like(x[..., 1]), np.zeros_like(x[..., 2])],
            axis=-1,
        ),
        pressure=lambda lab, t: -gg * lab[..., 1] + gg / (2 * kk) * np.exp(2 * kk * lab[..., 1]),
        pressure_frame="label",
        pressure_grad=lambda lab, t: np.stack(
            [np.zeros_like(lab[..., 0]),
             -gg + gg * np.exp(2 * kk * lab[..., 1]),
             np.zeros_like(lab[..., 2])], axis=-1,
        ),
    )
    props = {
        "jacobian": "1 - e^(2kb), independent of t",
        "dispersion": f"c^2 = g/k -> c = {cw:.6g}",
        "label_half_vorticity": "third component c*k*e^(2kb), constant in time",
    }
    return CatalogEntry("gerstner", {"k": kk, "g": gg}, 2, m, force, props)


POINT_VORTEX_CORE_RADIUS = 0.1


def _point_vortex(gamma=2 * np.pi, grid=None, times=None, dt=None):
    G = float(gamma)
    if grid is None:
        grid = default_grid("point_vortex")
    period = 4 * np.pi ** 2 / G  # orbit period at radius 1
    if times is None:
        times = (0.0, period / 8, period / 4)
    if dt is None:
        dt = period / 2048

    def field(x, t):
        r2 = x[..., 0] ** 2 + x[..., 1] ** 2
        if np.any(r2 < POINT_VORTEX_CORE_RADIUS ** 2):
            raise ValueError("point-vortex evaluation inside the excluded core disk")
        f = G / (2 * np.pi * r2)
        return np.stack([-f * x[..., 1], f * x[..., 0], np.zeros_like(f)], axis=-1)

    lab = grid.nodes3()
    if np.any(lab[:, 0] ** 2 + lab[:, 1] ** 2 < POINT_VORTEX_CORE_RADIUS ** 2):
        raise ValueError("point-vortex label grid intrudes into the core disk")
    m = integrate_trajectories(field, grid, times, dt,
                               name=f"point_vortex(gamma={G})", timescale=period)
    force = ForcePotential(
        pressure=lambda x, t: -G ** 2 / (8 * np.pi ** 2 * (x[..., 0] ** 2 + x[..., 1] ** 2)),
        pressure_grad=lambda x, t: np.stack(
            [G ** 2 / (4 * np.pi ** 2) * x[..., 0] / (x[..., 0] ** 2 + x[..., 1] ** 2) ** 2,
             G ** 2 / (4 * np.pi ** 2) * x[..., 1] / (x[..., 0] ** 2 + x[..., 1] ** 2) ** 2,
             np.zeros_like(x[..., 2])], axis=-1,
        ),
    )
    props = {
        "circulation": f"{G} around loops enclosing the core, 0 otherwise",
        "angular_velocity": "Gamma / (2 pi r^2) per particle",
        "orbit_period_at_r1": period,
        "core_exclusion_radius": POINT_VORTEX_CORE_RADIUS,
    }
    return CatalogEntry("point_vortex", {"gamma": G}, 2, m, force, props)


def _taylor_green(grid=None, times=None, dt=None):
    if grid is None:
        grid = default_grid("taylor_green")
    if times is None:
        times = (0.0, 0.5, 1.0)
    if dt is None:
        dt = 1.0 / 256

    def field(x, t):
        return np.stack(
            [np.cos(x[..., 0]) * np.sin(x[..., 1]),
             -np.sin(x[..., 0]) * np.cos(x[..., 1]),
             np.zeros_like(x[..., 0])], axis=-1,
        )

    m = integrate_trajectories(field, grid, times, dt, name="taylor_green",
                               timescale=2 * np.pi)
    force = ForcePotential(
        pressure=lambda x, t: -0.25 * (np.cos(2 * x[..., 0]) + np.cos(2 * x[..., 1])),
        pressure_grad=lambda x, t: np.stack(
            [0.5 * np.sin(2 * x[..., 0]), 0.5 * np.sin(2 * x[..., 1]),
             np.zeros_like(x[..., 0])], axis=-1,
        ),
    )
    props = {
        "field": "steady cellular field (cos x sin y, -sin x cos y, 0)",
        "pressure": "-rho (cos 2x + cos 2y)/4",
    }
    return CatalogEntry("taylor_green", {}, 2, m, force, props)


_FACTORIES = {
    "rigid_rotation": _rigid_rotation,
    "uniform_translation": _uniform_translation,
    "simple_shear": _simple_shear,
    "stagnation": _stagnation,
    "gerstner": _gerstner,
    "point_vortex": _point_vortex,
    "taylor_green": _taylor_green,
}

_VALIDATION_TOL = {
    "rigid_rotation": 1e-9,
    "uniform_translation": 1e-12,
    "simple_shear": 1e-12,
    "stagnation": 1e-9,
    "gerstner": 1e-8,
    "point_vortex": 2e-4,
    "taylor_green": 2e-4,
}


def catalog_names():
    return sorted(_FACTORIES)


def catalog_flow(name, validate=True, **params):
    """Build a catalog entry by name; unknown names raise.

    Entries self-validate: analytic partials are cross-checked against finite
    differences and the Lagrangian momentum residual at a mid-range time must
    pass the entry's gate.
    """
    if name not in _FACTORIES:
        raise KeyError(f"unknown flow {name!r}; known: {', '.join(catalog_names())}")
    entry = _FACTORIES[name](**params)
    if validate:
        if isinstance(entry.map, SampledFlowMap):
            t_check = float(entry.map.times[1])
        else:
            t_check = 0.3 * entry.map.timescale
        validate_analytic_partials(entry.map, t_check)
        res = lagrangian_eom_residual(entry.map, entry.force, t_check, StencilSpec(order=2))
        worst = max(r.linf for r in res)
        entry.validation_residual = worst
        tol = _VALIDATION_TOL[name]
        if worst > tol:
            raise ValueError(
                f"catalog entry {name} failed its construction gate: "
                f"EOM residual {worst:.3e} > {tol:g}"
            )
    return entry


def describe_flow(name, **params):
    return catalog_flow(name, **params).describe()
