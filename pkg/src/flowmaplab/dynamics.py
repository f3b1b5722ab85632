"""Equation-of-motion residuals in both dependences, and potential bookkeeping.

ForcePotential bundles the accelerating-force potential V(x, t), the pressure
(as a closed form over positions or over labels), and the barotropic pressure
function f(p) = integral dp/phi(p); for constant density f(p) = p/rho and the
combined potential is Omega = V - p/rho.

The Eulerian residual is the momentum balance evaluated on spatial fields;
the Lagrangian residual contracts (acceleration - force) with the deformation
gradient and adds the label-space pressure gradient. The two are related
node-wise by exactly that contraction, which ``chain_rule_mismatch`` checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import Field, StencilSpec, differentiate, summarize_residual
from .flowmap import deformation_gradient

__all__ = [
    "ForcePotential",
    "eulerian_eom_residual",
    "lagrangian_eom_residual",
    "eulerian_residual_at_points",
    "chain_rule_mismatch",
]


def _fd_space_gradient(fn, points, t, h=1e-6):
    """Central-difference spatial gradient of a callable at points (..., 3)."""
    pts = np.asarray(points, dtype=float)
    out = np.empty(pts.shape)
    for k in range(3):
        dp = np.zeros(3)
        dp[k] = h
        out[..., k] = (fn(pts + dp, t) - fn(pts - dp, t)) / (2 * h)
    return out


@dataclass
class ForcePotential:
    """Force potential V, pressure, and barotropic closure.

    V:            callable (points, t) -> scalar array, or None for zero.
    V_grad:       optional analytic gradient (points, t) -> (..., 3).
    pressure:     callable or constant; interpreted per ``pressure_frame``.
    pressure_frame: "position" (p as a function of x) or "label" (p given
                  directly over labels, as closed forms sometimes are).
    pressure_grad: optional analytic gradient in the pressure frame.
    density:      constant rho (> 0).
    f_of_p:       optional barotropic pressure function f(p); when absent and
                  density is constant, f(p) = p/rho.
    """

    V: object = None
    V_grad: object = None
    pressure: object = 0.0
    pressure_frame: str = "position"
    pressure_grad: object = None
    density: float = 1.0
    f_of_p: object = None

    def V_at(self, points, t=0.0):
        if self.V is None:
            return np.zeros(np.asarray(points).shape[:-1])
        return np.asarray(self.V(points, t), dtype=float)

    def V_grad_at(self, points, t=0.0, h=1e-6):
        if self.V is None:
            return np.zeros(np.asarray(points).shape)
        if self.V_grad is not None:
            return np.asarray(self.V_grad(points, t), dtype=float)
        return _fd_space_gradient(self.V, points, t, h)

    def pressure_at(self, points, t=0.0):
        if callable(self.pressure):
            return np.asarray(self.pressure(points, t), dtype=float)
        return np.full(np.asarray(points).shape[:-1], float(self.pressure))

    def f_at(self, points, t=0.0):
        p = self.pressure_at(points, t)
        if self.f_of_p is not None:
            return np.asarray(self.f_of_p(p), dtype=float)
        return p / self.density

    def omega_at(self, points, t=0.0):
        """Omega = V - f(p); for constant density this is V - p/rho."""
        return self.V_at(points, t) - self.f_at(points, t)


def eulerian_eom_residual(u, v, w, fp, t=0.0, dudt=None, spec=StencilSpec(),
                          rind=1, keep_values=False):
    """Linf of the three momentum residuals on a common spatial grid.

    u, v, w: scalar Fields of the velocity components over a spatial grid
    whose axes are x, y(, z). dudt: optional (..., 3) array of the local time
    derivative (zero for steady fields). The pressure and V come from ``fp``
    evaluated at the grid nodes (pressure_frame must be "position").
    """
    grid = u.grid
    if fp.pressure_frame != "position":
        raise ValueError("eulerian residual needs a position-frame pressure")
    comps = [u.data, v.data, w.data]
    pts = grid.nodes3().reshape(grid.shape + (3,))
    p = fp.pressure_at(pts, t)
    Vg = fp.V_grad_at(pts, t)
    rho = fp.density
    out = []
    for i, c in enumerate(comps):
        adv = np.zeros(grid.shape)
        for k in range(grid.ndim):
            adv += comps[k] * differentiate(c, k, spec, grid=grid)
        dpdxi = differentiate(p, i, spec, grid=grid) if i < grid.ndim else np.zeros(grid.shape)
        local = dudt[..., i] if dudt is not None else 0.0
        res = local + adv - Vg[..., i] + dpdxi / rho
        out.append(summarize_residual(res, grid, rind=rind, keep_values=keep_values))
    return tuple(out)


def _pressure_label_gradient(m, fp, t, spec, F):
    grid = m.grid
    labels = m.grid_labels()
    if fp.pressure_frame == "label":
        if fp.pressure_grad is not None:
            return np.asarray(fp.pressure_grad(labels, t), dtype=float)
        pvals = fp.pressure_at(labels, t)
        out = np.zeros(grid.shape + (3,))
        for k in range(grid.ndim):
            out[..., k] = differentiate(pvals, k, spec, grid=grid)
        return out
    # position-frame pressure: chain rule through the advected positions
    pos = m.positions(labels, t)
    if fp.pressure_grad is not None:
        gp = np.asarray(fp.pressure_grad(pos, t), dtype=float)
    else:
        gp = _fd_space_gradient(fp.pressure_at, pos, t)
    return np.einsum("...i,...ij->...j", gp, F)


def lagrangian_eom_residual(m, fp, t, spec=StencilSpec(), mode="auto",
                            accel_dt=None, rind=0, keep_values=False):
    """Linf of the label-space momentum residuals at time t.

    Per label axis j: sum_i (a_i - dV/dx_i) dx_i/dlab_j + (1/rho) dp/dlab_j.
    Accelerations use registered analytic callables when present, else a
    centered time difference with dt = 1e-4 * the map's time scale.
    """
    grid = m.grid
    labels = m.grid_labels()
    F = deformation_gradient(m, t, spec, mode).values
    acc = m.accelerations(labels, t, dt=accel_dt)
    pos = m.positions(labels, t)
    force = fp.V_grad_at(pos, t)
    dp = _pressure_label_gradient(m, fp, t, spec, F)
    core = np.einsum("...i,...ij->...j", acc - force, F) + dp / fp.density
    out = []
    for j in range(3):
        out.append(summarize_residual(core[..., j], grid, rind=rind, keep_values=keep_values))
    return tuple(out)


def eulerian_residual_at_points(u_fn, fp, points, t, h=1e-5, dt=1e-5):
    """Momentum residual of a velocity-field callable at arbitrary points.

    Space and time derivatives are taken by small central differences on the
    callable itself; used to check the chain-rule tie between the two
    residual forms away from any grid.
    """
    pts = np.asarray(points, dtype=float)
    u0 = np.asarray(u_fn(pts, t), dtype=float)
    dudt = (np.asarray(u_fn(pts, t + dt)) - np.asarray(u_fn(pts, t - dt))) / (2 * dt)
    grad_u = np.empty(pts.shape[:-1] + (3, 3))
    for k in range(3):
        dp = np.zeros(3)
        dp[k] = h
        grad_u[..., :, k] = (np.asarray(u_fn(pts + dp, t)) - np.asarray(u_fn(pts - dp, t))) / (2 * h)
    adv = np.einsum("...ik,...k->...i", grad_u, u0)
    force = fp.V_grad_at(pts, t)
    if callable(fp.pressure):
        gp = (
            np.asarray(fp.pressure_grad(pts, t), dtype=float)
            if fp.pressure_grad is not None
            else _fd_space_gradient(fp.pressure_at, pts, t, h)
        )
    else:
        gp = np.zeros(pts.shape)
    return dudt + adv - force + gp / fp.density


def chain_rule_mismatch(m, fp, u_fn, t, spec=StencilSpec(), rind=1):
    """Max |lagrangian residual - F^T (eulerian residual at mapped points)|.

    The Lagrangian residual is, node-wise, the Eulerian one contracted with
    the deformation gradient; this measures how well the two discretizations
    realize that identity (O(h^2) for second-order stencils).
    """
    grid = m.grid
    labels = m.grid_labels()
    F = deformation_gradient(m, t, spec).values
    acc = m.accelerations(labels, t)
    pos = m.positions(labels, t)
    force = fp.V_grad_at(pos, t)
    dp = _pressure_label_gradient(m, fp, t, spec, F)
    lag = np.einsum("...i,...ij->...j", acc - force, F) + dp / fp.density
    eul = eulerian_residual_at_points(u_fn, fp, pos, t)
    contracted = np.einsum("...i,...ij->...j", eul, F)
    return summarize_residual(np.abs(lag - contracted), grid, rind=rind)
