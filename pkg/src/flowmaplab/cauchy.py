"""Label-space vorticity invariants, covelocity, and vortex-line checks.

The covelocity (alpha, beta, gamma) is the velocity pulled back to label
space, alpha_j = sum_i u_i dx_i/dlab_j. Half its label-space curl gives the
invariants (A, B, C), which stay frozen in time for ideal barotropic flow
under potential forces; ``invariant_drift`` measures exactly that constancy.

Sign and factor conventions: this library stores (A, B, C) and the Eulerian
rotational velocities (X, Y, Z) as HALF the standard right-handed curl, so
the modern vorticity vector is 2*(A, B, C) at t=0 and 2*(X, Y, Z) at time t.
Every cross-check in the test suite states which side carries the factor 2.

Vortex-line functions: two label scalars (phi, psi) whose joint level sets
are the initial vortex lines satisfy -2A = d(phi,psi)/d(b,c) and cyclic;
``vortex_line_function_residual`` grades candidate pairs against a given
invariant field (note the leading minus: pairs oriented with the half-curl
convention above satisfy the relations after exchanging phi and psi).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import Field, StencilSpec, curl, differentiate, summarize_residual
from .flowmap import deformation_gradient

__all__ = [
    "LabelCovelocity",
    "VorticityField",
    "label_covelocity",
    "cauchy_invariants",
    "invariant_drift",
    "solenoidality_residual",
    "eulerian_vorticity",
    "vortex_line_function_residual",
]


@dataclass
class LabelCovelocity:
    """(alpha, beta, gamma) on the label grid at one time."""

    grid: object
    t: float
    values: np.ndarray  # grid.shape + (3,)
    mode: str = "fd"


@dataclass
class VorticityField:
    """Half-curl components on labels (A,B,C) or positions (X,Y,Z).

    ``frame`` is "label" or "spatial"; operations refuse to mix frames.
    """

    grid: object
    t: float
    values: np.ndarray
    frame: str = "label"
    mode: str = "fd"

    def __post_init__(self):
        if self.frame not in ("label", "spatial"):
            raise TypeError(f"unknown vorticity frame {self.frame!r}")


def label_covelocity(m, t, spec=StencilSpec(), mode="auto"):
    """Velocity contracted with the deformation gradient per node.

    At t=0 with identity labels this is the initial velocity field itself.
    """
    labels = m.grid_labels()
    u = m.velocities(labels, t)
    g = deformation_gradient(m, t, spec, mode)
    vals = np.einsum("...i,...ij->...j", u, g.values)
    return LabelCovelocity(m.grid, float(t), vals, mode=g.mode)


def _analytic_covelocity_partials(m, labels, t):
    """d(covelocity_j)/dlab_k from registered exact derivatives, or None.

    Needs both velocity label-partials G and map second partials H:
    d(alpha_j)/dlab_k = sum_i [G_ik F_ij + u_i H_ijk].
    """
    F = m.label_partials(labels, t)
    G = m.velocity_label_partials(labels, t)
    H = m.second_label_partials(labels, t)
    if F is None or G is None or H is None:
        return None
    u = m.velocities(labels, t)
    return np.einsum("...ik,...ij->...jk", G, F) + np.einsum("...i,...ijk->...jk", u, H)


def cauchy_invariants(m, t, spec=StencilSpec(), mode="auto"):
    """(A, B, C): half the label-space curl of the covelocity.

    With full analytic derivatives registered on the map the curl is exact
    (no grid truncation); otherwise the covelocity is differentiated over the
    label grid with the given stencil.
    """
    labels = m.grid_labels()
    if mode in ("auto", "analytic"):
        D = _analytic_covelocity_partials(m, labels, t)
        if D is not None:
            w = 0.5 * np.stack(
                [D[..., 2, 1] - D[..., 1, 2],
                 D[..., 0, 2] - D[..., 2, 0],
                 D[..., 1, 0] - D[..., 0, 1]], axis=-1,
            )
            return VorticityField(m.grid, float(t), w, frame="label", mode="analytic")
        if mode == "analytic":
            raise ValueError("map lacks the derivative callables for analytic invariants")
    cov = label_covelocity(m, t, spec, mode)
    w = 0.5 * curl(cov.values, spec, grid=m.grid)
    return VorticityField(m.grid, float(t), w, frame="label", mode=f"fd-order{spec.order}")


def invariant_drift(m, times, spec=StencilSpec(), mode="auto", rind=0):
    """Constancy-in-time check of the invariants: THE conservation test.

    Returns a dict with the reference field, per-time max deviations from
    the t0 field (not from any analytic value, so conservation is isolated
    from discretization bias), and the overall drift.
    """
    times = np.asarray(times, dtype=float)
    if times.size < 2:
        raise ValueError("invariant drift needs at least two times")
    ref = cauchy_invariants(m, times[0], spec, mode)
    incl = np.ones(m.grid.shape, bool)
    if rind:
        incl[...] = False
        incl[m.grid.interior_slices(rind)] = True
    per_time = {}
    drift = 0.0
    for t in times[1:]:
        w = cauchy_invariants(m, t, spec, mode)
        dev = float(np.max(np.abs((w.values - ref.values)[incl])))
        per_time[float(t)] = dev
        drift = max(drift, dev)
    return {
        "drift": drift,
        "per_time": per_time,
        "reference": ref,
        "mode": ref.mode,
        "stencil_order": spec.order,
    }


def solenoidality_residual(w, spec=StencilSpec(), rind=0, keep_values=False):
    """Linf of dA/da + dB/db + dC/dc for a label-frame invariant field."""
    if w.frame != "label":
        raise TypeError("solenoidality residual expects a label-frame field")
    div = np.zeros(w.grid.shape)
    for k in range(w.grid.ndim):
        div += differentiate(w.values[..., k], k, spec, grid=w.grid)
    return summarize_residual(div, w.grid, rind=rind, keep_values=keep_values)


def eulerian_vorticity(u, v, w, spec=StencilSpec(), t=0.0):
    """(X, Y, Z) = half-curl of a velocity field sampled on a spatial grid.

    The grid axes are x, y(, z); missing axes contribute zero derivatives
    (z-invariant embedded flows).
    """
    grid = u.grid if isinstance(u, Field) else None
    if grid is None:
        raise TypeError("eulerian_vorticity expects Fields on a spatial grid")
    vec = np.stack([u.data, v.data, w.data], axis=-1)
    vals = 0.5 * curl(vec, spec, grid=grid)
    return VorticityField(grid, float(t), vals, frame="spatial")


def vortex_line_function_residual(phi, psi, w, spec=StencilSpec(), rind=0,
                                  keep_values=False):
    """Linf mismatch of -2(A,B,C) against the (phi, psi) Jacobian pairs.

    phi, psi: scalar label Fields (or arrays on w.grid). The three relations
    checked are -2A = dphi/db dpsi/dc - dphi/dc dpsi/db and cyclic.
    """
    if w.frame != "label":
        raise TypeError("vortex-line functions live in label space")
    grid = w.grid
    phi_d = phi.data if isinstance(phi, Field) else np.asarray(phi, float)
    psi_d = psi.data if isinstance(psi, Field) else np.asarray(psi, float)

    def grad3(f):
        out = np.zeros(grid.shape + (3,))
        for k in range(grid.ndim):
            out[..., k] = differentiate(f, k, spec, grid=grid)
        return out

    gp, gq = grad3(phi_d), grad3(psi_d)
    cross = np.stack(
        [gp[..., 1] * gq[..., 2] - gp[..., 2] * gq[..., 1],
         gp[..., 2] * gq[..., 0] - gp[..., 0] * gq[..., 2],
         gp[..., 0] * gq[..., 1] - gp[..., 1] * gq[..., 0]], axis=-1,
    )
    res = np.max(np.abs(-2.0 * w.values - cross), axis=-1)
    return summarize_residual(res, grid, rind=rind, keep_values=keep_values)
