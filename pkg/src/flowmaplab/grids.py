"""Structured label-space grids, sampled fields, and finite-difference calculus.

Everything downstream (flow maps, invariants, circulation, energy) runs on the
types in this module: a uniform 1-3 axis grid of particle labels, fields
sampled on its nodes, and centered finite differences of formal order 2 or 4.
Boundary nodes use one-sided stencils of matching order unless the axis is
periodic. Residual norms are reported as (Linf, L2, location of max)
triples, with an optional rind exclusion of boundary-contaminated nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
import numpy as np

__all__ = [
    "LabelGrid",
    "Field",
    "StencilSpec",
    "ResidualSummary",
    "differentiate",
    "gradient",
    "divergence",
    "curl",
    "summarize_residual",
]


@dataclass(frozen=True)
class LabelGrid:
    """Uniform structured grid over particle labels (a, b, c).

    shape   : nodes per axis (1 to 3 axes), every axis >= 4
    origin  : label coordinates of node (0, 0, 0)
    spacing : per-axis step h > 0
    periodic: per-axis wrap flag; a periodic axis of n nodes covers one full
              period of length n*h (the wrap node is not duplicated)

    Node positions are computed multiplicatively (origin + i*h), never by
    accumulation, so there is no drift at large indices.
    """

    shape: tuple
    origin: tuple
    spacing: tuple
    periodic: tuple = None

    def __post_init__(self):
        shape = tuple(int(n) for n in np.atleast_1d(self.shape))
        origin = tuple(float(x) for x in np.atleast_1d(self.origin))
        spacing = tuple(float(h) for h in np.atleast_1d(self.spacing))
        periodic = self.periodic
        if periodic is None:
            periodic = (False,) * len(shape)
        periodic = tuple(bool(p) for p in np.atleast_1d(periodic))
        if not 1 <= len(shape) <= 3:
            raise ValueError(f"grid must have 1-3 axes, got {len(shape)}")
        if not (len(origin) == len(spacing) == len(periodic) == len(shape)):
            raise ValueError("shape/origin/spacing/periodic lengths disagree")
        if any(n < 4 for n in shape):
            raise ValueError(f"every axis needs >= 4 nodes, got {shape}")
        if any(h <= 0 for h in spacing):
            raise ValueError(f"spacings must be positive, got {spacing}")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "periodic", periodic)

    @property
    def ndim(self):
        return len(self.shape)

    @property
    def node_count(self):
        return int(np.prod(self.shape))

    @property
    def cell_volume(self):
        return float(np.prod(self.spacing))

    def axis_coords(self, axis):
        return self.origin[axis] + self.spacing[axis] * np.arange(self.shape[axis])

    def meshgrid(self):
        """Per-axis coordinate arrays of shape ``self.shape``."""
        return np.meshgrid(*[self.axis_coords(k) for k in range(self.ndim)], indexing="ij")

    def nodes(self):
        """All node label coordinates, shape (node_count, ndim)."""
        return np.stack([m.ravel() for m in self.meshgrid()], axis=-1)

    def nodes3(self):
        """Node labels padded with zeros to 3 components, shape (N, 3)."""
        pts = self.nodes()
        if pts.shape[1] == 3:
            return pts
        out = np.zeros((pts.shape[0], 3))
        out[:, : pts.shape[1]] = pts
        return out

    def refined(self, factor=2):
        """Grid with ``factor`` times the node density over the same extent."""
        shape = []
        for n, p in zip(self.shape, self.periodic):
            shape.append(n * factor if p else (n - 1) * factor + 1)
        spacing = tuple(h / factor for h in self.spacing)
        return replace(self, shape=tuple(shape), spacing=spacing)

    def interior_slices(self, rind):
        """Slices dropping ``rind`` nodes at each non-periodic boundary."""
        out = []
        for n, p in zip(self.shape, self.periodic):
            if p or rind == 0:
                out.append(slice(None))
            else:
                if 2 * rind >= n:
                    raise ValueError("rind exclusion leaves no interior nodes")
                out.append(slice(rind, n - rind))
        return tuple(out)


@dataclass(frozen=True)
class StencilSpec:
    """Finite-difference stencil: formal order 2 or 4, boundary policy.

    boundary: "one-sided" uses matching-order one-sided rows at non-periodic
    edges; periodic axes always wrap regardless of policy.
    """

    order: int = 2
    boundary: str = "one-sided"

    def __post_init__(self):
        if self.order not in (2, 4):
            raise ValueError("stencil order must be 2 or 4")
        if self.boundary not in ("one-sided", "periodic"):
            raise ValueError("boundary policy must be 'one-sided' or 'periodic'")


@dataclass
class Field:
    """Values sampled on a LabelGrid: scalar, vector(3), or tensor(3,3).

    Data layout is row-major over nodes with components innermost, i.e.
    array shape = grid.shape + component shape. Arrays are frozen after
    construction so fields can be shared across threads.
    """

    grid: LabelGrid
    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=float)
        comp = data.shape[self.grid.ndim:]
        if data.shape[: self.grid.ndim] != self.grid.shape or comp not in ((), (3,), (3, 3)):
            raise ValueError(
                f"data shape {data.shape} incompatible with grid {self.grid.shape}; "
                "components must be scalar, (3,), or (3,3)"
            )
        data.setflags(write=False)
        self.data = data

    @property
    def rank(self):
        comp = self.data.shape[self.grid.ndim:]
        return {(): "scalar", (3,): "vector", (3, 3): "tensor"}[comp]

    def component(self, *idx):
        return self.data[(Ellipsis,) + idx]


def _diff_along_axis0(f, h, order, wrap):
    """d/dx of f along its leading axis; one-sided edges unless wrap."""
    n = f.shape[0]
    if wrap:
        if order == 2:
            return (np.roll(f, -1, axis=0) - np.roll(f, 1, axis=0)) / (2 * h)
        return (
            np.roll(f, 2, axis=0) - 8 * np.roll(f, 1, axis=0)
            + 8 * np.roll(f, -1, axis=0) - np.roll(f, -2, axis=0)
        ) / (12 * h)
    # boundary rows are written in difference-from-pivot form (coefficient
    # sums vanish), so constants differentiate to exactly zero in floating
    # point, matching the interior central rows
    out = np.empty_like(f)
    if order == 2:
        if n < 3:
            raise ValueError("order-2 one-sided stencils need >= 3 nodes")
        out[1:-1] = (f[2:] - f[:-2]) / (2 * h)
        out[0] = (4 * (f[1] - f[0]) - (f[2] - f[0])) / (2 * h)
        out[-1] = (-4 * (f[-2] - f[-1]) + (f[-3] - f[-1])) / (2 * h)
        return out
    if n < 6:
        raise ValueError("order-4 stencils need >= 6 nodes per axis")
    out[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)
    out[0] = (48 * (f[1] - f[0]) - 36 * (f[2] - f[0])
              + 16 * (f[3] - f[0]) - 3 * (f[4] - f[0])) / (12 * h)
    out[1] = (-10 * (f[1] - f[0]) + 18 * (f[2] - f[0])
              - 6 * (f[3] - f[0]) + (f[4] - f[0])) / (12 * h)
    out[-2] = (10 * (f[-2] - f[-1]) - 18 * (f[-3] - f[-1])
               + 6 * (f[-4] - f[-1]) - (f[-5] - f[-1])) / (12 * h)
    out[-1] = (-48 * (f[-2] - f[-1]) + 36 * (f[-3] - f[-1])
               - 16 * (f[-4] - f[-1]) + 3 * (f[-5] - f[-1])) / (12 * h)
    return out


def differentiate(f, axis, spec=StencilSpec(), grid=None):
    """Partial derivative of a sampled field along one label axis.

    Accepts a Field (returns a Field) or a bare array plus ``grid``.
    Central differences of the stated order in the interior; one-sided rows
    of matching order at non-periodic boundaries; periodic axes wrap.
    """
    if isinstance(f, Field):
        out = differentiate(f.data, axis, spec, grid=f.grid)
        return Field(f.grid, out)
    if grid is None:
        raise ValueError("differentiate needs a grid when given a bare array")
    if not 0 <= axis < grid.ndim:
        raise ValueError(f"axis {axis} invalid for a {grid.ndim}-axis grid")
    if not np.all(np.isfinite(f)):
        raise ValueError("non-finite values in field")
    n = grid.shape[axis]
    if spec.order == 4 and n < 6:
        raise ValueError("order-4 stencils need >= 6 nodes per axis")
    wrap = grid.periodic[axis] or spec.boundary == "periodic"
    moved = np.moveaxis(np.asarray(f, dtype=float), axis, 0)
    return np.moveaxis(_diff_along_axis0(moved, grid.spacing[axis], spec.order, wrap), 0, axis)


def gradient(f, spec=StencilSpec(), grid=None):
    """Label-space gradient of a scalar field, components innermost.

    Missing axes of 1D/2D grids contribute zero derivative (fields are taken
    label-invariant along unrepresented axes), so the result always has 3
    components.
    """
    if isinstance(f, Field):
        return Field(f.grid, gradient(f.data, spec, grid=f.grid))
    out = np.zeros(f.shape + (3,))
    for k in range(grid.ndim):
        out[..., k] = differentiate(f, k, spec, grid=grid)
    return out


def divergence(vec, spec=StencilSpec(), grid=None):
    """Label-space divergence of a 3-component field (missing axes -> 0)."""
    if isinstance(vec, Field):
        return Field(vec.grid, divergence(vec.data, spec, grid=vec.grid))
    out = np.zeros(vec.shape[:-1])
    for k in range(grid.ndim):
        out += differentiate(vec[..., k], k, spec, grid=grid)
    return out


def curl(vec, spec=StencilSpec(), grid=None):
    """Label-space curl of a 3-component field (missing axes -> 0)."""
    if isinstance(vec, Field):
        return Field(vec.grid, curl(vec.data, spec, grid=vec.grid))

    def d(comp, axis):
        if axis >= grid.ndim:
            return np.zeros(vec.shape[:-1])
        return differentiate(vec[..., comp], axis, spec, grid=grid)

    return np.stack(
        [d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1)], axis=-1
    )


@dataclass
class ResidualSummary:
    """(Linf, L2, location of max) norm triple for a residual field.

    l2 is the root-mean-square over included nodes; ``rind`` records how many
    boundary nodes per non-periodic axis were excluded; ``excluded`` counts
    nodes dropped by rind or an explicit mask.
    """

    linf: float
    l2: float
    location: tuple
    rind: int = 0
    excluded: int = 0
    values: np.ndarray = field(default=None, repr=False, compare=False)

    def __float__(self):
        return float(self.linf)


def summarize_residual(values, grid, rind=0, mask=None, keep_values=False):
    """Reduce a per-node residual magnitude field to a norm triple.

    mask: optional boolean array marking nodes to include (before rind).
    """
    mag = np.abs(np.asarray(values, dtype=float))
    if mag.ndim > grid.ndim:  # vector residual: take per-node max magnitude
        mag = mag.reshape(grid.shape + (-1,)).max(axis=-1)
    include = np.ones(grid.shape, dtype=bool) if mask is None else np.array(mask, dtype=bool)
    if rind:
        rind_mask = np.zeros(grid.shape, dtype=bool)
        rind_mask[grid.interior_slices(rind)] = True
        include &= rind_mask
    excluded = int(include.size - np.count_nonzero(include))
    if not include.any():
        raise ValueError("residual summary has no included nodes")
    sel = np.where(include, mag, -np.inf)
    flat_arg = int(np.argmax(sel))
    idx = np.unravel_index(flat_arg, grid.shape)
    location = tuple(grid.origin[k] + idx[k] * grid.spacing[k] for k in range(grid.ndim))
    linf = float(mag[idx])
    l2 = float(np.sqrt(np.mean(mag[include] ** 2)))
    return ResidualSummary(
        linf=linf,
        l2=l2,
        location=location,
        rind=rind,
        excluded=excluded,
        values=mag if keep_values else None,
    )
