"""Curvilinear coordinate charts, metric coefficients, transformed equations
of motion, the transformed density equation, and the axisymmetric angular
invariant H = r^2 dtheta/dt.

A chart maps positions (x, y, z) to coordinates (rho1, rho2, rho3) and back.
The arc element in chart coordinates is

    ds^2 = N1 drho1^2 + N2 drho2^2 + N3 drho3^2
         + 2 n3 drho1 drho2 + 2 n1 drho2 drho3 + 2 n2 drho3 drho1,

with N_i the squared lengths of the coordinate tangents and n_i the cross
products of neighbouring tangents. For orthogonal charts (n_i = 0) the
equations of motion take the compact form

    2 dOmega/drho_i = 2 d(N_i drho_i/dt)/dt - sum_j (drho_j/dt)^2 dN_j/drho_i

and contracting with d(rho_i)/d(rho_j^0) gives the label (initial-coordinate)
form. The transformed density equation compares the initial-coordinate
Jacobian against sqrt(det Gram0 / det Gram), which for orthogonal charts is
sqrt(N1^0 N2^0 N3^0 / (N1 N2 N3)).

Shipped charts: cartesian (trivial), cylindrical (r, theta, z), polar
(spherical r, theta colatitude from +z, phi azimuth), and the confocal
elliptical chart whose coordinates are the ordered roots of

    x^2/(alpha^2 - e^2) + y^2/(beta^2 - e^2) + z^2/(gamma^2 - e^2) = 1,

with alpha > rho1 > beta > rho2 > gamma > rho3 > 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import StencilSpec, summarize_residual
from .flowmap import det3

__all__ = [
    "Chart",
    "MetricCoefficients",
    "chart_metrics",
    "orthogonality_residual",
    "curvilinear_eom_residual",
    "curvilinear_lagrangian_eom_residual",
    "curvilinear_density_residual",
    "svanberg_invariant",
    "cartesian_chart",
    "cylindrical_chart",
    "polar_chart",
    "elliptical_chart",
    "skewed_chart",
]


def _fd_vec(fn, pts, h=1e-6):
    """(... ,3,3) array out[i,j] = d fn_i / d pts_j by central differences."""
    pts = np.asarray(pts, dtype=float)
    out = np.empty(pts.shape[:-1] + (3, 3))
    for j in range(3):
        dp = np.zeros(3)
        dp[j] = h
        out[..., :, j] = (np.asarray(fn(pts + dp)) - np.asarray(fn(pts - dp))) / (2 * h)
    return out


@dataclass
class Chart:
    """Coordinate chart with forward/inverse maps and optional exact partials.

    forward:  (..., 3) positions  -> (..., 3) chart coordinates
    inverse:  (..., 3) chart coords -> (..., 3) positions
    position_partials: optional (rho) -> (..., 3, 3) with [i, j] = dx_i/drho_j
    metric_partials:   optional (rho) -> (..., 3, 3) with [i, j] = dN_i/drho_j
                       (orthogonal charts only)
    domain:  predicate over chart coords marking the validity region
    sample_domain: callable (rng, n) -> (n, 3) chart coords for round-trip checks
    """

    name: str
    forward: object
    inverse: object
    position_partials: object = None
    metric_partials: object = None
    orthogonal: bool = False
    domain: object = None
    sample_domain: object = None
    singular_margin: float = 1e-3

    def partials_at(self, rho, h=1e-6):
        if self.position_partials is not None:
            return np.asarray(self.position_partials(np.asarray(rho, float)), dtype=float)
        return _fd_vec(self.inverse, rho, h)

    def check_domain(self, rho):
        if self.domain is not None and not np.all(self.domain(np.asarray(rho, float))):
            raise ValueError(f"points outside the {self.name} chart validity domain")

    def roundtrip_residual(self, rng=None, n=10000):
        """Max |inverse(forward(x)) - x| over sampled domain points."""
        rng = np.random.default_rng(0) if rng is None else rng
        if self.sample_domain is None:
            raise ValueError("chart has no domain sampler")
        rho = self.sample_domain(rng, n)
        pos = self.inverse(rho)
        return float(np.max(np.abs(self.inverse(self.forward(pos)) - pos)))


@dataclass
class MetricCoefficients:
    """N = (N1, N2, N3) and cross terms n = (n1, n2, n3) per point.

    The Gram matrix [[N1, n3, n2], [n3, N2, n1], [n2, n1, N3]] is symmetric
    positive definite on the validity domain.
    """

    N: np.ndarray  # (..., 3)
    n: np.ndarray  # (..., 3)

    def gram(self):
        g = np.empty(self.N.shape[:-1] + (3, 3))
        g[..., 0, 0] = self.N[..., 0]
        g[..., 1, 1] = self.N[..., 1]
        g[..., 2, 2] = self.N[..., 2]
        g[..., 0, 1] = g[..., 1, 0] = self.n[..., 2]
        g[..., 1, 2] = g[..., 2, 1] = self.n[..., 0]
        g[..., 2, 0] = g[..., 0, 2] = self.n[..., 1]
        return g


def chart_metrics(chart, rho):
    """Metric coefficients from the position partials at chart points."""
    rho = np.asarray(rho, dtype=float)
    chart.check_domain(rho)
    P = chart.partials_at(rho)  # dx_i/drho_j
    N = np.einsum("...ij,...ij->...j", P, P)
    n = np.stack(
        [np.einsum("...i,...i->...", P[..., 1], P[..., 2]),
         np.einsum("...i,...i->...", P[..., 2], P[..., 0]),
         np.einsum("...i,...i->...", P[..., 0], P[..., 1])], axis=-1,
    )
    return MetricCoefficients(N, n)


def orthogonality_residual(chart, rho):
    """Two orthogonality measures at the given chart points.

    Returns (cross_residual, reciprocal_residual): the first is
    max |n_i| / sqrt(N_j N_k) (normalized cross metric terms); the second is
    max |N_i * Delta_i^2 - 1| where Delta_i^2 is the squared gradient of the
    i-th chart function in position space. Both vanish for orthogonal charts.
    """
    rho = np.asarray(rho, dtype=float)
    mc = chart_metrics(chart, rho)
    N, n = mc.N, mc.n
    denom = np.stack(
        [np.sqrt(N[..., 1] * N[..., 2]),
         np.sqrt(N[..., 2] * N[..., 0]),
         np.sqrt(N[..., 0] * N[..., 1])], axis=-1,
    )
    cross = float(np.max(np.abs(n) / denom))
    P = chart.partials_at(rho)
    Q = np.linalg.inv(P)  # drho_i/dx_j
    delta2 = np.einsum("...ij,...ij->...i", Q, Q)
    reciprocal = float(np.max(np.abs(N * delta2 - 1.0)))
    return cross, reciprocal


def _trajectory_chart_rates(m, chart, t, dt):
    """Chart coordinates and their time rates at the map's grid nodes.

    rho(t) = forward(x(a, t)); rates by the chain rule drho = (drho/dx) u.
    """
    labels = m.grid_labels()
    pos = m.positions(labels, t)
    vel = m.velocities(labels, t)
    rho = np.asarray(chart.forward(pos), dtype=float)
    chart.check_domain(rho)
    P = chart.partials_at(rho)
    Q = np.linalg.inv(P)
    rates = np.einsum("...ij,...j->...i", Q, vel)
    return labels, pos, rho, rates


def _metric_partials(chart, rho, h=1e-6):
    if chart.metric_partials is not None:
        return np.asarray(chart.metric_partials(np.asarray(rho, float)), dtype=float)
    out = np.empty(np.asarray(rho).shape[:-1] + (3, 3))
    for j in range(3):
        dp = np.zeros(3)
        dp[j] = h
        Np = chart_metrics(chart, rho + dp).N
        Nm = chart_metrics(chart, rho - dp).N
        out[..., :, j] = (Np - Nm) / (2 * h)
    return out


def _omega_chart_gradient(omega_fn, rho, omega_grad=None, h=1e-6):
    rho = np.asarray(rho, dtype=float)
    if omega_grad is not None:
        return np.asarray(omega_grad(rho), dtype=float)
    out = np.empty(rho.shape)
    for j in range(3):
        dp = np.zeros(3)
        dp[j] = h
        out[..., j] = (np.asarray(omega_fn(rho + dp)) - np.asarray(omega_fn(rho - dp))) / (2 * h)
    return out


def _momentum_terms(m, chart, t, dt):
    """Per-node d(N_i rho_i')/dt and the rho rates at time t.

    The time derivative is a centered difference of N_i rho_i' along each
    trajectory, which is exact for steady chart-rate motions and O(dt^2)
    otherwise; dt defaults to 1e-4 of the map's time scale.
    """
    def terms(tt):
        _, _, rho, rates = _trajectory_chart_rates(m, chart, tt, dt)
        N = chart_metrics(chart, rho).N
        return rho, rates, N * rates

    rho_m, rates_m, P_m = terms(t - dt)
    rho_0, rates_0, _ = terms(t)
    rho_p, rates_p, P_p = terms(t + dt)
    dPdt = (P_p - P_m) / (2 * dt)
    return rho_0, rates_0, dPdt


def curvilinear_eom_residual(m, chart, omega_fn, t, dt=None, rind=0,
                             omega_grad=None):
    """Linf of the orthogonal-chart momentum residuals at time t.

    omega_fn is the combined potential Omega as a function of chart
    coordinates (omega_grad: optional analytic chart-gradient; the finite
    difference fallback adds ~1e-10 of roundoff). Raises for non-orthogonal
    charts (the compact residual form only holds when the cross metric terms
    vanish).
    """
    if not chart.orthogonal:
        raise ValueError("curvilinear momentum residual needs an orthogonal chart")
    dt = dt if dt is not None else 1e-4 * m.timescale
    rho, rates, dPdt = _momentum_terms(m, chart, t, dt)
    dN = _metric_partials(chart, rho)
    dOm = _omega_chart_gradient(omega_fn, rho, omega_grad)
    out = []
    for i in range(3):
        res = 2 * dOm[..., i] - 2 * dPdt[..., i] + np.sum(rates ** 2 * dN[..., :, i], axis=-1)
        out.append(summarize_residual(res, m.grid, rind=rind))
    return tuple(out)


def curvilinear_lagrangian_eom_residual(m, chart, omega_fn, t, spec=StencilSpec(),
                                        dt=None, rho0="chart", rind=0,
                                        omega_grad=None):
    """Initial-coordinate (label) form of the chart momentum residuals.

    The three orthogonal-form residual vectors are contracted with the
    Jacobian d(rho_i)/d(rho_j^0), where rho^0 defaults to the chart
    coordinates at t=0 ("chart") or, with rho0="labels", the raw labels
    (useful for generalized-label maps, where it reduces to the Cartesian
    label-space momentum residual when the chart is trivial).
    """
    if not chart.orthogonal:
        raise ValueError("needs an orthogonal chart")
    dt = dt if dt is not None else 1e-4 * m.timescale
    grid = m.grid
    labels = m.grid_labels()
    rho, rates, dPdt = _momentum_terms(m, chart, t, dt)
    dN = _metric_partials(chart, rho)
    dOm = _omega_chart_gradient(omega_fn, rho, omega_grad)

    from .grids import differentiate

    def label_grad(f):
        out = np.zeros(grid.shape + (3,))
        for k in range(grid.ndim):
            out[..., k] = differentiate(f, k, spec, grid=grid)
        out[..., grid.ndim:] = 0.0
        return out

    # d(rho_i)/dlab_k and d(rho0_i)/dlab_k by grid differences
    drho_dlab = np.stack([label_grad(rho[..., i]) for i in range(3)], axis=-2)
    if isinstance(rho0, str) and rho0 == "labels":
        rho0_vals = labels
    else:
        rho0_vals = np.asarray(chart.forward(m.positions(labels, 0.0)), dtype=float)
    drho0_dlab = np.stack([label_grad(rho0_vals[..., i]) for i in range(3)], axis=-2)
    # label axes absent from 1D/2D grids: embedded flows are z-invariant with
    # the chart's third coordinate equal to z = c, so d(rho3)/dc = 1 there
    for i in range(grid.ndim, 3):
        drho_dlab[..., :, i] = 0.0
        drho0_dlab[..., :, i] = 0.0
        drho_dlab[..., 2, i] = 1.0
        drho0_dlab[..., 2, i] = 1.0
    # J[i, j] = d(rho_i)/d(rho0_j) = d(rho_i)/dlab_k * (d(rho0)/dlab)^-1[k, j]
    Jmat = np.einsum("...ik,...kj->...ij", drho_dlab, np.linalg.inv(drho0_dlab))
    # orthogonal-form residual pieces per chart axis i
    eom = np.stack(
        [2 * dPdt[..., i] - np.sum(rates ** 2 * dN[..., :, i], axis=-1) for i in range(3)],
        axis=-1,
    )
    dOm0 = np.einsum("...i,...ij->...j", dOm, Jmat)
    contracted = np.einsum("...i,...ij->...j", eom, Jmat)
    out = []
    for j in range(3):
        res = 2 * dOm0[..., j] - contracted[..., j]
        out.append(summarize_residual(res, grid, rind=rind))
    return tuple(out)


def curvilinear_density_residual(m, chart, t, spec=StencilSpec(), density_ratio=1.0,
                                 rind=1, orthogonal_form=None):
    """Mismatch of the transformed density equation at time t.

    Compares det(d rho_i / d rho_j^0) * (rho/rho0 ratio) against
    sqrt(det Gram0 / det Gram); for orthogonal charts the right side reduces
    to sqrt(N1^0 N2^0 N3^0 / (N1 N2 N3)) and ``orthogonal_form`` selects it
    (defaults to the chart's orthogonality flag).
    """
    grid = m.grid
    labels = m.grid_labels()
    rho_t = np.asarray(chart.forward(m.positions(labels, t)), dtype=float)
    rho_0 = np.asarray(chart.forward(m.positions(labels, 0.0)), dtype=float)
    chart.check_domain(rho_t)

    from .grids import differentiate

    def label_grad(f):
        out = np.zeros(grid.shape + (3,))
        for k in range(grid.ndim):
            out[..., k] = differentiate(f, k, spec, grid=grid)
        return out

    drho_dlab = np.stack([label_grad(rho_t[..., i]) for i in range(3)], axis=-2)
    drho0_dlab = np.stack([label_grad(rho_0[..., i]) for i in range(3)], axis=-2)
    # see curvilinear_lagrangian_eom_residual: absent label axes mean z = c
    for i in range(grid.ndim, 3):
        drho_dlab[..., :, i] = 0.0
        drho0_dlab[..., :, i] = 0.0
        drho_dlab[..., 2, i] = 1.0
        drho0_dlab[..., 2, i] = 1.0
    det_jac = det3(np.einsum("...ik,...kj->...ij", drho_dlab, np.linalg.inv(drho0_dlab)))
    use_orth = chart.orthogonal if orthogonal_form is None else orthogonal_form
    mc_t = chart_metrics(chart, rho_t)
    mc_0 = chart_metrics(chart, rho_0)
    if use_orth:
        rhs = np.sqrt(np.prod(mc_0.N, axis=-1) / np.prod(mc_t.N, axis=-1))
    else:
        rhs = np.sqrt(det3(mc_0.gram()) / det3(mc_t.gram()))
    res = det_jac * density_ratio - rhs
    return summarize_residual(res, grid, rind=rind)


def svanberg_invariant(m, times, rind=0):
    """Per-particle drift of H = r^2 dtheta/dt about the z axis.

    H = x v - y u is the angular momentum per unit mass; for axisymmetric
    potentials it is constant along each trajectory. Returns the drift
    summary over the given times against the t0 values.
    """
    times = np.asarray(times, dtype=float)
    if times.size < 2:
        raise ValueError("need at least two times")
    labels = m.grid_labels()

    def H(t):
        pos = m.positions(labels, t)
        vel = m.velocities(labels, t)
        return pos[..., 0] * vel[..., 1] - pos[..., 1] * vel[..., 0]

    H0 = H(times[0])
    per_time = {}
    worst = None
    for t in times[1:]:
        dev = np.abs(H(t) - H0)
        s = summarize_residual(dev, m.grid, rind=rind)
        per_time[float(t)] = s.linf
        if worst is None or s.linf > worst.linf:
            worst = s
    return {"drift": worst.linf, "per_time": per_time, "H_reference": H0,
            "location": worst.location}


# ---------------------------------------------------------------------------
# shipped charts


def cartesian_chart():
    ident = lambda p: np.asarray(p, dtype=float).copy()

    def partials(rho):
        F = np.zeros(np.asarray(rho).shape[:-1] + (3, 3))
        F[..., 0, 0] = F[..., 1, 1] = F[..., 2, 2] = 1.0
        return F

    def metric_partials(rho):
        return np.zeros(np.asarray(rho).shape[:-1] + (3, 3))

    def sample(rng, n):
        return rng.uniform(-1.0, 1.0, size=(n, 3))

    return Chart("cartesian", ident, ident, partials, metric_partials,
                 orthogonal=True, sample_domain=sample)


def cylindrical_chart(singular_margin=1e-3):
    """(r, theta, z): x = r cos theta, y = r sin theta. N = (1, r^2, 1)."""

    def forward(p):
        p = np.asarray(p, dtype=float)
        r = np.hypot(p[..., 0], p[..., 1])
        th = np.arctan2(p[..., 1], p[..., 0])
        return np.stack([r, th, p[..., 2]], axis=-1)

    def inverse(rho):
        rho = np.asarray(rho, dtype=float)
        return np.stack(
            [rho[..., 0] * np.cos(rho[..., 1]),
             rho[..., 0] * np.sin(rho[..., 1]),
             rho[..., 2]], axis=-1,
        )

    def partials(rho):
        rho = np.asarray(rho, dtype=float)
        r, th = rho[..., 0], rho[..., 1]
        F = np.zeros(rho.shape[:-1] + (3, 3))
        F[..., 0, 0] = np.cos(th)
        F[..., 0, 1] = -r * np.sin(th)
        F[..., 1, 0] = np.sin(th)
        F[..., 1, 1] = r * np.cos(th)
        F[..., 2, 2] = 1.0
        return F

    def metric_partials(rho):
        rho = np.asarray(rho, dtype=float)
        out = np.zeros(rho.shape[:-1] + (3, 3))
        out[..., 1, 0] = 2.0 * rho[..., 0]  # dN2/dr
        return out

    def domain(rho):
        return rho[..., 0] > singular_margin

    def sample(rng, n):
        r = rng.uniform(2 * singular_margin, 2.0, size=n)
        th = rng.uniform(-np.pi + 0.1, np.pi - 0.1, size=n)
        z = rng.uniform(-1.0, 1.0, size=n)
        return np.stack([r, th, z], axis=-1)

    return Chart("cylindrical", forward, inverse, partials, metric_partials,
                 orthogonal=True, domain=domain, sample_domain=sample,
                 singular_margin=singular_margin)


def polar_chart(singular_margin=1e-3):
    """Spherical (r, theta, phi): theta the colatitude from +z, phi the
    azimuth. N = (1, r^2, r^2 sin^2 theta)."""

    def forward(p):
        p = np.asarray(p, dtype=float)
        r = np.linalg.norm(p, axis=-1)
        th = np.arccos(np.clip(p[..., 2] / np.where(r == 0, 1.0, r), -1.0, 1.0))
        ph = np.arctan2(p[..., 1], p[..., 0])
        return np.stack([r, th, ph], axis=-1)

    def inverse(rho):
        rho = np.asarray(rho, dtype=float)
        r, th, ph = rho[..., 0], rho[..., 1], rho[..., 2]
        st = np.sin(th)
        return np.stack([r * st * np.cos(ph), r * st * np.sin(ph), r * np.cos(th)], axis=-1)

    def partials(rho):
        rho = np.asarray(rho, dtype=float)
        r, th, ph = rho[..., 0], rho[..., 1], rho[..., 2]
        st, ct = np.sin(th), np.cos(th)
        sp, cp = np.sin(ph), np.cos(ph)
        F = np.zeros(rho.shape[:-1] + (3, 3))
        F[..., 0, 0] = st * cp
        F[..., 0, 1] = r * ct * cp
        F[..., 0, 2] = -r * st * sp
        F[..., 1, 0] = st * sp
        F[..., 1, 1] = r * ct * sp
        F[..., 1, 2] = r * st * cp
        F[..., 2, 0] = ct
        F[..., 2, 1] = -r * st
        return F

    def metric_partials(rho):
        rho = np.asarray(rho, dtype=float)
        r, th = rho[..., 0], rho[..., 1]
        out = np.zeros(rho.shape[:-1] + (3, 3))
        out[..., 1, 0] = 2.0 * r                       # dN2/dr
        out[..., 2, 0] = 2.0 * r * np.sin(th) ** 2     # dN3/dr
        out[..., 2, 1] = 2.0 * r * r * np.sin(th) * np.cos(th)  # dN3/dtheta
        return out

    def domain(rho):
        rho = np.asarray(rho, dtype=float)
        return (rho[..., 0] > singular_margin) & (np.sin(rho[..., 1]) > singular_margin)

    def sample(rng, n):
        r = rng.uniform(0.1, 2.0, size=n)
        th = rng.uniform(0.2, np.pi - 0.2, size=n)
        ph = rng.uniform(-np.pi + 0.1, np.pi - 0.1, size=n)
        return np.stack([r, th, ph], axis=-1)

    return Chart("polar", forward, inverse, partials, metric_partials,
                 orthogonal=True, domain=domain, sample_domain=sample,
                 singular_margin=singular_margin)


def elliptical_chart(alpha=3.0, beta=2.0, gamma=1.0):
    """Confocal elliptical coordinates: the ordered roots in epsilon^2 of
    x^2/(alpha^2-e^2) + y^2/(beta^2-e^2) + z^2/(gamma^2-e^2) = 1.

    Inversion solves the cubic in s = e^2 by companion-matrix root
    extraction (with a bisection refinement near coincident roots) and sorts
    the roots into alpha > rho1 > beta > rho2 > gamma > rho3 > 0.
    """
    a2, b2, g2 = float(alpha) ** 2, float(beta) ** 2, float(gamma) ** 2
    if not (alpha > beta > gamma > 0):
        raise ValueError("need alpha > beta > gamma > 0")

    def inverse(rho):
        rho = np.asarray(rho, dtype=float)
        r1, r2, r3 = rho[..., 0] ** 2, rho[..., 1] ** 2, rho[..., 2] ** 2
        x2 = (a2 - r1) * (a2 - r2) * (a2 - r3) / ((a2 - b2) * (a2 - g2))
        y2 = (b2 - r1) * (b2 - r2) * (b2 - r3) / ((b2 - a2) * (b2 - g2))
        z2 = (g2 - r1) * (g2 - r2) * (g2 - r3) / ((g2 - a2) * (g2 - b2))
        return np.stack([np.sqrt(np.maximum(x2, 0.0)),
                         np.sqrt(np.maximum(y2, 0.0)),
                         np.sqrt(np.maximum(z2, 0.0))], axis=-1)

    def forward(p):
        p = np.asarray(p, dtype=float)
        flat = p.reshape(-1, 3)
        out = np.empty_like(flat)
        for i, (x, y, z) in enumerate(flat):
            # cubic in s: prod(c - s) - x^2(b2-s)(g2-s) - ... = 0, monic in s^3
            x2, y2, z2 = x * x, y * y, z * z
            c2 = -(a2 + b2 + g2) + x2 + y2 + z2
            c1 = (a2 * b2 + b2 * g2 + g2 * a2) - x2 * (b2 + g2) - y2 * (a2 + g2) - z2 * (a2 + b2)
            c0 = -(a2 * b2 * g2) + x2 * b2 * g2 + y2 * a2 * g2 + z2 * a2 * b2
            roots = np.roots([1.0, c2, c1, c0])
            roots = np.sort(np.real(roots))[::-1]
            # intervals (b2,a2), (g2,b2), (0,g2); refine by bisection if a
            # root drifted outside its bracket (near-coincident roots)
            brackets = [(b2, a2), (g2, b2), (0.0, g2)]
            poly = lambda s: ((s ** 3) + c2 * s ** 2 + c1 * s + c0)
            for k, (lo, hi) in enumerate(brackets):
                if not (lo - 1e-9 <= roots[k] <= hi + 1e-9):
                    flo, fhi = poly(lo + 1e-14), poly(hi - 1e-14)
                    ss_lo, ss_hi = lo + 1e-14, hi - 1e-14
                    for _ in range(200):
                        mid = 0.5 * (ss_lo + ss_hi)
                        fm = poly(mid)
                        if flo * fm <= 0:
                            ss_hi, fhi = mid, fm
                        else:
                            ss_lo, flo = mid, fm
                    roots[k] = 0.5 * (ss_lo + ss_hi)
            out[i] = np.sqrt(np.clip(roots, 0.0, None))
        return out.reshape(p.shape)

    def partials(rho):
        rho = np.asarray(rho, dtype=float)
        pos = inverse(rho)
        F = np.empty(rho.shape[:-1] + (3, 3))
        consts = (a2, b2, g2)
        for i in range(3):        # position component
            for j in range(3):    # chart coordinate
                F[..., i, j] = -pos[..., i] * rho[..., j] / (consts[i] - rho[..., j] ** 2)
        return F

    def domain(rho):
        rho = np.asarray(rho, dtype=float)
        return (
            (alpha > rho[..., 0]) & (rho[..., 0] > beta)
            & (beta > rho[..., 1]) & (rho[..., 1] > gamma)
            & (gamma > rho[..., 2]) & (rho[..., 2] > 0)
        )

    def sample(rng, n):
        pad = 0.05
        r1 = rng.uniform(beta + pad, alpha - pad, size=n)
        r2 = rng.uniform(gamma + pad, beta - pad, size=n)
        r3 = rng.uniform(pad, gamma - pad, size=n)
        return np.stack([r1, r2, r3], axis=-1)

    return Chart("elliptical", forward, inverse, partials, None,
                 orthogonal=True, domain=domain, sample_domain=sample)


def skewed_chart():
    """Deliberately non-orthogonal chart (rho1=x, rho2=x+y, rho3=z)."""

    def forward(p):
        p = np.asarray(p, dtype=float)
        return np.stack([p[..., 0], p[..., 0] + p[..., 1], p[..., 2]], axis=-1)

    def inverse(rho):
        rho = np.asarray(rho, dtype=float)
        return np.stack([rho[..., 0], rho[..., 1] - rho[..., 0], rho[..., 2]], axis=-1)

    def sample(rng, n):
        return rng.uniform(-1.0, 1.0, size=(n, 3))

    return Chart("skewed", forward, inverse, orthogonal=False, sample_domain=sample)
