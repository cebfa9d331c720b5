"""Heat extensions of measures and parabolic boundary behaviour.

The heat extension of a measure nu is u(x, t) = integral of
Gamma(t, y^-1 * x) d nu(y), where Gamma is the group heat kernel. Atomic
measures are extended exactly as weighted kernel sums. Densities are
extended with a scaled quadrature: substituting y = x * delta_sqrt(t)(eta^-1)
turns the integral into

    u(x, t) = integral gamma(eta) f(x * delta_sqrt(t)(eta^-1)) dm(eta),

so one fixed gamma-weighted grid in eta serves every (x, t). This keeps the
quadrature error independent of t, which matters when chasing limits along
shrinking parabolic regions.

Parabolic approach regions have a boundary vertex and an aperture: the
sampled points are vertex * delta_(beta * aperture * sqrt(t))(omega) for
beta in [0, 1) and unit directions omega, with t shrinking geometrically.
A limit trace records every sampled value; convergence requires the
oscillation across ALL placements over the trailing window to fall below
tolerance, mirroring the strong-derivative rule.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import MeasureError, NumericsError
from . import groups as G
from . import kernels as K
from .measures import (
    AtomicMeasure,
    BoundaryMeasure,
    DensityMeasure,
    MixtureMeasure,
    measure_ball,
    restrict_complement,
)

__all__ = [
    "HeatExtension",
    "ParabolicRegion",
    "LimitTrace",
    "heat_extend",
    "strip_of_definition",
    "uniform_ratio_check",
    "duality_check",
    "parabolic_limit",
    "limit_trace_to_csv",
    "dilation_commutation_check",
    "translation_commutation_check",
    "tail_vanishing_check",
]


# ---------------------------------------------------------------------------
# scaled quadrature grid (one per group, cached on the kernel profile)
# ---------------------------------------------------------------------------

def _panel_rule_1d(lo: float, hi: float, n_panels: int, order: int = 16):
    base_x, base_w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, n_panels + 1)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        nodes.append(0.5 * (b - a) * base_x + 0.5 * (a + b))
        weights.append(0.5 * (b - a) * base_w)
    return np.concatenate(nodes), np.concatenate(weights)


def _ext_grid(profile: K.KernelProfile):
    """Gamma-weighted eta-grid: returns (eta_inverse, gamma * quad_weight)."""
    cache = profile._caches
    if "ext_grid" in cache:
        return cache["ext_grid"]
    g = profile.group
    if g.label == "heisenberg:1":
        xz, wz = _panel_rule_1d(-7.5, 7.5, 3)
        xs, ws = _panel_rule_1d(-30.0, 30.0, 8)
        X, Y, S = np.meshgrid(xz, xz, xs, indexing="ij")
        eta = np.stack([X.ravel(), Y.ravel(), S.ravel()], axis=-1)
        w = (
            wz[:, None, None] * wz[None, :, None] * ws[None, None, :]
        ).ravel()
    else:
        per_axis = {1: (12, 16), 2: (6, 16), 3: (4, 16)}[g.total_dim]
        x1, w1 = _panel_rule_1d(-12.0, 12.0, per_axis[0], per_axis[1])
        mesh = np.meshgrid(*([x1] * g.total_dim), indexing="ij")
        eta = np.stack([m.ravel() for m in mesh], axis=-1)
        w = np.ones(eta.shape[0])
        for i in range(g.total_dim):
            shape = [1] * g.total_dim
            shape[i] = -1
            w = w * np.broadcast_to(
                w1.reshape(shape), [x1.size] * g.total_dim
            ).ravel()
    gamma_w = profile.gamma(eta) * w
    eta_inv = G.inverse(g, eta)
    cache["ext_grid"] = (eta_inv, gamma_w)
    return cache["ext_grid"]


# ---------------------------------------------------------------------------
# heat extension
# ---------------------------------------------------------------------------

class HeatExtension:
    """Callable u(x, t) extending a measure into positive time."""

    def __init__(self, mu: BoundaryMeasure, profile: K.KernelProfile):
        if mu.group.label != profile.group.label:
            raise MeasureError("measure and kernel profile use different groups")
        self.mu = mu
        self.profile = profile
        self.group = mu.group

    def __call__(self, x, t: float):
        x = np.asarray(x, dtype=float)
        if not (t > 0) or not math.isfinite(t):
            raise NumericsError(f"time must be positive, got {t}")
        scalar = x.ndim == 1
        pts = x[None, :] if scalar else x.reshape(-1, self.group.total_dim)
        out = self._eval(self.mu, pts, float(t))
        if scalar:
            return float(out[0])
        return out.reshape(x.shape[:-1])

    def _eval(self, mu, pts: np.ndarray, t: float) -> np.ndarray:
        g = self.group
        if isinstance(mu, AtomicMeasure):
            if mu.points.shape[0] == 0:
                return np.zeros(pts.shape[0])
            rel = G.mul(g, G.inverse(g, mu.points)[:, None, :], pts[None, :, :])
            vals = K.eval_kernel(self.profile, rel, t)
            return mu.weights @ vals
        if isinstance(mu, DensityMeasure):
            eta_inv, gamma_w = _ext_grid(self.profile)
            sqrt_t = math.sqrt(t)
            out = np.empty(pts.shape[0])
            for i, x in enumerate(pts):
                y = G.mul(g, x, G.dilate(g, sqrt_t, eta_inv))
                out[i] = float(gamma_w @ mu.density_at(y))
            return out
        if isinstance(mu, MixtureMeasure):
            total = np.zeros(pts.shape[0])
            for c in mu.components:
                total += self._eval(c, pts, t)
            return total
        raise MeasureError(f"unsupported measure type {type(mu).__name__}")


def heat_extend(mu: BoundaryMeasure, profile: K.KernelProfile) -> HeatExtension:
    return HeatExtension(mu, profile)


def strip_of_definition(mu: BoundaryMeasure, profile: K.KernelProfile) -> float:
    """Height of the time strip on which the extension integral converges.

    Fits a quadratic-exponential growth rate a from ball masses
    nu(B(0, R)) <= C exp(a R^2); the Gaussian upper envelope then gives
    convergence for t < 1 / (a * c0 * C_L^2). Compactly supported measures
    (a = 0) get an infinite strip.
    """
    g = mu.group
    if profile.certificate is None:
        K.certify_gaussian(profile)
    c0 = profile.certificate.c0
    radii = 2.0 ** np.arange(0, 7)
    masses = np.array(
        [measure_ball(mu, G.Ball(np.zeros(g.total_dim), float(R)))[0] for R in radii]
    )
    if masses[-1] <= 0.0:
        return math.inf
    # asymptotic growth rate: slope of log-mass against R^2 on the outermost
    # interval (zero once the support is exhausted)
    lo, hi = masses[-2], masses[-1]
    if hi <= max(lo, 1e-300):
        return math.inf
    rate = (math.log(hi) - math.log(max(lo, 1e-300))) / (
        radii[-1] ** 2 - radii[-2] ** 2
    )
    if rate <= 1e-12:
        return math.inf
    return 1.0 / (rate * c0 * g.quasi_triangle_const ** 2)


# ---------------------------------------------------------------------------
# parabolic regions and limit traces
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class ParabolicRegion:
    """Approach region {(x, t): d(vertex, x) < aperture * sqrt(t), t < t_max}."""

    vertex: np.ndarray
    aperture: float = 1.0
    t_max: float = 1.0

    def __post_init__(self):
        self.vertex = np.asarray(self.vertex, dtype=float)
        if not (self.aperture > 0) or not (self.t_max > 0):
            raise MeasureError("aperture and t_max must be positive")


@dataclass(eq=False)
class LimitTrace:
    """Sampled values of u along a shrinking parabolic region."""

    t_values: np.ndarray          # (n_steps,)
    betas: np.ndarray             # (n_placements,) fractional offsets
    direction_ids: np.ndarray     # (n_placements,)
    points: np.ndarray            # (n_placements, n_steps, dim)
    values: np.ndarray            # (n_placements, n_steps)
    estimate: float
    oscillation: float
    converged: bool
    aperture: float
    window: int
    tol: float
    vertex: np.ndarray = field(default=None)


def parabolic_limit(u: HeatExtension, region: ParabolicRegion,
                    betas=(0.0, 0.5, 0.9), n_directions: int = 8,
                    n_steps: int = 12, ratio: float = 0.25,
                    window: int = 5, tol: float = 1e-2) -> LimitTrace:
    """Follow u into the vertex along the region; returns the full trace.

    Placement (beta, omega) at time t sits at
    vertex * delta_(beta * aperture * sqrt(t))(omega); beta = 0 is the
    central axis and appears once.
    """
    g = u.group
    dirs = G.unit_directions(g, n_directions)
    placements = []
    for beta in betas:
        if beta < 0 or beta >= 1:
            raise MeasureError("beta offsets must lie in [0, 1)")
        if beta == 0.0:
            placements.append((0.0, 0))
        else:
            placements.extend((float(beta), k) for k in range(n_directions))
    t_vals = region.t_max * ratio ** np.arange(n_steps)
    n_p = len(placements)
    pts = np.empty((n_p, n_steps, g.total_dim))
    vals = np.empty((n_p, n_steps))
    for pi, (beta, k) in enumerate(placements):
        for ti, t in enumerate(t_vals):
            offset = G.dilate(g, max(beta * region.aperture * math.sqrt(t), 0.0),
                              dirs[k]) if beta > 0 else np.zeros(g.total_dim)
            x = G.mul(g, region.vertex, offset)
            pts[pi, ti] = x
            vals[pi, ti] = u(x, float(t))
    tail = vals[:, -window:]
    finite = np.all(np.isfinite(tail))
    est = float(tail.mean()) if finite else math.inf
    osc = float(tail.max() - tail.min()) if finite else math.inf
    converged = bool(finite and osc < tol * max(1.0, abs(est)))
    return LimitTrace(
        t_values=t_vals,
        betas=np.array([b for b, _ in placements]),
        direction_ids=np.array([k for _, k in placements]),
        points=pts,
        values=vals,
        estimate=est,
        oscillation=osc,
        converged=converged,
        aperture=region.aperture,
        window=window,
        tol=tol,
        vertex=region.vertex.copy(),
    )


def limit_trace_to_csv(trace: LimitTrace) -> str:
    """CSV with columns scale_t, beta, direction_id, x_coords, value."""
    buf = io.StringIO()
    buf.write("scale_t,beta,direction_id,x_coords,value\n")
    for pi in range(trace.values.shape[0]):
        for ti, t in enumerate(trace.t_values):
            coords = ";".join(repr(float(c)) for c in trace.points[pi, ti])
            buf.write(
                f"{float(t)!r},{float(trace.betas[pi])!r},"
                f"{int(trace.direction_ids[pi])},"
                f"{coords},{float(trace.values[pi, ti])!r}\n"
            )
    return buf.getvalue()


# ---------------------------------------------------------------------------
# consistency checks
# ---------------------------------------------------------------------------

def uniform_ratio_check(u: HeatExtension, region: ParabolicRegion,
                        target: float, t: float,
                        betas=(0.0, 0.5, 0.9), n_directions: int = 8) -> dict:
    """Max relative deviation of u from a target value across the region slice."""
    g = u.group
    dirs = G.unit_directions(g, n_directions)
    worst = 0.0
    for beta in betas:
        ks = [0] if beta == 0.0 else range(n_directions)
        for k in ks:
            offset = (
                G.dilate(g, beta * region.aperture * math.sqrt(t), dirs[k])
                if beta > 0
                else np.zeros(g.total_dim)
            )
            x = G.mul(g, region.vertex, offset)
            val = u(x, t)
            worst = max(worst, abs(val / target - 1.0))
    return {"t": t, "target": target, "max_rel_dev": worst}


def duality_check(mu: BoundaryMeasure, profile: K.KernelProfile,
                  x, t: float, cells_per_axis: int | None = None) -> dict:
    """Evaluate the extension by two independent quadratures and compare.

    Route A is the scaled eta-grid used by HeatExtension; route B integrates
    in the original variable with a midpoint rule over the support box
    (exact resummation for atomic parts). Agreement bounds the quadrature
    error without assuming either route is right.
    """
    g = mu.group
    x = np.asarray(x, dtype=float)
    route_a = HeatExtension(mu, profile)(x, t)

    def _route_b(m) -> float:
        if isinstance(m, AtomicMeasure):
            if m.points.shape[0] == 0:
                return 0.0
            rel = G.mul(g, G.inverse(g, m.points), x)
            return float(m.weights @ np.atleast_1d(K.eval_kernel(profile, rel, t)))
        if isinstance(m, DensityMeasure):
            cells = cells_per_axis or {1: 600, 2: 150, 3: 60}[g.total_dim]
            axes, hs = [], []
            for i in range(g.total_dim):
                lo, hi = m.support_box[i]
                h = (hi - lo) / cells
                axes.append(lo + h * (np.arange(cells) + 0.5))
                hs.append(h)
            mesh = np.meshgrid(*axes, indexing="ij")
            ys = np.stack([m_.ravel() for m_ in mesh], axis=-1)
            fv = m.density_at(ys)
            kv = K.eval_kernel(profile, G.mul(g, G.inverse(g, ys), x), t)
            return float((fv * kv).sum() * np.prod(hs))
        if isinstance(m, MixtureMeasure):
            return sum(_route_b(c) for c in m.components)
        raise MeasureError(f"unsupported measure type {type(m).__name__}")

    route_b = _route_b(mu)
    denom = max(abs(route_a), abs(route_b), 1e-300)
    return {
        "scaled_grid": route_a,
        "direct_grid": route_b,
        "rel_diff": abs(route_a - route_b) / denom,
    }


def dilation_commutation_check(mu: BoundaryMeasure, profile: K.KernelProfile,
                               r: float, x, t: float) -> dict:
    """Extension of the dilated measure vs dilated evaluation of the original.

    The exact identity is u_(nu_r)(x, t) = u_nu(delta_r x, r^2 t).
    """
    from .measures import dilate_measure

    g = mu.group
    x = np.asarray(x, dtype=float)
    lhs = HeatExtension(dilate_measure(mu, r), profile)(x, t)
    rhs = HeatExtension(mu, profile)(G.dilate(g, r, x), r ** 2 * t)
    denom = max(abs(lhs), abs(rhs), 1e-300)
    return {"dilated_measure": lhs, "dilated_point": rhs,
            "rel_diff": abs(lhs - rhs) / denom}


def translation_commutation_check(mu: BoundaryMeasure, profile: K.KernelProfile,
                                  x0, x, t: float) -> dict:
    """Extension of the translated measure vs translated evaluation.

    The exact identity is u_(tau_x0 nu)(x, t) = u_nu(x0 * x, t).
    """
    from .measures import translate_measure

    g = mu.group
    x = np.asarray(x, dtype=float)
    lhs = HeatExtension(translate_measure(mu, x0), profile)(x, t)
    rhs = HeatExtension(mu, profile)(G.mul(g, np.asarray(x0, float), x), t)
    denom = max(abs(lhs), abs(rhs), 1e-300)
    return {"translated_measure": lhs, "translated_point": rhs,
            "rel_diff": abs(lhs - rhs) / denom}


def tail_vanishing_check(mu: BoundaryMeasure, profile: K.KernelProfile,
                         radius: float, t_schedule=None,
                         n_directions: int = 6, n_radial: int = 3,
                         tol: float = 1e-8) -> dict:
    """Heat extension of the measure outside a ball, watched near the center.

    The part of the measure at gauge distance >= radius contributes
    uniformly vanishing heat as t -> 0 on the concentric ball of radius
    radius / (2 C_L); this quantifies how much a far tail can leak into
    local boundary behaviour. Reports the max over an inner sample grid for
    each time and whether the smallest time is below tolerance.
    """
    g = mu.group
    if t_schedule is None:
        t_schedule = 4.0 ** -np.arange(0, 8)
    t_schedule = np.asarray(t_schedule, dtype=float)
    outer = restrict_complement(mu, G.Ball(np.zeros(g.total_dim), radius))
    u = HeatExtension(outer, profile)
    inner_r = radius / (2.0 * g.quasi_triangle_const)
    dirs = G.unit_directions(g, n_directions)
    pts = [np.zeros(g.total_dim)]
    for frac in np.linspace(0.3, 0.95, n_radial):
        for d in dirs:
            pts.append(G.dilate(g, frac * inner_r, d))
    pts = np.array(pts)
    values = np.array([max(u(p, float(t)) for p in pts) for t in t_schedule])
    slack = 1e-12 * max(1.0, float(values.max(initial=0.0)))
    vanishes = bool(values[-1] <= tol * max(1.0, mu.total_mass))
    monotone = bool(np.all(np.diff(values) <= slack)) or vanishes
    return {
        "radius": radius,
        "inner_radius": inner_r,
        "t_schedule": t_schedule,
        "sup_values": values,
        "outer_mass": outer.total_mass,
        "vanishes": vanishes,
        "monotone": monotone,
    }
