"""Nonnegative boundary measures and the strong-derivative estimator.

Measures come in three variants: finite atomic combinations, densities against
Haar measure supported on a finite coordinate box, and finite mixtures. All
variants support ball mass, group dilation nu_r(E) = r^(-Q) nu(delta_r(E)),
group translation (tau_x0 nu)(E) = nu(x0 * E), and restriction to a ball.

Group translation is affine in exponential coordinates, so translated density
supports are tracked exactly: the support box maps to the bounding box of its
translated corners while the density itself is clipped to the original
support. Densities are validated at construction (finite, nonnegative, finite
total mass).

The strong derivative at a point is estimated over a finite ball family along
a shrinking radius schedule; the trace records all quotients, and convergence
means the oscillation over the trailing window across ALL family members is
below tolerance (ties count as not converged).
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GroupError, MeasureError
from . import groups as G

__all__ = [
    "BoundaryMeasure",
    "AtomicMeasure",
    "DensityMeasure",
    "MixtureMeasure",
    "DerivativeTrace",
    "measure_ball",
    "dilate_measure",
    "translate_measure",
    "restrict",
    "restrict_complement",
    "strong_derivative",
    "default_ball_family",
    "trace_to_csv",
]

_DEFAULT_CELLS = {1: 512, 2: 128, 3: 48}


class BoundaryMeasure:
    """Base class for nonnegative measures on a stratified group."""

    def __init__(self, group: G.GroupDescriptor):
        self.group = group

    @property
    def total_mass(self) -> float:
        raise NotImplementedError

    def _ball_mass(self, ball: G.Ball):
        raise NotImplementedError


class AtomicMeasure(BoundaryMeasure):
    """Finite sum of point masses: sum_i w_i delta_(p_i), w_i >= 0."""

    def __init__(self, group: G.GroupDescriptor, points, weights):
        super().__init__(group)
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        w = np.atleast_1d(np.asarray(weights, dtype=float))
        if pts.shape[0] != w.shape[0]:
            raise MeasureError("points and weights must have matching length")
        if pts.size and pts.shape[1] != group.total_dim:
            raise MeasureError(
                f"points have dimension {pts.shape[1]}, group needs {group.total_dim}"
            )
        if pts.size == 0:
            pts = pts.reshape(0, group.total_dim)
        if not np.all(np.isfinite(pts)) or not np.all(np.isfinite(w)):
            raise MeasureError("atoms must be finite")
        if np.any(w < 0):
            raise MeasureError("atomic weights must be nonnegative")
        self.points = pts
        self.weights = w

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def _ball_mass(self, ball: G.Ball):
        if self.points.shape[0] == 0:
            return 0.0, 0.0
        mask = G.ball_contains(self.group, ball, self.points)
        return float(self.weights[mask].sum()), 0.0


class DensityMeasure(BoundaryMeasure):
    """Absolutely continuous measure f dm supported on a finite box."""

    def __init__(self, group: G.GroupDescriptor, density, support_box,
                 cells_per_axis: int | None = None, label: str = "density"):
        super().__init__(group)
        box = np.asarray(support_box, dtype=float)
        if box.shape != (group.total_dim, 2):
            raise MeasureError(
                f"support_box must have shape ({group.total_dim}, 2)"
            )
        if not np.all(np.isfinite(box)) or np.any(box[:, 1] < box[:, 0]):
            raise MeasureError("support_box must be finite with lo <= hi")
        self.density = density
        self.support_box = box
        self.cells_per_axis = cells_per_axis or _DEFAULT_CELLS[group.total_dim]
        self.label = label
        self._mass = self._validate()

    def density_at(self, pts: np.ndarray) -> np.ndarray:
        """Effective density: f clipped to the support box."""
        pts = np.asarray(pts, dtype=float)
        vals = np.asarray(self.density(pts), dtype=float)
        inside = np.ones(pts.shape[:-1], dtype=bool)
        for i in range(self.group.total_dim):
            inside &= (pts[..., i] >= self.support_box[i, 0]) & (
                pts[..., i] <= self.support_box[i, 1]
            )
        return np.where(inside, vals, 0.0)

    def _grid(self, box: np.ndarray):
        n = self.group.total_dim
        cells = self.cells_per_axis
        axes, steps = [], []
        for i in range(n):
            lo, hi = box[i]
            h = (hi - lo) / cells
            axes.append(lo + h * (np.arange(cells) + 0.5))
            steps.append(h)
        mesh = np.meshgrid(*axes, indexing="ij")
        centers = np.stack([m.ravel() for m in mesh], axis=-1)
        return centers, np.prod(steps), np.array(steps)

    def _validate(self) -> float:
        centers, vol, _ = self._grid(self.support_box)
        vals = np.asarray(self.density(centers), dtype=float)
        if not np.all(np.isfinite(vals)):
            bad = centers[~np.isfinite(vals)][0]
            raise MeasureError(f"density non-finite at {bad.tolist()}")
        if np.any(vals < -1e-12):
            bad = centers[vals < -1e-12][0]
            raise MeasureError(f"density negative at {bad.tolist()}")
        mass = float(vals.clip(min=0.0).sum() * vol)
        if not math.isfinite(mass):
            raise MeasureError("density has non-finite total mass")
        return mass

    @property
    def total_mass(self) -> float:
        return self._mass

    def _ball_mass(self, ball: G.Ball):
        g = self.group
        bb = G.ball_bounding_box(g, ball)
        lo = np.maximum(bb[:, 0], self.support_box[:, 0])
        hi = np.minimum(bb[:, 1], self.support_box[:, 1])
        if np.any(hi <= lo):
            return 0.0, 0.0
        box = np.stack([lo, hi], axis=1)
        centers, vol, steps = self._grid(box)
        n = g.total_dim
        inside_c = G.ball_contains(g, ball, centers)
        # boundary shell: cells whose corners disagree with each other
        offs = np.stack(
            np.meshgrid(*[np.array([-0.5, 0.5])] * n, indexing="ij"), axis=-1
        ).reshape(-1, n) * steps
        corner_in = np.stack(
            [G.ball_contains(g, ball, centers + o) for o in offs], axis=0
        )
        all_in = corner_in.all(axis=0) & inside_c
        any_in = corner_in.any(axis=0) | inside_c
        shell = any_in & ~all_in
        interior_val = 0.0
        if np.any(all_in):
            interior_val = float(
                self.density_at(centers[all_in]).sum() * vol
            )
        shell_val, shell_err = 0.0, 0.0
        if np.any(shell):
            sub_off = np.stack(
                np.meshgrid(*[np.array([-0.25, 0.25])] * n, indexing="ij"),
                axis=-1,
            ).reshape(-1, n) * steps
            sub_vol = vol / 2 ** n
            sc = centers[shell]
            for o in sub_off:
                pts = sc + o
                m = G.ball_contains(g, ball, pts)
                fv = self.density_at(pts)
                shell_val += float(fv[m].sum() * sub_vol)
                # residual uncertainty: subcells still cut by the sphere
                near = np.abs(
                    np.asarray(G.dist(g, pts, ball.center)) - ball.radius
                ) < np.linalg.norm(steps) / 2.0
                shell_err += float(np.abs(fv[near]).sum() * sub_vol * 0.5)
        return interior_val + shell_val, shell_err


class MixtureMeasure(BoundaryMeasure):
    """Finite sum of component measures."""

    def __init__(self, group: G.GroupDescriptor, components):
        super().__init__(group)
        comps = tuple(components)
        if not comps:
            raise MeasureError("mixture needs at least one component")
        for c in comps:
            if c.group.label != group.label:
                raise MeasureError("mixture components must share the group")
        self.components = comps

    @property
    def total_mass(self) -> float:
        return float(sum(c.total_mass for c in self.components))

    def _ball_mass(self, ball: G.Ball):
        vals, errs = zip(*(c._ball_mass(ball) for c in self.components))
        return float(sum(vals)), float(sum(errs))


# ---------------------------------------------------------------------------
# measure operations
# ---------------------------------------------------------------------------

def measure_ball(mu: BoundaryMeasure, ball: G.Ball):
    """Mass of a quasi-metric ball; returns (value, error_estimate)."""
    return mu._ball_mass(ball)


def dilate_measure(mu: BoundaryMeasure, r: float) -> BoundaryMeasure:
    """nu_r(E) = r^(-Q) nu(delta_r(E)).

    Atoms move by delta_(1/r) with weights scaled by r^(-Q); a density f
    becomes f o delta_r on the box delta_(1/r)(box).
    """
    if not (r > 0) or not math.isfinite(r):
        raise GroupError(f"dilation factor must be positive, got {r}")
    g = mu.group
    if isinstance(mu, AtomicMeasure):
        return AtomicMeasure(
            g,
            G.dilate(g, 1.0 / r, mu.points),
            mu.weights * r ** (-g.hom_dim),
        )
    if isinstance(mu, DensityMeasure):
        inner = mu.density_at
        box = np.stack(
            [
                G.dilate(g, 1.0 / r, mu.support_box[:, 0]),
                G.dilate(g, 1.0 / r, mu.support_box[:, 1]),
            ],
            axis=1,
        )
        return DensityMeasure(
            g,
            lambda pts, _f=inner, _r=r: _f(G.dilate(g, _r, pts)),
            box,
            cells_per_axis=mu.cells_per_axis,
            label=f"dilate({mu.label}, r={r!r})",
        )
    if isinstance(mu, MixtureMeasure):
        return MixtureMeasure(g, [dilate_measure(c, r) for c in mu.components])
    raise MeasureError(f"unsupported measure type {type(mu).__name__}")


def translate_measure(mu: BoundaryMeasure, x0) -> BoundaryMeasure:
    """(tau_x0 nu)(E) = nu(x0 * E); atoms move by p -> x0^-1 * p."""
    g = mu.group
    x0 = np.asarray(x0, dtype=float)
    if np.all(x0 == 0.0):
        return mu
    if isinstance(mu, AtomicMeasure):
        return AtomicMeasure(
            g, G.mul(g, G.inverse(g, x0), mu.points), mu.weights.copy()
        )
    if isinstance(mu, DensityMeasure):
        inner = mu.density_at
        n = g.total_dim
        corners = np.stack(
            np.meshgrid(*[mu.support_box[i] for i in range(n)], indexing="ij"),
            axis=-1,
        ).reshape(-1, n)
        moved = G.mul(g, G.inverse(g, x0), corners)
        box = np.stack([moved.min(axis=0), moved.max(axis=0)], axis=1)
        return DensityMeasure(
            g,
            lambda pts, _f=inner, _x0=x0: _f(G.mul(g, _x0, pts)),
            box,
            cells_per_axis=mu.cells_per_axis,
            label=f"translate({mu.label})",
        )
    if isinstance(mu, MixtureMeasure):
        return MixtureMeasure(g, [translate_measure(c, x0) for c in mu.components])
    raise MeasureError(f"unsupported measure type {type(mu).__name__}")


def restrict(mu: BoundaryMeasure, ball: G.Ball) -> BoundaryMeasure:
    """Restriction of the measure to a ball."""
    g = mu.group
    if isinstance(mu, AtomicMeasure):
        mask = G.ball_contains(g, ball, mu.points) if mu.points.size else np.zeros(0, bool)
        return AtomicMeasure(g, mu.points[mask], mu.weights[mask])
    if isinstance(mu, DensityMeasure):
        inner = mu.density_at
        bb = G.ball_bounding_box(g, ball)
        lo = np.maximum(bb[:, 0], mu.support_box[:, 0])
        hi = np.minimum(bb[:, 1], mu.support_box[:, 1])
        if np.any(hi <= lo):
            return AtomicMeasure(g, np.zeros((0, g.total_dim)), np.zeros(0))
        center, radius = ball.center.copy(), ball.radius

        def clipped(pts, _f=inner):
            m = np.asarray(G.dist(g, pts, center)) < radius
            return np.where(m, _f(pts), 0.0)

        return DensityMeasure(
            g,
            clipped,
            np.stack([lo, hi], axis=1),
            cells_per_axis=mu.cells_per_axis,
            label=f"restrict({mu.label})",
        )
    if isinstance(mu, MixtureMeasure):
        return MixtureMeasure(g, [restrict(c, ball) for c in mu.components])
    raise MeasureError(f"unsupported measure type {type(mu).__name__}")


def restrict_complement(mu: BoundaryMeasure, ball: G.Ball) -> BoundaryMeasure:
    """Restriction to the complement of a ball (no cancellation in tails)."""
    g = mu.group
    if isinstance(mu, AtomicMeasure):
        if mu.points.size == 0:
            return mu
        mask = ~G.ball_contains(g, ball, mu.points)
        return AtomicMeasure(g, mu.points[mask], mu.weights[mask])
    if isinstance(mu, DensityMeasure):
        inner = mu.density_at
        center, radius = ball.center.copy(), ball.radius

        def clipped(pts, _f=inner):
            m = np.asarray(G.dist(g, pts, center)) >= radius
            return np.where(m, _f(pts), 0.0)

        return DensityMeasure(
            g,
            clipped,
            mu.support_box.copy(),
            cells_per_axis=mu.cells_per_axis,
            label=f"restrict_complement({mu.label})",
        )
    if isinstance(mu, MixtureMeasure):
        return MixtureMeasure(g, [restrict_complement(c, ball) for c in mu.components])
    raise MeasureError(f"unsupported measure type {type(mu).__name__}")


# ---------------------------------------------------------------------------
# strong derivative
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class DerivativeTrace:
    """Quotient trace mu(x0 * delta_r(B)) / m(x0 * delta_r(B)) over a family.

    ``converged`` means the oscillation of ALL family quotients over the
    trailing window is strictly below tol * max(1, |estimate|).
    """

    ball_ids: tuple
    radii: np.ndarray
    quotients: np.ndarray  # shape (n_balls, n_radii)
    estimate: float
    oscillation: float
    converged: bool
    window: int
    tol: float
    vertex: np.ndarray = field(default=None)


def default_ball_family(g: G.GroupDescriptor) -> list[G.Ball]:
    """Centered unit ball plus eight off-center balls at varied scales."""
    dirs = G.unit_directions(g, 8)
    centers_d = [0.3, 0.6, 0.9, 1.2, 0.5, 0.8, 1.1, 0.4]
    radii = [0.5, 0.75, 1.25, 0.6, 1.0, 0.9, 0.7, 1.1]
    fam = [G.Ball(np.zeros(g.total_dim), 1.0)]
    for k in range(8):
        fam.append(G.Ball(G.dilate(g, centers_d[k], dirs[k]), radii[k]))
    return fam


def default_radii(n: int = 16, start: float = 1.0, ratio: float = 0.5) -> np.ndarray:
    return start * ratio ** np.arange(n)


def strong_derivative(mu: BoundaryMeasure, x0, ball_family=None, radii=None,
                      window: int = 5, tol: float = 1e-2) -> DerivativeTrace:
    """Estimate the strong derivative of mu at x0 over a finite ball family.

    Quotients are mu(x0 * delta_r(B)) / m(x0 * delta_r(B)) for each family
    ball B along the radius schedule. The estimate is the mean over the
    trailing window; the universal-quantifier side is approximated by the
    family, which the trace discloses.
    """
    g = mu.group
    x0 = np.asarray(x0, dtype=float)
    fam = list(ball_family) if ball_family is not None else default_ball_family(g)
    if not fam:
        raise MeasureError("ball family must be non-empty")
    if not any(
        np.all(b.center == 0.0) and b.radius == 1.0 for b in fam
    ):
        raise MeasureError("ball family must include the centered unit ball")
    r = np.asarray(radii if radii is not None else default_radii(), dtype=float)
    if r.size < window or np.any(np.diff(r) >= 0):
        raise MeasureError("radius schedule must be decreasing, >= window long")
    mu0 = translate_measure(mu, x0)
    quot = np.empty((len(fam), r.size))
    for bi, ball in enumerate(fam):
        for ri, rr in enumerate(r):
            small = G.dilate_ball(g, rr, ball)
            val, _ = measure_ball(mu0, small)
            quot[bi, ri] = val / G.ball_volume(g, small.radius)
    tail = quot[:, -window:]
    finite = np.all(np.isfinite(tail))
    est = float(tail.mean()) if finite else math.inf
    osc = float(tail.max() - tail.min()) if finite else math.inf
    converged = bool(finite and osc < tol * max(1.0, abs(est)))
    return DerivativeTrace(
        ball_ids=tuple(f"ball{i}" for i in range(len(fam))),
        radii=r,
        quotients=quot,
        estimate=est,
        oscillation=osc,
        converged=converged,
        window=window,
        tol=tol,
        vertex=x0,
    )


def trace_to_csv(trace: DerivativeTrace) -> str:
    """CSV serialization with columns ball_id, r, quotient."""
    buf = io.StringIO()
    buf.write("ball_id,r,quotient\n")
    for bi, bid in enumerate(trace.ball_ids):
        for ri, rr in enumerate(trace.radii):
            buf.write(f"{bid},{float(rr)!r},{float(trace.quotients[bi, ri])!r}\n")
    return buf.getvalue()
