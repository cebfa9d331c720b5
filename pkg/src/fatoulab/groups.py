"""Stratified (Carnot) group descriptors and their homogeneous geometry.

A stratified group is described in exponential coordinates of the first and
second layer: group multiplication, inverse, anisotropic dilations delta_r
(scaling layer j by r^j), a homogeneous quasi-norm, Lebesgue measure as Haar
measure, and the homogeneous dimension Q (so m(delta_r E) = r^Q m(E)).

Shipped instances:

* ``euclidean_group(n)`` for n in {1, 2, 3}: abelian, step 1, Euclidean norm,
  Q = n.
* ``heisenberg_group()``: the first Heisenberg group, coordinates (x, y, s)
  with product s'' = s + s' + 2(y x' - x y'), dilations (r x, r y, r^2 s),
  Koranyi gauge (|z|^4 + 16 s^2)^(1/4), Q = 4.

The quasi-triangle constant of the gauge is certified numerically at
construction (large-sample maximization of d(x*y)/(d(x)+d(y)) plus local
refinement); it is NOT assumed to be 1. The unit-sphere surface rule used by
``polar_integrate`` is precomputed per group and reproduces Cartesian
quadrature on smooth integrands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from .errors import GroupError, NumericsError

__all__ = [
    "GroupDescriptor",
    "GroupPoint",
    "Ball",
    "euclidean_group",
    "heisenberg_group",
    "get_group",
    "mul",
    "inverse",
    "dilate",
    "norm",
    "dist",
    "ball_volume",
    "ball_contains",
    "ball_bounding_box",
    "dilate_ball",
    "translate_ball",
    "surface_rule",
    "polar_integrate",
    "unit_directions",
    "certify_bilipschitz",
]


@dataclass(frozen=True)
class GroupDescriptor:
    """Immutable description of a stratified group instance.

    ``quasi_triangle_const`` is the certified constant C with
    d(x*y) <= C (d(x) + d(y)); ``certification`` records how it was obtained.
    """

    label: str
    step: int
    layer_dims: tuple[int, ...]
    total_dim: int
    hom_dim: int
    layer_exponents: tuple[int, ...]
    quasi_triangle_const: float
    unit_ball_volume: float
    certification: dict = field(compare=False, repr=False)
    mul_fn: Callable = field(compare=False, repr=False)
    inv_fn: Callable = field(compare=False, repr=False)
    norm_fn: Callable = field(compare=False, repr=False)
    n_horizontal: int = 0

    def __post_init__(self):
        if self.total_dim != sum(self.layer_dims):
            raise GroupError("layer_dims inconsistent with total_dim")
        q = sum((j + 1) * d for j, d in enumerate(self.layer_dims))
        if q != self.hom_dim:
            raise GroupError("hom_dim inconsistent with layer_dims")


@dataclass(frozen=True, eq=False)
class GroupPoint:
    """A single group element: coordinates plus the group it belongs to."""

    coords: np.ndarray
    group: GroupDescriptor

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        if c.shape != (self.group.total_dim,):
            raise GroupError(
                f"point has shape {c.shape}, expected ({self.group.total_dim},)"
            )
        object.__setattr__(self, "coords", c)


@dataclass(frozen=True, eq=False)
class Ball:
    """Quasi-metric ball B(center, radius) = {y : d(center, y) < radius}."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise GroupError(f"ball radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))


def _coords(x) -> np.ndarray:
    if isinstance(x, GroupPoint):
        return x.coords
    return np.asarray(x, dtype=float)


# ---------------------------------------------------------------------------
# group operations (vectorized over leading axes)
# ---------------------------------------------------------------------------

def mul(g: GroupDescriptor, x, y) -> np.ndarray:
    """Group product x * y, broadcasting over leading axes."""
    return g.mul_fn(_coords(x), _coords(y))


def inverse(g: GroupDescriptor, x) -> np.ndarray:
    """Group inverse x^(-1)."""
    return g.inv_fn(_coords(x))


def dilate(g: GroupDescriptor, r: float, x) -> np.ndarray:
    """Anisotropic dilation delta_r(x); layer j scales by r^j. Requires r > 0."""
    if not (r > 0) or not math.isfinite(r):
        raise GroupError(f"dilation factor must be positive and finite, got {r}")
    scale = np.array([r ** e for e in g.layer_exponents])
    return _coords(x) * scale


def norm(g: GroupDescriptor, x) -> np.ndarray | float:
    """Homogeneous quasi-norm d(x); vectorized over leading axes."""
    return g.norm_fn(_coords(x))


def dist(g: GroupDescriptor, x, y) -> np.ndarray | float:
    """Quasi-distance d(x, y) = d(y^(-1) * x)."""
    return g.norm_fn(g.mul_fn(g.inv_fn(_coords(y)), _coords(x)))


def ball_volume(g: GroupDescriptor, radius: float) -> float:
    """Haar measure of a quasi-metric ball: m(B(x, r)) = m(B(0,1)) r^Q."""
    if radius <= 0:
        raise GroupError(f"ball radius must be positive, got {radius}")
    return g.unit_ball_volume * radius ** g.hom_dim


def ball_contains(g: GroupDescriptor, ball: Ball, pts) -> np.ndarray:
    """Boolean membership mask for points (strict inequality)."""
    return np.asarray(dist(g, pts, ball.center)) < ball.radius


def dilate_ball(g: GroupDescriptor, r: float, ball: Ball) -> Ball:
    """delta_r(B(c, s)) = B(delta_r(c), r s)."""
    return Ball(dilate(g, r, ball.center), r * ball.radius)


def translate_ball(g: GroupDescriptor, x0, ball: Ball) -> Ball:
    """x0 * B(c, s) = B(x0 * c, s)."""
    return Ball(mul(g, x0, ball.center), ball.radius)


def _unit_box(g: GroupDescriptor) -> np.ndarray:
    """Axis-aligned box containing B(0,1), rows (lo, hi)."""
    if g.label.startswith("euclidean"):
        return np.array([[-1.0, 1.0]] * g.total_dim)
    if g.label == "heisenberg:1":
        return np.array([[-1.0, 1.0], [-1.0, 1.0], [-0.25, 0.25]])
    raise GroupError(f"no bounding box rule for group {g.label}")


def ball_bounding_box(g: GroupDescriptor, ball: Ball) -> np.ndarray:
    """Axis-aligned bounding box of a ball, shape (N, 2).

    Left translation is affine in exponential coordinates, so the box is the
    hull of the translated corners of the centered ball's box (exact).
    """
    base = _unit_box(g)
    r = ball.radius
    scale = np.array([r ** e for e in g.layer_exponents])
    box0 = base * scale[:, None]
    n = g.total_dim
    corners = np.stack(
        np.meshgrid(*[box0[i] for i in range(n)], indexing="ij"), axis=-1
    ).reshape(-1, n)
    moved = mul(g, ball.center, corners)
    return np.stack([moved.min(axis=0), moved.max(axis=0)], axis=1)


# ---------------------------------------------------------------------------
# instances
# ---------------------------------------------------------------------------

def _eu_mul(a, b):
    return a + b


def _eu_inv(a):
    return -a


def _eu_norm(a):
    return np.sqrt((a * a).sum(axis=-1))


def _h1_mul(a, b):
    out = np.empty(np.broadcast_shapes(a.shape, b.shape))
    out[..., 0] = a[..., 0] + b[..., 0]
    out[..., 1] = a[..., 1] + b[..., 1]
    out[..., 2] = (
        a[..., 2]
        + b[..., 2]
        + 2.0 * (a[..., 1] * b[..., 0] - a[..., 0] * b[..., 1])
    )
    return out


def _h1_inv(a):
    return -a


def _h1_norm(a):
    z2 = a[..., 0] ** 2 + a[..., 1] ** 2
    return (z2 * z2 + 16.0 * a[..., 2] ** 2) ** 0.25


def _certify_quasi_triangle(mul_fn, norm_fn, dim, center_slots, seed=20260823,
                            n_samples=1_200_000, n_refine=24):
    """Empirically certify C with d(x*y) <= C (d(x)+d(y)).

    Maximizes the ratio over a large mixed-scale sample, then refines the top
    candidates with Nelder-Mead. Returns (C, log).
    """
    rng = np.random.default_rng(seed)
    scale_vec = np.ones(dim)
    best_ratio = 0.0
    best_pairs = []
    per_batch = n_samples // 6
    for scale in (0.3, 1.0, 3.0):
        sv = scale_vec * scale
        sv[center_slots] = scale ** 2
        for _ in range(2):
            x = rng.normal(size=(per_batch, dim)) * sv
            y = rng.normal(size=(per_batch, dim)) * sv
            ratio = norm_fn(mul_fn(x, y)) / (norm_fn(x) + norm_fn(y))
            order = np.argsort(ratio)[-4:]
            for i in order:
                best_pairs.append((float(ratio[i]), x[i].copy(), y[i].copy()))
            best_ratio = max(best_ratio, float(ratio[order[-1]]))

    def neg(v):
        xx, yy = v[:dim], v[dim:]
        denom = norm_fn(xx) + norm_fn(yy)
        if denom <= 0:
            return 0.0
        return -float(norm_fn(mul_fn(xx, yy)) / denom)

    best_pairs.sort(key=lambda t: -t[0])
    refined = best_ratio
    argmax = None
    for _, x0, y0 in best_pairs[:n_refine]:
        res = minimize(
            neg,
            np.concatenate([x0, y0]),
            method="Nelder-Mead",
            options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 8000, "maxfev": 16000},
        )
        if -res.fun > refined:
            refined = -res.fun
            argmax = res.x.copy()
    const = refined * (1.0 + 1e-9)
    log = {
        "method": "sampled-max + Nelder-Mead refinement",
        "n_samples": n_samples,
        "seed": seed,
        "sampled_max": best_ratio,
        "refined_max": refined,
        "argmax": None if argmax is None else argmax.tolist(),
        "margin": 1e-9,
    }
    return const, log


@lru_cache(maxsize=None)
def euclidean_group(n: int) -> GroupDescriptor:
    """Abelian group R^n with Euclidean norm; n in {1, 2, 3}."""
    if n not in (1, 2, 3):
        raise GroupError(f"euclidean instances ship for n in 1..3, got {n}")
    vols = {1: 2.0, 2: math.pi, 3: 4.0 * math.pi / 3.0}
    return GroupDescriptor(
        label=f"euclidean:{n}",
        step=1,
        layer_dims=(n,),
        total_dim=n,
        hom_dim=n,
        layer_exponents=(1,) * n,
        quasi_triangle_const=1.0,
        unit_ball_volume=vols[n],
        certification={"method": "triangle inequality holds exactly", "value": 1.0},
        mul_fn=_eu_mul,
        inv_fn=_eu_inv,
        norm_fn=_eu_norm,
        n_horizontal=n,
    )


@lru_cache(maxsize=None)
def heisenberg_group() -> GroupDescriptor:
    """First Heisenberg group with Koranyi gauge; Q = 4, m(B(0,1)) = pi^2/8."""
    const, log = _certify_quasi_triangle(_h1_mul, _h1_norm, 3, center_slots=[2])
    return GroupDescriptor(
        label="heisenberg:1",
        step=2,
        layer_dims=(2, 1),
        total_dim=3,
        hom_dim=4,
        layer_exponents=(1, 1, 2),
        quasi_triangle_const=const,
        unit_ball_volume=math.pi ** 2 / 8.0,
        certification=log,
        mul_fn=_h1_mul,
        inv_fn=_h1_inv,
        norm_fn=_h1_norm,
        n_horizontal=2,
    )


_REGISTRY = {
    "euclidean:1": lambda: euclidean_group(1),
    "euclidean:2": lambda: euclidean_group(2),
    "euclidean:3": lambda: euclidean_group(3),
    "heisenberg:1": heisenberg_group,
}


def get_group(label: str) -> GroupDescriptor:
    """Look up a shipped group instance by label."""
    try:
        return _REGISTRY[label]()
    except KeyError:
        raise GroupError(
            f"unknown group {label!r}; available: {sorted(_REGISTRY)}"
        ) from None


# ---------------------------------------------------------------------------
# unit-sphere surface rule and polar integration
# ---------------------------------------------------------------------------

_SURFACE_CACHE: dict = {}


def surface_rule(g: GroupDescriptor, resolution: int = 0):
    """Quadrature rule (nodes, weights) on the unit sphere {d = 1}.

    Total weight equals the surface constant sigma(S) = Q * m(B(0,1)).
    ``resolution`` > 0 scales the node counts (for refinement studies).
    """
    key = (g.label, resolution)
    if key in _SURFACE_CACHE:
        return _SURFACE_CACHE[key]
    mult = max(1, resolution)
    if g.label == "euclidean:1":
        nodes = np.array([[1.0], [-1.0]])
        weights = np.array([1.0, 1.0])
    elif g.label == "euclidean:2":
        m = 64 * mult
        th = np.arange(m) * 2.0 * np.pi / m
        nodes = np.stack([np.cos(th), np.sin(th)], axis=-1)
        weights = np.full(m, 2.0 * np.pi / m)
    elif g.label == "euclidean:3":
        nu, nphi = 32 * mult, 64 * mult
        xu, wu = np.polynomial.legendre.leggauss(nu)
        phi = np.arange(nphi) * 2.0 * np.pi / nphi
        st = np.sqrt(1.0 - xu ** 2)
        nodes = np.stack(
            [
                st[:, None] * np.cos(phi)[None, :],
                st[:, None] * np.sin(phi)[None, :],
                xu[:, None] * np.ones(nphi)[None, :],
            ],
            axis=-1,
        ).reshape(-1, 3)
        weights = (wu[:, None] * np.full(nphi, 2.0 * np.pi / nphi)[None, :]).ravel()
    elif g.label == "heisenberg:1":
        # Parametrize z = sqrt(cos psi) e^{i phi}, s = sin(psi)/4; the coarea
        # Jacobian is the constant r^3/4, so the surface density is 1/4.
        npsi, nphi = 48 * mult, 64 * mult
        xp, wp = np.polynomial.legendre.leggauss(npsi)
        psi = 0.5 * np.pi * xp
        wpsi = 0.5 * np.pi * wp
        phi = np.arange(nphi) * 2.0 * np.pi / nphi
        rho = np.sqrt(np.cos(psi))
        nodes = np.stack(
            [
                rho[:, None] * np.cos(phi)[None, :],
                rho[:, None] * np.sin(phi)[None, :],
                (np.sin(psi) / 4.0)[:, None] * np.ones(nphi)[None, :],
            ],
            axis=-1,
        ).reshape(-1, 3)
        weights = (0.25 * wpsi[:, None] * np.full(nphi, 2.0 * np.pi / nphi)[None, :]).ravel()
    else:
        raise GroupError(f"no surface rule for group {g.label}")
    _SURFACE_CACHE[key] = (nodes, weights)
    return nodes, weights


def polar_integrate(g: GroupDescriptor, f, r_max: float, n_radial: int = 256,
                    resolution: int = 0) -> float:
    """Integrate f over {d(x) < r_max} in polar form.

    Uses Int_0^rmax Int_S f(delta_r(w)) r^(Q-1) dsigma(w) dr with the cached
    surface rule and composite Gauss-Legendre radial panels. Raises
    ``NumericsError`` with a location if f produces non-finite values.
    """
    if r_max <= 0:
        raise GroupError(f"r_max must be positive, got {r_max}")
    omega, w_s = surface_rule(g, resolution)
    n_panels = max(1, n_radial // 16)
    xg, wg = np.polynomial.legendre.leggauss(16)
    edges = np.linspace(0.0, r_max, n_panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    r = (half[:, None] * xg[None, :] + mid[:, None]).ravel()
    w_r = (half[:, None] * wg[None, :]).ravel()
    exps = np.array(g.layer_exponents, dtype=float)
    pts = r[:, None, None] ** exps[None, None, :] * omega[None, :, :]
    vals = np.asarray(f(pts), dtype=float)
    if not np.all(np.isfinite(vals)):
        bad = np.argwhere(~np.isfinite(vals))[0]
        raise NumericsError(
            "integrand returned a non-finite value",
            location=pts[tuple(bad)].tolist(),
        )
    radial = vals @ w_s
    return float(np.sum(w_r * r ** (g.hom_dim - 1) * radial))


def unit_directions(g: GroupDescriptor, k: int = 8) -> np.ndarray:
    """Deterministic spread of k points on the unit sphere {d = 1}."""
    if g.label == "euclidean:1":
        return np.array([[1.0] if i % 2 == 0 else [-1.0] for i in range(k)])
    if g.label == "euclidean:2":
        th = np.arange(k) * 2.0 * np.pi / k
        return np.stack([np.cos(th), np.sin(th)], axis=-1)
    if g.label == "euclidean:3":
        i = np.arange(k)
        u = -1.0 + 2.0 * (i + 0.5) / k
        phi = i * np.pi * (3.0 - np.sqrt(5.0))
        st = np.sqrt(1.0 - u ** 2)
        return np.stack([st * np.cos(phi), st * np.sin(phi), u], axis=-1)
    if g.label == "heisenberg:1":
        i = np.arange(k)
        psi = -1.25 + 2.5 * (i + 0.5) / k
        phi = i * np.pi * (3.0 - np.sqrt(5.0))
        rho = np.sqrt(np.cos(psi))
        return np.stack(
            [rho * np.cos(phi), rho * np.sin(phi), np.sin(psi) / 4.0], axis=-1
        )
    raise GroupError(f"no direction rule for group {g.label}")


def certify_bilipschitz(g: GroupDescriptor, n_samples: int = 200_000,
                        seed: int = 7, box_half: float = 1.0) -> dict:
    """Certify the two-sided comparison of d(y^-1 x) with the Euclidean distance.

    On the box [-b, b]^N, finds c with
    c^-1 ||x - y|| <= d(x, y) <= c ||x - y||^(1/step). Returns the constant and
    the maximizing pairs.
    """
    rng = np.random.default_rng(seed)
    x = rng.uniform(-box_half, box_half, size=(n_samples, g.total_dim))
    y = rng.uniform(-box_half, box_half, size=(n_samples, g.total_dim))
    d = np.asarray(dist(g, x, y))
    eu = np.sqrt(((x - y) ** 2).sum(axis=-1))
    keep = eu > 1e-12
    lower = eu[keep] / d[keep]
    upper = d[keep] / eu[keep] ** (1.0 / g.step)
    c = float(max(lower.max(), upper.max()))
    return {
        "c": c,
        "lower_max": float(lower.max()),
        "upper_max": float(upper.max()),
        "n_samples": n_samples,
        "box_half": box_half,
        "seed": seed,
    }
