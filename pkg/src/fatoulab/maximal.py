"""Maximal operators and the sandwich between them.

Three maximal functions of a measure nu at a point x:

* Hardy-Littlewood: sup over r of nu(B(x, r)) / m(B(x, r));
* radial: sup over s of (nu * phi_s)(x) for a decreasing radial profile phi,
  with phi_s(y) = s^(-Q) phi(rho(y) / s);
* nontangential: sup of (nu * phi_s)(x') over the cone d(x, x') < alpha * s.

For decreasing phi these are equivalent up to explicit constants:

    c_phi * M_HL <= M_rad <= M_nt <= c_(alpha,phi) * M_HL,

with c_phi = phi(1) * m(B(0,1)) from the trivial minorization on the unit
ball, and c_(alpha,phi) from a dyadic-shell majorization whose shells are
inflated by the quasi-triangle constant. All sups here are over shared
finite grids, so the two lower inequalities hold grid-pointwise (exactly
for atomic measures; densities carry a small quadrature allowance), while
the upper one is checked with a disclosed slack covering the gap between a
grid sup and the true sup.

Density convolutions switch quadrature by scale: for small s the mollifier
is sharp, so a fixed phi-weighted polar grid in the scaled variable is
used; for s above the support cell size the original-variable cell grid
resolves phi_s directly and reuses cached density values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CertificationError, MeasureError
from . import groups as G
from . import kernels as K
from .extension import HeatExtension
from .measures import (
    AtomicMeasure,
    BoundaryMeasure,
    DensityMeasure,
    MixtureMeasure,
    measure_ball,
)

__all__ = [
    "RadialProfile",
    "geometric_grid",
    "default_profile",
    "hardy_littlewood",
    "mollifier_convolution",
    "radial_max",
    "nontangential_max",
    "sandwich_constants",
    "check_sandwich",
    "heat_max",
    "check_heat_chain",
]

_SCALE_SWITCH = 1.0  # density conv: scaled grid below, cell grid above
_PHI_GRID_CACHE: dict = {}


@dataclass(eq=False)
class RadialProfile:
    """Decreasing radial mollifier profile r -> phi(r), r >= 0.

    Validated at construction: finite, nonnegative, phi(0) > 0, and
    nonincreasing on a dense check grid. ``support_radius`` is where phi
    drops below 1e-14 of its peak (capped at 50).
    """

    fn: object
    label: str

    def __post_init__(self):
        r = np.concatenate([[0.0], np.geomspace(1e-3, 50.0, 600)])
        v = np.asarray(self.fn(r), dtype=float)
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise MeasureError(f"profile {self.label!r} must be finite and >= 0")
        if not v[0] > 0:
            raise MeasureError(f"profile {self.label!r} must have phi(0) > 0")
        if np.any(np.diff(v) > 1e-12 * v[0]):
            raise MeasureError(f"profile {self.label!r} must be nonincreasing")
        below = np.nonzero(v <= 1e-14 * v[0])[0]
        self.support_radius = float(r[below[0]]) if below.size else 50.0

    def __call__(self, r):
        return np.asarray(self.fn(np.asarray(r, dtype=float)), dtype=float)


def default_profile() -> RadialProfile:
    return RadialProfile(lambda r: np.exp(-np.asarray(r) ** 2), "gauss-unit")


def geometric_grid(r_min: float = 1e-3, r_max: float = 1e3,
                   per_decade: int = 40) -> np.ndarray:
    """Geometric scale grid with a fixed density of points per decade."""
    decades = math.log10(r_max / r_min)
    n = int(round(decades * per_decade)) + 1
    return np.geomspace(r_min, r_max, n)


def _decade_flag(scales: np.ndarray, values: np.ndarray) -> bool:
    """True when values keep growing by > 10x per decade at the smallest scale."""
    if not np.all(np.isfinite(values)):
        return True
    i10 = int(np.searchsorted(scales, scales[0] * 10.0))
    if i10 >= values.size:
        i10 = values.size - 1
    return bool(values[0] >= 10.0 * max(values[i10], 1e-300))


# ---------------------------------------------------------------------------
# Hardy-Littlewood
# ---------------------------------------------------------------------------

def hardy_littlewood(mu: BoundaryMeasure, x, radii=None) -> dict:
    """Grid sup of ball-mass quotients; flags divergence at small radii."""
    g = mu.group
    x = np.asarray(x, dtype=float)
    r = np.asarray(radii if radii is not None else geometric_grid(), dtype=float)
    quot = np.array(
        [measure_ball(mu, G.Ball(x, float(rr)))[0] / G.ball_volume(g, float(rr))
         for rr in r]
    )
    i = int(np.argmax(quot))
    return {
        "value": float(quot[i]),
        "argmax_r": float(r[i]),
        "radii": r,
        "quotients": quot,
        "divergent": _decade_flag(r, quot),
    }


# ---------------------------------------------------------------------------
# mollifier convolutions
# ---------------------------------------------------------------------------

def _coarse_sphere(g: G.GroupDescriptor):
    """Reduced-count surface rule for convolution grids (same total weight)."""
    if g.label == "euclidean:1":
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if g.label == "euclidean:2":
        m = 48
        th = np.arange(m) * 2.0 * np.pi / m
        return (np.stack([np.cos(th), np.sin(th)], axis=-1),
                np.full(m, 2.0 * np.pi / m))
    if g.label == "euclidean:3":
        nu, nphi = 16, 24
        xu, wu = np.polynomial.legendre.leggauss(nu)
        phi = np.arange(nphi) * 2.0 * np.pi / nphi
        st = np.sqrt(1.0 - xu ** 2)
        nodes = np.stack(
            [st[:, None] * np.cos(phi)[None, :],
             st[:, None] * np.sin(phi)[None, :],
             xu[:, None] * np.ones(nphi)[None, :]], axis=-1
        ).reshape(-1, 3)
        w = (wu[:, None] * np.full(nphi, 2.0 * np.pi / nphi)[None, :]).ravel()
        return nodes, w
    if g.label == "heisenberg:1":
        npsi, nphi = 20, 24
        xp, wp = np.polynomial.legendre.leggauss(npsi)
        psi = 0.5 * np.pi * xp
        wpsi = 0.5 * np.pi * wp
        phi = np.arange(nphi) * 2.0 * np.pi / nphi
        rho = np.sqrt(np.cos(psi))
        nodes = np.stack(
            [rho[:, None] * np.cos(phi)[None, :],
             rho[:, None] * np.sin(phi)[None, :],
             (np.sin(psi) / 4.0)[:, None] * np.ones(nphi)[None, :]], axis=-1
        ).reshape(-1, 3)
        w = (0.25 * wpsi[:, None] * np.full(nphi, 2.0 * np.pi / nphi)[None, :]).ravel()
        return nodes, w
    raise MeasureError(f"no sphere rule for group {g.label}")


def _phi_grid(g: G.GroupDescriptor, phi: RadialProfile):
    """phi-weighted polar grid in the scaled variable: (eta_inverse, weights)."""
    key = (g.label, phi.label)
    if key in _PHI_GRID_CACHE:
        return _PHI_GRID_CACHE[key]
    omega, w_s = _coarse_sphere(g)
    r_max = min(phi.support_radius, 50.0)
    n_panels = 4
    xg, wg = np.polynomial.legendre.leggauss(16)
    edges = np.linspace(0.0, r_max, n_panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    r = (half[:, None] * xg[None, :] + mid[:, None]).ravel()
    w_r = (half[:, None] * wg[None, :]).ravel()
    exps = np.array(g.layer_exponents, dtype=float)
    eta = r[:, None, None] ** exps[None, None, :] * omega[None, :, :]
    eta = eta.reshape(-1, g.total_dim)
    w = (w_r * r ** (g.hom_dim - 1) * phi(r))[:, None] * w_s[None, :]
    out = (G.inverse(g, eta), w.ravel())
    _PHI_GRID_CACHE[key] = out
    return out


def _density_cells(mu: DensityMeasure):
    """Cached midpoint cells with density values (centers, masses)."""
    cache = getattr(mu, "_cells_cache", None)
    if cache is None:
        centers, vol, _ = mu._grid(mu.support_box)
        cache = (centers, mu.density_at(centers) * vol)
        mu._cells_cache = cache
    return cache


def _conv_one(mu, phi: RadialProfile, x: np.ndarray, s: float) -> float:
    """(nu * phi_s)(x) for a single scale."""
    g = mu.group
    if isinstance(mu, AtomicMeasure):
        if mu.points.shape[0] == 0:
            return 0.0
        rho = np.asarray(G.dist(g, x, mu.points))
        return float(s ** (-g.hom_dim) * (mu.weights @ phi(rho / s)))
    if isinstance(mu, DensityMeasure):
        if s <= _SCALE_SWITCH:
            eta_inv, w = _phi_grid(g, phi)
            y = G.mul(g, x, G.dilate(g, s, eta_inv))
            return float(w @ mu.density_at(y))
        centers, masses = _density_cells(mu)
        rho = np.asarray(G.dist(g, x, centers))
        return float(s ** (-g.hom_dim) * (masses @ phi(rho / s)))
    if isinstance(mu, MixtureMeasure):
        return sum(_conv_one(c, phi, x, s) for c in mu.components)
    raise MeasureError(f"unsupported measure type {type(mu).__name__}")


def mollifier_convolution(mu: BoundaryMeasure, phi: RadialProfile, x,
                          s: float) -> float:
    """(nu * phi_s)(x) with phi_s(y) = s^(-Q) phi(rho(y)/s)."""
    if not (s > 0):
        raise MeasureError(f"scale must be positive, got {s}")
    return _conv_one(mu, phi, np.asarray(x, dtype=float), float(s))


def _conv_profile(mu, phi, x: np.ndarray, s_grid: np.ndarray) -> np.ndarray:
    """Convolution values along a whole scale grid (vectorized where cheap)."""
    g = mu.group
    if isinstance(mu, AtomicMeasure):
        if mu.points.shape[0] == 0:
            return np.zeros(s_grid.size)
        rho = np.asarray(G.dist(g, x, mu.points))
        mat = phi(rho[None, :] / s_grid[:, None])
        return s_grid ** (-g.hom_dim) * (mat @ mu.weights)
    if isinstance(mu, MixtureMeasure):
        total = np.zeros(s_grid.size)
        for c in mu.components:
            total += _conv_profile(c, phi, x, s_grid)
        return total
    return np.array([_conv_one(mu, phi, x, float(s)) for s in s_grid])


def radial_max(mu: BoundaryMeasure, phi: RadialProfile, x,
               s_grid=None) -> dict:
    """Grid sup over scales of (nu * phi_s)(x)."""
    x = np.asarray(x, dtype=float)
    s = np.asarray(s_grid if s_grid is not None else geometric_grid(), dtype=float)
    vals = _conv_profile(mu, phi, x, s)
    i = int(np.argmax(vals))
    return {
        "value": float(vals[i]),
        "argmax_s": float(s[i]),
        "scales": s,
        "values": vals,
        "divergent": _decade_flag(s, vals),
    }


def nontangential_max(mu: BoundaryMeasure, phi: RadialProfile, x,
                      alpha: float, s_grid=None, betas=(0.0, 0.6, 0.9),
                      n_directions: int = 4) -> dict:
    """Grid sup of (nu * phi_s)(x') over the cone d(x, x') < alpha * s.

    Samples x' = x * delta_(beta * alpha * s)(omega); beta = 0 reproduces the
    radial value, so the nontangential grid sup dominates the radial one by
    construction.
    """
    g = mu.group
    x = np.asarray(x, dtype=float)
    if not (alpha > 0):
        raise MeasureError(f"aperture must be positive, got {alpha}")
    s = np.asarray(s_grid if s_grid is not None else geometric_grid(), dtype=float)
    dirs = G.unit_directions(g, n_directions)
    placements = [(0.0, 0)]
    placements += [
        (float(b), k) for b in betas if b > 0 for k in range(n_directions)
    ]
    best = np.full(s.size, -np.inf)
    for beta, k in placements:
        if beta == 0.0:
            vals = _conv_profile(mu, phi, x, s)
        else:
            vals = np.array([
                _conv_one(
                    mu, phi,
                    G.mul(g, x, G.dilate(g, beta * alpha * float(ss), dirs[k])),
                    float(ss),
                )
                for ss in s
            ])
        best = np.maximum(best, vals)
    i = int(np.argmax(best))
    return {
        "value": float(best[i]),
        "argmax_s": float(s[i]),
        "scales": s,
        "values": best,
        "alpha": alpha,
        "divergent": _decade_flag(s, best),
    }


# ---------------------------------------------------------------------------
# sandwich constants and chain checks
# ---------------------------------------------------------------------------

def sandwich_constants(g: G.GroupDescriptor, phi: RadialProfile,
                       alpha: float) -> dict:
    """Explicit constants for the maximal sandwich.

    Lower: phi_s >= phi(1) s^(-Q) on B(x, s) gives c_phi = phi(1) m(B(0,1)).
    Upper: dyadic shells around the cone point, inflated into balls around
    the cone vertex by the quasi-triangle constant, give

        c_(alpha,phi) = m(B(0,1)) (C_L alpha)^Q
                        [2^Q phi(0) + sum_(j>=1) phi(2^(j-1) alpha) 2^((j+1) Q)].

    The series must converge (phi decaying faster than 2^(-j Q)); truncation
    stops when a term falls below 1e-15 of the partial sum.
    """
    c_phi = float(phi(1.0)) * g.unit_ball_volume
    q = g.hom_dim
    total = 2.0 ** q * float(phi(0.0))
    prev = math.inf
    for j in range(1, 10001):
        if (j + 1) * q > 1000:  # shell weight would overflow a double
            raise CertificationError(
                f"shell series for profile {phi.label!r} did not converge"
            )
        term = float(phi(2.0 ** (j - 1) * alpha)) * 2.0 ** ((j + 1) * q)
        total += term
        if term < 1e-15 * total:
            break
        if j >= 8 and term >= prev:
            raise CertificationError(
                f"shell series for profile {phi.label!r} did not converge "
                f"(terms stopped decreasing at shell {j})"
            )
        prev = term
    else:
        raise CertificationError(
            f"shell series for profile {phi.label!r} did not converge"
        )
    c_alpha = g.unit_ball_volume * (g.quasi_triangle_const * alpha) ** q * total
    return {"c_phi": c_phi, "c_alpha_phi": c_alpha, "n_terms": j}


def _is_atomic(mu: BoundaryMeasure) -> bool:
    if isinstance(mu, AtomicMeasure):
        return True
    if isinstance(mu, MixtureMeasure):
        return all(_is_atomic(c) for c in mu.components)
    return False


def check_sandwich(mu: BoundaryMeasure, x, phi: RadialProfile | None = None,
                   alphas=(0.5, 1.0, 2.0), s_grid=None,
                   slack_upper: float = 0.02,
                   slack_lower: float | None = None) -> dict:
    """Verify the maximal sandwich at a point over shared scale grids.

    The two lower inequalities hold grid-pointwise; ``slack_lower`` (defaults
    to 1e-9 for atomic measures, 1e-2 for densities whose two convolution
    quadratures differ) absorbs only floating-point and quadrature error.
    ``slack_upper`` covers the gap between the grid sup and the true sup on
    the Hardy-Littlewood side.
    """
    g = mu.group
    x = np.asarray(x, dtype=float)
    phi = phi or default_profile()
    s = np.asarray(s_grid if s_grid is not None else geometric_grid(), dtype=float)
    if slack_lower is None:
        slack_lower = 1e-9 if _is_atomic(mu) else 1e-2
    hl = hardy_littlewood(mu, x, radii=s)
    rad = radial_max(mu, phi, x, s_grid=s)
    report = {
        "x": x.tolist(),
        "group": g.label,
        "profile": phi.label,
        "hardy_littlewood": hl,
        "radial": rad,
        "alphas": {},
        "slack_upper": slack_upper,
        "slack_lower": slack_lower,
    }
    all_div = hl["divergent"] and rad["divergent"]
    chain_ok = True
    c_phi = sandwich_constants(g, phi, 1.0)["c_phi"]
    if not all_div:
        chain_ok &= c_phi * hl["value"] <= rad["value"] * (1.0 + slack_lower)
    for alpha in alphas:
        nt = nontangential_max(mu, phi, x, alpha, s_grid=s)
        consts = sandwich_constants(g, phi, alpha)
        if all_div and nt["divergent"]:
            ok_low, ok_up = True, True
        else:
            ok_low = rad["value"] <= nt["value"] * (1.0 + slack_lower)
            ok_up = nt["value"] <= consts["c_alpha_phi"] * hl["value"] * (
                1.0 + slack_upper
            )
        chain_ok &= ok_low and ok_up
        report["alphas"][alpha] = {
            "nontangential": nt,
            "c_alpha_phi": consts["c_alpha_phi"],
            "radial_le_nt": ok_low,
            "nt_le_c_hl": ok_up,
        }
    report["c_phi"] = c_phi
    report["all_divergent"] = all_div
    report["chain_ok"] = bool(chain_ok)
    return report


# ---------------------------------------------------------------------------
# heat maximal function
# ---------------------------------------------------------------------------

def heat_max(mu: BoundaryMeasure, profile: K.KernelProfile, x,
             s_grid=None) -> dict:
    """Grid sup over s of the heat extension u(x, s^2).

    The substitution t = s^2 aligns the heat semigroup with the mollifier
    convention phi_s = s^(-Q) phi(delta_(1/s) argument).
    """
    x = np.asarray(x, dtype=float)
    s = np.asarray(
        s_grid if s_grid is not None else geometric_grid(1e-3, 3.0), dtype=float
    )
    u = HeatExtension(mu, profile)
    vals = np.array([u(x, float(ss) ** 2) for ss in s])
    i = int(np.argmax(vals))
    return {
        "value": float(vals[i]),
        "argmax_s": float(s[i]),
        "scales": s,
        "values": vals,
        "divergent": _decade_flag(s, vals),
    }


def check_heat_chain(mu: BoundaryMeasure, profile: K.KernelProfile, x,
                     s_grid=None, slack: float = 0.02) -> dict:
    """Sandwich the heat maximal function between two Gaussian radial maxima.

    The kernel certificate provides c0 with
    phi_low(r) = exp(-c0 r^2) / c0 <= gamma <= c0 exp(-r^2 / c0) = psi_high(r)
    pointwise in the gauge; convolving preserves the order scale by scale, so
    on a shared grid M_(phi_low) <= sup_s u(x, s^2) <= M_(psi_high) up to
    quadrature slack.
    """
    if profile.certificate is None:
        K.certify_gaussian(profile)
    c0 = profile.certificate.c0
    g = mu.group
    x = np.asarray(x, dtype=float)
    s = np.asarray(
        s_grid if s_grid is not None else geometric_grid(1e-3, 3.0), dtype=float
    )
    lo = RadialProfile(
        lambda r: np.exp(-c0 * np.asarray(r) ** 2) / c0,
        f"gauss-lower-{g.label}-{c0:.6g}",
    )
    hi = RadialProfile(
        lambda r: c0 * np.exp(-np.asarray(r) ** 2 / c0),
        f"gauss-upper-{g.label}-{c0:.6g}",
    )
    m_lo = radial_max(mu, lo, x, s_grid=s)
    m_hi = radial_max(mu, hi, x, s_grid=s)
    u_max = heat_max(mu, profile, x, s_grid=s)
    divergent = m_lo["divergent"] and u_max["divergent"] and m_hi["divergent"]
    if divergent:
        ok = True
    else:
        ok = (
            m_lo["value"] <= u_max["value"] * (1.0 + slack)
            and u_max["value"] <= m_hi["value"] * (1.0 + slack)
        )
    return {
        "c0": c0,
        "lower": m_lo,
        "heat": u_max,
        "upper": m_hi,
        "slack": slack,
        "divergent": divergent,
        "chain_ok": bool(ok),
    }
