"""Group layer: exact algebra, gauge geometry, certified constants.

Frozen oracles (worked out independently before implementation):

* step-2 product: (1,0,0) * (0,1,0) = (1, 1, -2);
* dilation delta_2(1,1,1) = (2, 2, 4) (vertical coordinate scales by r^2);
* gauge norms: |(1,0,0)| = 1, |(0,0,1)| = (16)^(1/4) = 2, |(1,1,0)| = 2^(1/2);
* unit ball volume on the step-2 group: pi^2/8 (cross-checked by Monte
  Carlo rejection sampling); surface constant Q * m(B(0,1)) = pi^2/2;
* quasi-triangle constant approx 1.4565502 for the quartic gauge.
"""

import math

import numpy as np
import pytest

import fatoulab as F
from fatoulab import groups as G


def test_heisenberg_product_oracle(gh):
    out = F.mul(gh, [1.0, 0.0, 0.0], [0.0, 1.0, 0.0])
    assert np.array_equal(out, [1.0, 1.0, -2.0])
    # the reversed product flips the vertical sign
    out2 = F.mul(gh, [0.0, 1.0, 0.0], [1.0, 0.0, 0.0])
    assert np.array_equal(out2, [1.0, 1.0, 2.0])


def test_identity_and_inverse(gh):
    rng = np.random.default_rng(3)
    x = rng.normal(size=(100, 3))
    e = np.zeros(3)
    assert np.allclose(F.mul(gh, x, e), x, atol=0)
    assert np.allclose(F.mul(gh, e, x), x, atol=0)
    prod = F.mul(gh, x, F.inverse(gh, x))
    assert np.max(np.abs(prod)) <= 1e-12


def test_associativity(gh):
    rng = np.random.default_rng(4)
    x, y, z = rng.normal(size=(3, 500, 3)) * 1.5
    lhs = F.mul(gh, F.mul(gh, x, y), z)
    rhs = F.mul(gh, x, F.mul(gh, y, z))
    assert np.max(np.abs(lhs - rhs)) <= 1e-12


def test_dilation_oracle_and_automorphism(gh):
    assert np.array_equal(F.dilate(gh, 2.0, [1.0, 1.0, 1.0]), [2.0, 2.0, 4.0])
    rng = np.random.default_rng(5)
    x, y = rng.normal(size=(2, 200, 3))
    for r in (0.3, 2.7):
        lhs = F.dilate(gh, r, F.mul(gh, x, y))
        rhs = F.mul(gh, F.dilate(gh, r, x), F.dilate(gh, r, y))
        assert np.max(np.abs(lhs - rhs)) <= 1e-12


def test_dilate_rejects_nonpositive(gh):
    with pytest.raises(F.GroupError):
        F.dilate(gh, 0.0, [1.0, 0.0, 0.0])
    with pytest.raises(F.GroupError):
        F.dilate(gh, -1.0, [1.0, 0.0, 0.0])


def test_norm_oracles(gh):
    assert F.norm(gh, np.array([1.0, 0.0, 0.0])) == 1.0
    assert F.norm(gh, np.array([0.0, 0.0, 1.0])) == 2.0
    assert abs(F.norm(gh, np.array([1.0, 1.0, 0.0])) - math.sqrt(2.0)) <= 1e-15


def test_norm_homogeneity_and_symmetry(gh, g2):
    rng = np.random.default_rng(6)
    for g in (gh, g2):
        x = rng.normal(size=(300, g.total_dim))
        n0 = F.norm(g, x)
        for r in (0.2, 5.0):
            nr = F.norm(g, F.dilate(g, r, x))
            assert np.max(np.abs(nr - r * n0) / np.maximum(n0, 1e-12)) <= 1e-12
        assert np.max(np.abs(F.norm(g, F.inverse(g, x)) - n0)) <= 1e-12


def test_ball_volume_oracle(gh, g1, g3):
    assert gh.unit_ball_volume == pytest.approx(math.pi ** 2 / 8.0, rel=1e-14)
    assert F.ball_volume(gh, 2.0) == pytest.approx(2.0 * math.pi ** 2, rel=1e-14)
    assert g1.unit_ball_volume == pytest.approx(2.0, rel=1e-14)
    assert g3.unit_ball_volume == pytest.approx(4.0 * math.pi / 3.0, rel=1e-13)


def test_ball_volume_vs_monte_carlo(gh):
    mc = F.mc_ball_volume(gh, 1.0, n_samples=400_000, seed=11)
    z = (mc["estimate"] - gh.unit_ball_volume) / mc["stderr"]
    assert abs(z) <= 4.0


def test_surface_rule_total_weight(gh, g3):
    for g in (gh, g3):
        _, w = G.surface_rule(g)
        total = g.hom_dim * g.unit_ball_volume
        assert w.sum() == pytest.approx(total, rel=1e-12)
        _, w2 = G.surface_rule(g, resolution=2)
        assert w2.sum() == pytest.approx(total, rel=1e-12)


def test_surface_nodes_on_unit_sphere(gh):
    nodes, _ = G.surface_rule(gh)
    assert np.max(np.abs(F.norm(gh, nodes) - 1.0)) <= 1e-12


def test_polar_integrate_indicator(gh):
    # constant 1 over B(0,1) gives the ball volume
    val = F.polar_integrate(gh, lambda p: np.ones(p.shape[:-1]), 1.0)
    assert val == pytest.approx(math.pi ** 2 / 8.0, rel=1e-12)
    # indicator of the half-radius ball: volume scales by (1/2)^Q = 1/16
    val2 = F.polar_integrate(
        gh, lambda p: (F.norm(gh, p) < 0.5).astype(float), 1.0
    )
    assert val2 == pytest.approx(math.pi ** 2 / 128.0, rel=1e-3)


def test_polar_integrate_line(g1):
    # integral of |x| over [-1, 1] equals 1
    val = F.polar_integrate(g1, lambda p: np.abs(p[..., 0]), 1.0)
    assert val == pytest.approx(1.0, rel=1e-12)


def test_polar_integrate_reports_bad_integrand(gh):
    def bad(p):
        out = np.ones(p.shape[:-1])
        out[np.asarray(F.norm(gh, p)) > 0.5] = np.nan
        return out

    with pytest.raises(F.NumericsError) as err:
        F.polar_integrate(gh, bad, 1.0)
    assert err.value.location is not None


def test_quasi_triangle_certificate(gh, g1):
    c = gh.quasi_triangle_const
    assert 1.45 < c < 1.47
    assert abs(c - 1.4565502) <= 1e-5
    assert g1.quasi_triangle_const == 1.0
    # no violation on a fresh random sample
    rng = np.random.default_rng(77)
    x, y = rng.normal(size=(2, 100_000, 3)) * 2.0
    lhs = F.norm(gh, F.mul(gh, x, y))
    rhs = c * (F.norm(gh, x) + F.norm(gh, y))
    assert np.all(lhs <= rhs * (1.0 + 1e-12))
    # the constant is not wastefully large: some pair comes close
    assert np.max(lhs / rhs) > 0.95


def test_reverse_triangle_euclidean(g2):
    rng = np.random.default_rng(8)
    x, y = rng.normal(size=(2, 20_000, 2))
    lhs = F.norm(g2, F.mul(g2, x, y))
    rhs = F.norm(g2, x) + F.norm(g2, y)
    assert np.all(lhs <= rhs * (1.0 + 1e-12))


def test_bilipschitz_certificate(gh):
    cert = G.certify_bilipschitz(gh)
    c = cert["c"]
    assert c >= 1.0 and math.isfinite(c)
    rng = np.random.default_rng(9)
    x, y = rng.uniform(-1.0, 1.0, size=(2, 50_000, 3))
    d = np.asarray(F.dist(gh, x, y))
    eu = np.sqrt(((x - y) ** 2).sum(axis=-1))
    assert np.all(d <= c * np.sqrt(eu) * (1.0 + 1e-9))
    assert np.all(eu <= c * d * (1.0 + 1e-9))


def test_ball_membership_strict(gh):
    ball = F.Ball(np.zeros(3), 1.0)
    on_sphere = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 0.25]])
    assert not G.ball_contains(gh, ball, on_sphere).any()
    inside = np.array([[0.99, 0.0, 0.0]])
    assert G.ball_contains(gh, ball, inside).all()


def test_ball_bounding_box_contains_ball(gh):
    ball = F.Ball(np.array([0.5, -0.3, 0.2]), 0.7)
    box = G.ball_bounding_box(gh, ball)
    rng = np.random.default_rng(10)
    # rejection-sample points of the ball, check they land in the box
    cand = rng.uniform(-3, 3, size=(200_000, 3))
    pts = cand[G.ball_contains(gh, ball, cand)]
    assert pts.shape[0] > 100
    assert np.all(pts >= box[:, 0] - 1e-12)
    assert np.all(pts <= box[:, 1] + 1e-12)


def test_dilate_translate_ball_semantics(gh):
    ball = F.Ball(np.array([0.4, 0.1, -0.2]), 0.8)
    rng = np.random.default_rng(12)
    pts = rng.normal(size=(5_000, 3))
    member = G.ball_contains(gh, ball, pts)
    r = 1.7
    dball = G.dilate_ball(gh, r, ball)
    assert np.array_equal(
        member, G.ball_contains(gh, dball, F.dilate(gh, r, pts))
    )
    x0 = np.array([0.3, -0.5, 0.1])
    tball = G.translate_ball(gh, x0, ball)
    moved = F.mul(gh, x0, pts)
    member_t = G.ball_contains(gh, tball, moved)
    assert np.mean(member == member_t) > 0.999  # float roundoff at the shell


def test_unit_directions(gh, g3):
    for g in (gh, g3):
        dirs = F.unit_directions(g, 8)
        assert dirs.shape == (8, g.total_dim)
        assert np.max(np.abs(F.norm(g, dirs) - 1.0)) <= 1e-12
        # directions are pairwise distinct
        pair = np.linalg.norm(dirs[:, None] - dirs[None, :], axis=-1)
        assert np.min(pair[~np.eye(8, dtype=bool)]) > 0.1


def test_get_group_registry(gh):
    assert F.get_group("heisenberg:1") is gh
    assert F.get_group("euclidean:2").total_dim == 2
    with pytest.raises(F.GroupError):
        F.get_group("euclidean:7")


def test_group_point_wrapper(gh):
    p = F.GroupPoint(np.array([1.0, 0.0, 0.0]), gh)
    assert p.coords.shape == (3,)
    with pytest.raises(F.GroupError):
        F.GroupPoint(np.array([1.0, 0.0]), gh)
