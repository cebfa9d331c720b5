"""Maximal-operator tests.

Closed-form oracles frozen here (unit atom at gauge distance L from the
query point, Gaussian profile phi(r) = exp(-r^2)):

* Hardy-Littlewood maximal value on the line: sup_(r>L) 1/(2r) = 1/(2L);
  the geometric grid (40 points/decade) can undershoot by at most the grid
  ratio 10^(1/40) - 1 < 6%.
* mollifier maximal value on the line: sup_s s^(-1) exp(-(L/s)^2) is
  attained at s = L sqrt(2) with value exp(-1/2) / (L sqrt(2)).
* lower sandwich constant c_phi = phi(1) m(B(0,1)): 2/e on the line,
  exp(-1) pi^2/8 on the Heisenberg group.
* smearing Lebesgue measure with phi_s recovers, on the Heisenberg group,
  integral of phi = sigma(S) int phi r^3 dr = (pi^2/2) * (1/2) = pi^2/4.
"""

import math

import numpy as np
import pytest

import fatoulab as F

C_PHI_EU1 = 0.7357588823428847  # 2/e
C_PHI_H1 = 0.4538530689569951   # exp(-1) pi^2 / 8


def test_profile_validation():
    with pytest.raises(F.MeasureError):
        F.RadialProfile(lambda r: -np.ones_like(np.asarray(r)), "negative")
    with pytest.raises(F.MeasureError):
        F.RadialProfile(lambda r: np.asarray(r) ** 2, "increasing")
    with pytest.raises(F.MeasureError):
        F.RadialProfile(lambda r: np.zeros_like(np.asarray(r)), "zero")
    phi = F.default_profile()
    assert phi(1.0) == pytest.approx(math.exp(-1.0))
    assert 5.0 < phi.support_radius < 7.0  # exp(-r^2) < 1e-14 near r = 5.7


def test_geometric_grid_density():
    grid = F.geometric_grid(1e-2, 1e2, 10)
    assert len(grid) == 41
    assert grid[0] == pytest.approx(1e-2) and grid[-1] == pytest.approx(1e2)
    ratios = grid[1:] / grid[:-1]
    assert np.allclose(ratios, 10 ** 0.1)


# ---------------------------------------------------------------------------
# single-atom oracles
# ---------------------------------------------------------------------------

def test_hardy_littlewood_atom_oracle(g1):
    mu = F.AtomicMeasure(g1, [[0.5]], [1.0])
    out = F.hardy_littlewood(mu, np.zeros(1))
    # grid sup never exceeds the true sup 1/(2 * 0.5) = 1
    assert out["value"] <= 1.0 + 1e-12
    assert out["value"] >= 1.0 / 10 ** (1 / 40)  # one grid step below
    assert out["argmax_r"] == pytest.approx(0.5, rel=10 ** (1 / 40) - 1)
    assert not out["divergent"]


def test_radial_max_atom_oracle(g1):
    mu = F.AtomicMeasure(g1, [[0.5]], [1.0])
    out = F.radial_max(mu, F.default_profile(), np.zeros(1))
    exact = math.exp(-0.5) / (0.5 * math.sqrt(2.0))
    assert out["value"] == pytest.approx(exact, rel=1e-3)
    assert out["argmax_s"] == pytest.approx(0.5 * math.sqrt(2.0), rel=3e-2)
    assert not out["divergent"]


def test_divergence_flag_for_atom_at_query_point(g1):
    mu = F.AtomicMeasure(g1, [[0.0]], [1.0])
    hl = F.hardy_littlewood(mu, np.zeros(1))
    assert hl["divergent"]
    rad = F.radial_max(mu, F.default_profile(), np.zeros(1))
    assert rad["divergent"]


# ---------------------------------------------------------------------------
# sandwich constants
# ---------------------------------------------------------------------------

def test_lower_constant_closed_form(g1, gh):
    phi = F.default_profile()
    assert F.sandwich_constants(g1, phi, 1.0)["c_phi"] == pytest.approx(
        C_PHI_EU1, rel=1e-14
    )
    assert F.sandwich_constants(gh, phi, 1.0)["c_phi"] == pytest.approx(
        C_PHI_H1, rel=1e-14
    )


def test_upper_constant_matches_direct_series(g1, gh):
    phi = F.default_profile()
    for g, alpha in ((g1, 1.0), (g1, 0.5), (gh, 2.0)):
        v1 = F.ball_volume(g, 1.0)
        cl, q = g.quasi_triangle_const, g.hom_dim
        total = 2.0 ** q * float(phi(0.0))
        j = 1
        while True:
            term = float(phi(2.0 ** (j - 1) * alpha)) * 2.0 ** ((j + 1) * q)
            total += term
            if term < 1e-15 * total:
                break
            j += 1
        direct = v1 * (cl * alpha) ** q * total
        got = F.sandwich_constants(g, phi, alpha)
        assert got["c_alpha_phi"] == pytest.approx(direct, rel=1e-13), (g.label, alpha)


def test_upper_constant_frozen_value(g1):
    out = F.sandwich_constants(g1, F.default_profile(), 1.0)
    assert out["c_alpha_phi"] == pytest.approx(7.236089352716876, rel=1e-14)
    assert out["n_terms"] == 4


def test_series_divergence_raises(g1):
    slow = F.RadialProfile(lambda r: 1.0 / (1.0 + np.asarray(r)), "slow-decay")
    with pytest.raises(F.CertificationError):
        F.sandwich_constants(g1, slow, 1.0)


# ---------------------------------------------------------------------------
# full sandwich chains
# ---------------------------------------------------------------------------

def test_sandwich_atomic_line(g1):
    mu = F.AtomicMeasure(g1, [[0.5], [-1.2], [2.0]], [1.0, 0.5, 2.0])
    report = F.check_sandwich(mu, np.zeros(1))
    assert report["chain_ok"] and not report["all_divergent"]
    for alpha, entry in report["alphas"].items():
        assert entry["radial_le_nt"] and entry["nt_le_c_hl"]


def test_sandwich_density_line(g1):
    mu = F.DensityMeasure(
        g1, lambda x: 1.0 + 0.5 * x[..., 0] ** 2, [[-2.0, 2.0]], label="q"
    )
    report = F.check_sandwich(mu, np.array([0.3]))
    assert report["chain_ok"]


def test_sandwich_vacuous_when_all_divergent(g1):
    mu = F.AtomicMeasure(g1, [[0.0]], [1.0])
    report = F.check_sandwich(mu, np.zeros(1))
    assert report["all_divergent"] and report["chain_ok"]


def test_nontangential_dominates_radial(g2):
    mu = F.DensityMeasure(
        g2,
        lambda p: np.exp(-p[..., 0] ** 2 - p[..., 1] ** 2),
        [[-2.0, 2.0], [-2.0, 2.0]],
        label="bump2",
    )
    phi = F.default_profile()
    x = np.array([0.4, -0.2])
    s = F.geometric_grid(1e-2, 10.0, 20)
    rad = F.radial_max(mu, phi, x, s_grid=s)
    nt = F.nontangential_max(mu, phi, x, 1.0, s_grid=s)
    # beta = 0 placements reproduce the radial values exactly
    assert nt["value"] >= rad["value"]


def test_mollifier_recovers_profile_mass(gh):
    mu = F.DensityMeasure(
        gh, lambda p: np.ones(p.shape[:-1]),
        [[-1.5, 1.5], [-1.5, 1.5], [-1.5, 1.5]], label="lebesgue",
    )
    got = F.mollifier_convolution(mu, F.default_profile(), np.zeros(3), 0.5)
    assert got == pytest.approx(math.pi ** 2 / 4.0, rel=1e-3)
    with pytest.raises(F.MeasureError):
        F.mollifier_convolution(mu, F.default_profile(), np.zeros(3), 0.0)


# ---------------------------------------------------------------------------
# heat maximal chain
# ---------------------------------------------------------------------------

def test_heat_chain_line_atom(g1, p1):
    mu = F.AtomicMeasure(g1, [[0.5]], [1.0])
    report = F.check_heat_chain(mu, p1, np.zeros(1))
    assert report["chain_ok"] and not report["divergent"]
    assert report["lower"]["value"] <= report["heat"]["value"] * 1.02
    assert report["heat"]["value"] <= report["upper"]["value"] * 1.02


def test_heat_chain_heisenberg_atoms(gh, ph):
    mu = F.AtomicMeasure(
        gh, [[0.6, 0.2, 0.1], [-0.3, 0.5, -0.2]], [1.0, 0.7]
    )
    report = F.check_heat_chain(mu, ph, np.zeros(3))
    assert report["chain_ok"] and not report["divergent"]


def test_heat_max_atom_value(g1, p1):
    # sup_s u(0, s^2) for a unit atom at 0.5: (4 pi s^2)^(-1/2) e^(-1/(16 s^2))
    # maximized at s = 1 / (2 sqrt 2): value = sqrt(2 / pi) e^(-1/2)
    mu = F.AtomicMeasure(g1, [[0.5]], [1.0])
    out = F.heat_max(mu, p1, np.zeros(1))
    exact = math.sqrt(2.0 / math.pi) * math.exp(-0.5)
    assert out["value"] == pytest.approx(exact, rel=1e-3)
