import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.stats import chi2

from gravitas.errors import (BelowThresholdError, ConfigShapeError,
                             SuperluminalBoostError)
from gravitas.kinematics import (FourVector, KinematicConfig, PhaseSpaceSample,
                                 boost, check_invariant_measure_identity,
                                 cm_momentum, elastic_cm_config, mandelstam,
                                 minkowski_dot, sample_three_body,
                                 sample_two_body, stream, three_body_batch,
                                 two_body_batch)

momenta3 = st.lists(st.floats(-5.0, 5.0), min_size=3, max_size=3)
betas = st.lists(st.floats(-0.57, 0.57), min_size=3, max_size=3)  # |beta| < 0.99


def test_minkowski_dot_rest_frame():
    m = 1.7
    v = FourVector(m, 0.0, 0.0, 0.0)
    assert minkowski_dot(v, v) == -m * m


def test_minkowski_dot_null_vector():
    v = FourVector(1.0, 1.0, 0.0, 0.0)
    assert minkowski_dot(v, v) == 0.0


def test_minkowski_dot_direct_arithmetic():
    a = FourVector(2.0, 0.0, 0.0, 1.0)
    b = FourVector(3.0, 1.0, 1.0, 0.0)
    assert minkowski_dot(a, b) == -6.0


@given(momenta3, momenta3)
def test_minkowski_dot_symmetric(p3a, p3b):
    a = FourVector.on_shell(1.0, p3a)
    b = FourVector.on_shell(2.0, p3b)
    assert minkowski_dot(a, b) == minkowski_dot(b, a)


def test_mandelstam_threshold():
    m = 1.3
    cfg = elastic_cm_config(m, 0.0, 0.5)
    s, t, u = mandelstam(cfg)
    assert s == pytest.approx(4 * m * m, rel=1e-14)
    assert t == pytest.approx(0.0, abs=1e-14)


def test_mandelstam_forward_elastic():
    cfg = elastic_cm_config(1.0, 0.8, 0.0)
    _, t, _ = mandelstam(cfg)
    assert t == pytest.approx(0.0, abs=1e-12)


def test_mandelstam_right_angle_point():
    # |p| = m at 90 degrees: s = 4(m^2 + p^2) = 8 m^2, t = -2 p^2 (1 - cos) = -2 m^2
    m = 1.0
    cfg = elastic_cm_config(m, m, math.pi / 2)
    s, t, u = mandelstam(cfg)
    assert s == pytest.approx(8.0, rel=1e-14)
    assert t == pytest.approx(-2.0, rel=1e-14)
    assert u == pytest.approx(-2.0, rel=1e-14)


def test_mandelstam_shape_error():
    m = 1.0
    v = FourVector(m, 0.0, 0.0, 0.0)
    cfg = KinematicConfig((v,), (v,), (m, m))
    with pytest.raises(ConfigShapeError):
        mandelstam(cfg)


@given(st.floats(0.01, 3.0), st.floats(0.0, math.pi), st.floats(0.1, 2.0))
def test_mandelstam_sum_identity(p, theta, m):
    cfg = elastic_cm_config(m, p, theta)
    s, t, u = mandelstam(cfg)
    assert s + t + u == pytest.approx(4 * m * m, rel=1e-10)


@given(st.floats(0.01, 3.0), st.floats(0.0, math.pi), betas)
@settings(max_examples=60)
def test_mandelstam_boost_invariant(p, theta, beta):
    cfg = elastic_cm_config(1.0, p, theta)
    s0, t0, u0 = mandelstam(cfg)
    s1, t1, u1 = mandelstam(cfg.boosted(beta))
    scale = max(abs(s0), 1.0)
    assert abs(s1 - s0) <= 1e-10 * scale
    assert abs(t1 - t0) <= 1e-10 * scale
    assert abs(u1 - u0) <= 1e-10 * scale


def test_boost_identity():
    v = FourVector(1.5, 0.0, 0.0, 0.0)
    assert boost(v, (0.0, 0.0, 0.0)) == v


def test_boost_textbook_form():
    m, b = 2.0, 0.6
    g = 1.0 / math.sqrt(1.0 - b * b)
    out = boost(FourVector(m, 0.0, 0.0, 0.0), (0.0, 0.0, b))
    assert out.e == pytest.approx(g * m, rel=1e-14)
    assert out.pz == pytest.approx(g * b * m, rel=1e-14)
    assert out.px == out.py == 0.0


@given(momenta3, betas)
def test_boost_preserves_invariant_mass(p3, beta):
    v = FourVector.on_shell(1.0, p3)
    w = boost(v, beta)
    assert minkowski_dot(w, w) == pytest.approx(minkowski_dot(v, v),
                                                rel=1e-12, abs=1e-12)


def test_boost_superluminal_rejected():
    with pytest.raises(SuperluminalBoostError):
        boost(FourVector(1.0, 0, 0, 0), (0.0, 0.0, 1.0))


def test_phase_space_sample_weight_nonnegative():
    v = FourVector(1.0, 0, 0, 0)
    with pytest.raises(ValueError):
        PhaseSpaceSample((v,), -1.0)


def test_kinematic_config_rejects_nonconserving():
    m = 1.0
    a = FourVector(m, 0, 0, 0)
    b = FourVector.on_shell(m, (0.3, 0, 0))
    with pytest.raises(ConfigShapeError):
        KinematicConfig((a,), (b,), (m, m))


def test_kinematic_config_rejects_off_shell():
    a = FourVector(1.0, 0, 0, 0)
    with pytest.raises(ConfigShapeError):
        KinematicConfig((a,), (a,), (0.5, 0.5))


# ---------------------------------------------------------------------------
# two-body sampling
# ---------------------------------------------------------------------------

def test_two_body_threshold_limit(rng):
    m = 1.0
    s = sample_two_body(FourVector(2 * m, 0, 0, 0), m, m, rng)
    assert all(abs(c) < 1e-12 for v in s.momenta for c in (v.px, v.py, v.pz))
    assert s.weight == 0.0  # measure density k/(4 sqrt s) vanishes at threshold


def test_two_body_back_to_back(rng):
    s = sample_two_body(FourVector(4.0, 0, 0, 0), 1.0, 0.5, rng)
    k1, k2 = s.momenta
    assert np.allclose(k1.p3, -k2.p3, atol=0.0)


def test_two_body_below_threshold(rng):
    with pytest.raises(BelowThresholdError):
        sample_two_body(FourVector(1.9, 0, 0, 0), 1.0, 1.0, rng)


def test_two_body_conservation_and_shell(rng):
    total = boost(FourVector(4.0, 0, 0, 0), (0.2, -0.1, 0.3))
    mom, w = two_body_batch(total, 1.0, 1.0, rng, 2000)
    tot = mom.sum(axis=1)
    assert np.max(np.abs(tot - total.as_array())) < 1e-12 * total.e
    for i in range(2):
        msq = -mom[:, i, 0] ** 2 + np.sum(mom[:, i, 1:] ** 2, axis=1)
        assert np.max(np.abs(msq + 1.0)) < 1e-9


def test_two_body_volume_vs_quadrature(rng):
    # total phase-space volume at sqrt(s) = 4, m1 = m2 = 1 against the
    # deterministic angular integral of the same measure
    roots = 4.0
    k = cm_momentum(roots**2, 1.0, 1.0)
    oracle, _ = quad(lambda c: 2 * math.pi * k / (4 * roots), -1.0, 1.0)
    mom, w = two_body_batch(FourVector(roots, 0, 0, 0), 1.0, 1.0, rng, 50000)
    est, err = w.mean(), w.std() / math.sqrt(len(w)) + 1e-30
    assert abs(est - oracle) <= 3 * err + 1e-12 * oracle


def test_two_body_angular_uniformity(rng):
    # chi-squared on octant counts at 99% confidence, n = 1e5
    n = 100000
    mom, _ = two_body_batch(FourVector(4.0, 0, 0, 0), 1.0, 1.0, rng, n)
    p3 = mom[:, 0, 1:]
    octant = ((p3[:, 0] > 0).astype(int) * 4 + (p3[:, 1] > 0).astype(int) * 2
              + (p3[:, 2] > 0).astype(int))
    counts = np.bincount(octant, minlength=8)
    stat = float(np.sum((counts - n / 8.0) ** 2 / (n / 8.0)))
    assert stat < chi2.ppf(0.99, df=7)


# ---------------------------------------------------------------------------
# three-body sampling
# ---------------------------------------------------------------------------

def test_three_body_degenerate_limit(rng):
    masses = (1.0, 0.8, 0.5)
    total = FourVector(sum(masses), 0, 0, 0)
    s = sample_three_body(total, masses, rng)
    assert all(abs(c) < 1e-12 for v in s.momenta for c in (v.px, v.py, v.pz))
    assert s.weight == 0.0


def test_three_body_conservation(rng):
    total = boost(FourVector(4.0, 0, 0, 0), (0.1, 0.2, -0.25))
    mom, _ = three_body_batch(total, (1.0, 0.8, 0.5), rng, 500)
    tot = mom.sum(axis=1)
    assert np.max(np.abs(tot - total.as_array())) < 1e-12 * total.e


def _dalitz_volume(roots, ma, mb, mc):
    """Deterministic 2-D Dalitz-plane quadrature of int prod d3k/(2E) delta4."""
    s = roots * roots

    def bc_extent(m2ab):
        mab = math.sqrt(m2ab)
        e2 = (m2ab - ma * ma + mb * mb) / (2 * mab)
        e3 = (s - m2ab - mc * mc) / (2 * mab)
        p2 = math.sqrt(max(e2 * e2 - mb * mb, 0.0))
        p3 = math.sqrt(max(e3 * e3 - mc * mc, 0.0))
        return ((e2 + e3) ** 2 - (p2 - p3) ** 2) - ((e2 + e3) ** 2 - (p2 + p3) ** 2)

    area, _ = quad(bc_extent, (ma + mb) ** 2, (roots - mc) ** 2, limit=200)
    return math.pi**2 / (4 * s) * area


def test_three_body_volume_vs_dalitz(rng):
    masses = (1.0, 0.8, 0.5)
    roots = 4.0
    oracle = _dalitz_volume(roots, *masses)
    mom, w = three_body_batch(FourVector(roots, 0, 0, 0), masses, rng, 200000)
    est, err = w.mean(), w.std() / math.sqrt(len(w))
    assert abs(est - oracle) <= 3 * err


def test_three_body_below_threshold(rng):
    with pytest.raises(BelowThresholdError):
        sample_three_body(FourVector(2.0, 0, 0, 0), (1.0, 0.8, 0.5), rng)


# ---------------------------------------------------------------------------
# invariant measure identity
# ---------------------------------------------------------------------------

def _onshell_oracle(f_of_k, mu, kmax):
    val, _ = quad(lambda k: 4 * math.pi * k * k * f_of_k(k)
                  / ((2 * math.pi) ** 3 * 2 * math.sqrt(k * k + mu * mu)),
                  0.0, kmax, limit=200)
    return val


def test_measure_identity_gaussian(rng):
    mu = 1.0

    def f(k4):
        return np.exp(-np.sum(k4[:, 1:] ** 2, axis=1) / (2 * mu * mu))

    rep = check_invariant_measure_identity(f, mu, rng, 400000, kmax=5.0 * mu)
    assert rep.discrepancy_sigmas <= 3.0
    oracle = _onshell_oracle(lambda k: math.exp(-k * k / (2 * mu * mu)), mu, 5.0 * mu)
    assert rep.lhs == pytest.approx(oracle, abs=3 * rep.lhs_error)


def test_measure_identity_indicator_closed_form(rng):
    mu, cut = 1.0, 2.0

    def f(k4):
        return (np.sum(k4[:, 1:] ** 2, axis=1) < cut * cut).astype(float)

    rep = check_invariant_measure_identity(f, mu, rng, 400000, kmax=3.0 * mu)
    closed = _onshell_oracle(lambda k: 1.0 if k < cut else 0.0, mu, cut)
    assert rep.lhs == pytest.approx(closed, abs=3 * rep.lhs_error)
    assert rep.rhs == pytest.approx(closed, abs=3 * rep.rhs_error)


def test_measure_identity_heavy_mass_suppression(rng):
    def f(k4):
        return np.exp(-np.sum(k4[:, 1:] ** 2, axis=1) / 2.0)

    light = check_invariant_measure_identity(f, 1.0, stream(3, 0), 100000, kmax=5.0)
    heavy = check_invariant_measure_identity(f, 20.0, stream(3, 1), 100000, kmax=5.0)
    # 1/(2E) suppression: both sides drop together for the heavy mass
    assert heavy.lhs < 0.1 * light.lhs
    assert heavy.rhs < 0.1 * light.rhs
    assert heavy.discrepancy_sigmas <= 3.0
