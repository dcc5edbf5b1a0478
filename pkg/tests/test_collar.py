import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import brentq

from necklab.collar import (DELTA_THIN, L_MAX, CollarSpec, collar_area, collar_area_quadrature,
                            conformal_factor, cylinder_bounds, fermi_to_cylinder, injrad,
                            injrad_fermi, subcollar)
from necklab.exceptions import DeltaTooSmall, LengthOutOfRange, OutOfCollar

mp.mp.dps = 40
lengths = st.floats(1e-3, float(L_MAX), allow_nan=False)


def mp_bounds(l):
    l = mp.mpf(l)
    a = mp.atan(mp.sinh(l / 2))
    return float(2 * mp.pi / l * a), float(2 * mp.pi / l * (mp.pi - a))


def test_cylinder_bounds_examples():
    lo, hi = cylinder_bounds(0.1)
    assert (lo, hi) == pytest.approx(mp_bounds(0.1), rel=1e-14)
    assert lo == pytest.approx(3.14028, abs=1e-5)
    # the upper bound is 2 pi^2 / l - t_lo = 194.25181
    assert hi == pytest.approx(194.25181, abs=1e-5)
    lo, hi = cylinder_bounds(L_MAX)
    assert hi - lo == pytest.approx(np.pi**2 / L_MAX, rel=1e-14)
    c = CollarSpec(0.1)
    assert (c.t_lo + c.t_hi) / 2 == pytest.approx(c.core_t, rel=1e-15)
    for bad in (0, -1, L_MAX * 1.01, 10):
        with pytest.raises(LengthOutOfRange):
            cylinder_bounds(bad)


def test_conformal_factor_examples():
    c = CollarSpec(0.1)
    assert conformal_factor(0.1, c.core_t) == pytest.approx(0.1 / (2 * np.pi), rel=1e-15)
    x = mp.sinh(mp.mpf("0.05"))
    oracle = float(mp.mpf("0.1") / (2 * mp.pi * x / mp.sqrt(1 + x**2)))
    assert conformal_factor(0.1, c.t_lo) == pytest.approx(oracle, rel=1e-12)
    assert oracle == pytest.approx(0.318575, abs=1e-6)
    for s in np.linspace(0, c.core_t - c.t_lo, 7):
        assert conformal_factor(0.1, c.core_t + s) == pytest.approx(
            conformal_factor(0.1, c.core_t - s), abs=1e-14)
    with pytest.raises(OutOfCollar):
        conformal_factor(0.1, c.t_hi + 1)


def test_injrad_examples():
    c = CollarSpec(0.1)
    assert injrad(0.1, c.core_t) == pytest.approx(0.05, rel=1e-14)
    # solve sin(l t / 2 pi) = sinh(0.05) on the lower half with a root finder
    t = brentq(lambda t: np.sin(0.1 * t / (2 * np.pi)) - np.sinh(0.05), c.t_lo, c.core_t, xtol=1e-14)
    assert injrad(0.1, t) == pytest.approx(np.arcsinh(1), rel=1e-10)
    lo = np.linspace(c.t_lo, c.core_t, 200)
    hi = np.linspace(c.core_t, c.t_hi, 200)
    assert np.all(np.diff(injrad(0.1, lo)) < 0) and np.all(np.diff(injrad(0.1, hi)) > 0)


def test_subcollar_examples():
    s = subcollar(0.1, DELTA_THIN)
    assert s.T1 == pytest.approx(3.14421, abs=1e-5)
    assert s.T2 == pytest.approx(194.24788, abs=1e-5)
    assert s.T2 - s.T1 == pytest.approx(2 * np.pi**2 / 0.1 - 2 * s.T1, rel=1e-14)
    s = subcollar(0.1, 0.05)
    assert s.T1 == pytest.approx(np.pi**2 / 0.1, rel=1e-7)
    assert s.length == pytest.approx(0, abs=1e-5)
    for l in (0.1, 0.05):
        ratio = subcollar(l).length * l / (2 * np.pi**2)
        assert 0.96 <= ratio <= 1.0
    with pytest.raises(DeltaTooSmall):
        subcollar(0.1, 0.04)


def test_collar_area_examples():
    assert collar_area(0.1) == pytest.approx(float(mp.mpf("0.1") / mp.sinh(mp.mpf("0.05"))), rel=1e-14)
    assert collar_area(1e-8) == pytest.approx(2, rel=1e-12)
    for l in (0.01, 0.1, 0.5):
        lo, hi = cylinder_bounds(l)
        mid = np.pi**2 / l
        # one half of the cylinder carries the closed-form area; the whole cylinder carries twice it
        assert collar_area_quadrature(l, lo, mid) == pytest.approx(collar_area(l), rel=1e-6)
        assert collar_area_quadrature(l) == pytest.approx(2 * collar_area(l), rel=1e-6)


def test_fermi_examples():
    assert fermi_to_cylinder(0.1, 1.0, np.pi / 2) == pytest.approx((np.pi**2 / 0.1, 0.0))
    t, th = fermi_to_cylinder(0.1, np.exp(0.1), np.pi / 3)
    assert th == pytest.approx(2 * np.pi, rel=1e-14)
    t, th = fermi_to_cylinder(0.1, np.exp(0.05), np.pi / 4)
    assert (t, th) == pytest.approx((49.34802, 3.14159), abs=1e-5)
    with pytest.raises(OutOfCollar):
        fermi_to_cylinder(0.1, 0.5, np.pi / 2)
    with pytest.raises(OutOfCollar):
        fermi_to_cylinder(0.1, 1.0, 0.01)


def test_transform_consistency(rng):
    l = 0.3
    ang = np.arctan(np.sinh(l / 2))
    phi = rng.uniform(ang, np.pi - ang, 1000)
    r = np.exp(rng.uniform(0, l, 1000))
    t, _ = fermi_to_cylinder(l, r, phi)
    np.testing.assert_allclose(injrad(l, t), injrad_fermi(l, phi), rtol=0, atol=1e-12)


@given(lengths, st.floats(0, 1))
def test_symmetry_about_core(l, u):
    c = CollarSpec(l)
    s = u * (c.core_t - c.t_lo)
    for q in (c.conformal_factor, c.injrad):
        a, b = q(c.core_t + s), q(c.core_t - s)
        assert a == pytest.approx(b, rel=1e-14 * max(1, c.core_t), abs=1e-14)


@given(st.floats(1e-3, 1.0), st.floats(0.05, 1.0))
def test_subcollar_injrad_duality(l, frac):
    delta = l / 2 + frac * (DELTA_THIN - l / 2)
    c = CollarSpec(l)
    s = subcollar(l, delta)
    t = np.linspace(c.t_lo, c.t_hi, 2001)
    step = t[1] - t[0]
    inside = injrad(l, t) <= delta
    in_bounds = (t >= s.T1) & (t <= s.T2)
    mismatch = t[inside != in_bounds]
    assert np.all(np.minimum(abs(mismatch - s.T1), abs(mismatch - s.T2)) <= step)


@given(lengths)
def test_bounds_ordered(l):
    c = CollarSpec(l)
    assert c.t_lo < c.core_t < c.t_hi
    assert CollarSpec(l).summary(DELTA_THIN)["length_ratio"] <= 1
