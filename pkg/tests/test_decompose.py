import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from necklab import invariants as inv
from necklab.decompose import (Decomposition, NeckIdentityReport, classify_compactness,
                               neck_identity, segment, trend)
from necklab.exceptions import MismatchedDecomposition, RangeTooShort, TooFewSamples
from necklab.fields import (constant_field, geodesic_ansatz, neck_bubble_field,
                            small_oscillation_problem)
from necklab.grid import CylinderGrid


def assert_tiles(d, g):
    iv = d.intervals()
    assert iv[0][1] == g.t_min and iv[-1][2] == g.t_max
    assert all(p[2] == q[1] for p, q in zip(iv, iv[1:]))
    assert all(a <= b for _, a, b in iv)
    assert [k for k, _, _ in iv] == ["neck", "bubble"] * len(d.bubbles) + ["neck"]


@pytest.fixture(scope="module")
def neck_bubble():
    return neck_bubble_field(CylinderGrid(-20, 20, 401, 32), 0.1)


def test_segment_examples(neck_bubble):
    g = CylinderGrid(0, 10, 161, 16)
    d = segment(geodesic_ansatz(g, 0.1), 0.5)
    assert d.case == "AllNeck" and d.necks == [(0.0, 10.0)] and not d.bubbles
    assert segment(constant_field(g)).case == "AllNeck"
    d = segment(neck_bubble, 0.5)
    assert d.case == "Mixed" and len(d.bubbles) == 1 and len(d.necks) == 2
    a, b = d.bubbles[0]
    assert a < 0 < b
    assert_tiles(d, neck_bubble.grid)


def test_segment_errors():
    f = geodesic_ansatz(CylinderGrid(0, 3, 31, 8), 0.1)
    with pytest.raises(RangeTooShort):
        segment(f)
    with pytest.raises(ValueError):
        segment(geodesic_ansatz(CylinderGrid(0, 5, 51, 8), 0.1), epsilon=0)


def test_window_threshold_semantics(neck_bubble):
    d = segment(neck_bubble, 0.5, margin=0.0)
    anchors, vals = inv.window_profile(neck_bubble)
    g = neck_bubble.grid
    for (a, b), in zip(d.bubbles):
        inside = (anchors >= a - 1e-9) & (anchors + 1 <= b + 1e-9)
        assert np.any(vals[inside] >= 0.5)
    for a, b in d.necks:
        inside = (anchors >= a - 1e-9) & (anchors + 1 <= b + 1e-9)
        assert np.all(vals[inside] < 0.5)
    assert g.length >= 4


@settings(max_examples=15)
@given(st.floats(0.01, 20), st.floats(0.01, 20))
def test_threshold_monotone(neck_bubble, e1, e2):
    lo, hi = sorted((e1, e2))
    assert len(segment(neck_bubble, hi).bubbles) <= len(segment(neck_bubble, lo).bubbles)
    assert_tiles(segment(neck_bubble, lo), neck_bubble.grid)


@settings(max_examples=10)
@given(st.integers(0, 2**31), st.floats(-12, 12))
def test_tiling_random(seed, center):
    g = CylinderGrid(-15, 15, 241, 16)
    f = neck_bubble_field(g, 0.05, center)
    f = f.copy(small_oscillation_problem(g, 0.05, 0.3, np.random.default_rng(seed)).values
               if seed % 2 else f.values)
    assert_tiles(segment(f, 0.25), g)


def test_neck_identity_examples():
    g = CylinderGrid(0, 10, 401, 16)
    f = geodesic_ansatz(g, 0.5)
    r = neck_identity(f, segment(f, epsilon=10.0))
    assert r.residual_energy <= 1e-4 and r.residual_length <= 1e-4
    assert r.bounds_pass
    c = constant_field(g)
    r = neck_identity(c, segment(c))
    assert r.total_neck_energy == r.total_neck_length == 0
    assert r.predicted_energy == r.predicted_length == 0 and r.alpha == 0
    assert r.residual_energy == 0


def test_neck_identity_synthetic_neck_bubble(neck_bubble):
    d = segment(neck_bubble)
    r = neck_identity(neck_bubble, d)
    assert r.residual_energy <= 0.05
    assert r.bounds_pass
    assert r.alpha_agreement <= r.alpha_drift + 1e-12
    assert len(r.neck_alphas) == 2


def test_mismatched_decomposition():
    g = CylinderGrid(0, 10, 101, 8)
    f = geodesic_ansatz(g, 0.1)
    bad = Decomposition("AllNeck", [(0.0, 9.0)], [], 0.25, (0.0, 9.0))
    with pytest.raises(MismatchedDecomposition):
        neck_identity(f, bad)
    gap = Decomposition("Mixed", [(0.0, 3.0), (5.0, 10.0)], [(3.5, 5.0)], 0.25, (0.0, 10.0))
    with pytest.raises(MismatchedDecomposition):
        neck_identity(f, gap)


def closed_form_reports(ls, slope):
    """Reports carrying only alpha = 2 pi a^2 for a geodesic neck of speed ``slope(Lam)``."""
    out = []
    for l in ls:
        lam = 2 * np.pi**2 / l
        a = slope(lam)
        out.append(NeckIdentityReport(0, 0, lam, complex(2 * np.pi * a * a), 0, 0, 0, 0))
    return out


@pytest.mark.parametrize("slope, regime, w12, c0", [
    (lambda lam: 1.0 / lam, 3, True, False),
    (lambda lam: 0.3 / np.sqrt(lam), 1, False, False),
    (lambda lam: 0.3 * lam**-0.75, 2, True, False),
    (lambda lam: 0.3 * lam**-1.5, 4, True, True),
])
def test_classify_closed_forms(slope, regime, w12, c0):
    ls = [0.2, 0.1, 0.05, 0.025]
    v = classify_compactness(ls, closed_form_reports(ls, slope))
    assert (v.regime, v.w12, v.c0) == (regime, w12, c0)


def test_classify_errors_and_order():
    ls = [0.2, 0.1, 0.05]
    reps = closed_form_reports(ls, lambda lam: 1.0 / lam)
    with pytest.raises(TooFewSamples):
        classify_compactness(ls[:2], reps[:2])
    shuffled = classify_compactness(ls[::-1], reps[::-1])
    assert shuffled.to_dict() == classify_compactness(ls, reps).to_dict()


def test_trend_labels():
    x = np.array([1.0, 2.0, 4.0, 8.0])
    assert trend(x, 1 / x)[0] == "zero"
    assert trend(x, x)[0] == "infinity"
    assert trend(x, np.full(4, 3.0))[0] == "constant"
    assert trend(x, np.zeros(4))[0] == "zero"
