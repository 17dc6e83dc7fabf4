import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from mpmath import mp, mpf, exp as mexp

from shuffle_blanket import ShuffleParams, compute_kappas
from shuffle_blanket.acceptance import bisection_roots, planted_poly
from shuffle_blanket.tightness import (
    Classification,
    CriticalEq,
    CriticalPoly,
    Interval,
    Region,
    RegionLabel,
    critical_eq_eval,
    h_root_in,
    poly_root_in,
    regions_and_verdict,
)

# 50-digit references at eps0=0.5, k=2, pi uniform, target 0
H0_N100 = 0.0054574737781966608876
H_0024_N100 = 0.0054431091334108258010
MU_N100 = 0.0024491866240370912928
H_024_N1 = 0.85331237691547864815


@pytest.fixture
def ks100():
    return compute_kappas(ShuffleParams.uniform(0.5, 100, 2), 0)


def test_poly_coefficients_expand():
    poly = CriticalPoly(q=4.0, kappa2=2.0)
    assert (poly.a2, poly.a1, poly.a0) == (5.0, -10.0, 9.0)
    assert poly.roots() == []
    assert poly_root_in(poly, -100.0, 100.0) == []


@given(q=st.floats(0, 1e3), k2=st.floats(1.0, 10.0), x=st.floats(-10, 10))
def test_poly_normal_form(q, k2, x):
    poly = CriticalPoly(q, k2)
    direct = poly(x)
    expanded = poly.a2 * x * x + poly.a1 * x + poly.a0
    assert expanded == pytest.approx(direct, rel=1e-9, abs=1e-9 * max(1.0, q * (x * x + k2 * abs(x) + k2)))


def test_poly_inverted_interval(ks100):
    poly = CriticalPoly.from_kappas(ks100)
    assert math.exp(ks100.kappa4) == pytest.approx(9.619, abs=1e-3)
    assert poly_root_in(poly, math.exp(ks100.kappa4), ks100.kappa2) == []


def test_poly_perfect_square():
    poly = CriticalPoly(q=0.0, kappa2=3.0)
    assert poly.roots() == [-1.0]
    assert poly_root_in(poly, 0.0, 10.0) == []


def test_q_underflows_to_zero(ks100):
    poly = CriticalPoly.from_kappas(ks100)
    # ln kappa3 - ln kappa1 kappa2 ~ -47; far tail of the normalization
    assert 0 <= poly.q < 1e-19


def test_poly_half_open_membership():
    poly = planted_poly(1.5, 2.0)
    assert poly_root_in(poly, 1.5, 2.0) == pytest.approx([1.5])
    assert poly_root_in(poly, 1.0, 1.5) == []
    assert poly_root_in(poly, 1.5 + 1e-13, 3.0) == pytest.approx([1.5, 2.0])


def test_planted_roots_against_bisection():
    rng = random.Random(1)
    done = 0
    while done < 300:
        r1, r2 = rng.uniform(1.001, 4.0), rng.uniform(1.001, 4.0)
        poly = planted_poly(r1, r2)
        if poly is None or abs(r1 - r2) < 1e-2:
            continue
        done += 1
        got = poly_root_in(poly, 1.0, 4.5)
        assert got == pytest.approx(sorted((r1, r2)), abs=1e-9)
        assert got == pytest.approx(bisection_roots(poly, 1.0, 4.5), abs=1e-9)
        for r in got:
            assert abs(poly(r)) <= 1e-9 * max(1.0, r * r)


def test_poly_sign_matches_unnormalized():
    rng = random.Random(2)
    mp.dps = 60
    for _ in range(1000):
        e0 = rng.uniform(0.01, 3.0)
        n = rng.randint(1, 40)
        ks = compute_kappas(ShuffleParams.uniform(e0, n, 2), 0)
        poly = CriticalPoly.from_kappas(ks)
        x = rng.uniform(-3.0, 25.0)
        k1 = mexp(mpf(ks.ln_kappa1))
        xm = mpf(x)
        direct = k1 * ks.kappa2 * (xm + 1) ** 2 - ks.kappa3 * (ks.kappa2 - xm) * (xm - 1)
        assert (direct > 0) == (poly(x) > 0)


def test_h_values(ks100):
    eq = CriticalEq.from_kappas(ks100)
    assert critical_eq_eval(eq, 0.0) == pytest.approx(H0_N100, rel=1e-12)
    assert critical_eq_eval(eq, 0.0024) == pytest.approx(H_0024_N100, rel=1e-12)
    assert eq(0.0) == pytest.approx(2 * ks100.kappa5 * ks100.kappa2, rel=1e-15)


def test_h_limit_without_exponential():
    eq = CriticalEq(kappa5=0.0, kappa2=1.0, kappa3=3.0)
    for x in (0.0, 0.1, -2.0):
        assert critical_eq_eval(eq, x) == pytest.approx(2 * x * x * 3.0)
    assert h_root_in(eq, 1.0) == []


def test_h_no_roots_at_reference_points(ks100):
    eq = CriticalEq.from_kappas(ks100)
    mu = regions_and_verdict(ShuffleParams.uniform(0.5, 100, 2)).mu
    assert mu == pytest.approx(MU_N100, rel=1e-12)
    assert h_root_in(eq, mu) == []
    xs = np.linspace(0.0, mu, 10**6)
    assert critical_eq_eval(eq, xs).min() > 5e-3

    ks1 = compute_kappas(ShuffleParams.uniform(0.5, 1, 2), 0)
    eq1 = CriticalEq.from_kappas(ks1)
    assert critical_eq_eval(eq1, 0.24) == pytest.approx(H_024_N1, rel=1e-12)
    assert h_root_in(eq1, math.tanh(0.25)) == []


@pytest.mark.parametrize("mu", [0.0, -1.0])
def test_h_empty_interval(mu):
    assert h_root_in(CriticalEq(0.01, 3.0, 1.0), mu) == []


def test_h_roots_residual_and_count():
    # quadratic part dips to -0.25 at x = 0.25; exponential term adds at most 0.06
    eq = CriticalEq(kappa5=0.01, kappa2=3.0, kappa3=1.0)
    roots = h_root_in(eq, 1.0)
    assert len(roots) == 2
    h0 = critical_eq_eval(eq, 0.0)
    for r in roots:
        assert 0 < r < 1
        assert abs(critical_eq_eval(eq, r)) <= 1e-9 * h0
    # the scan is independent of grid size once the roots are resolved
    assert h_root_in(eq, 1.0, grid_points=500) == pytest.approx(roots, abs=1e-11)


def test_interval_logic():
    a = Interval(0.0, False, 1.0, False)
    b = Interval(0.5, True, 2.0, True)
    c = a.intersect(b)
    assert c == Interval(0.5, True, 1.0, False)
    assert c.contains(0.5) and not c.contains(1.0)
    assert Interval(1.0, True, 1.0, True).empty is False
    assert Interval(1.0, True, 1.0, False).empty
    assert Interval(2.0, True, 1.0, False).empty
    assert str(Interval(0.0, False, math.inf, False)) == "(0.0, inf)"


def test_region_drops_empty_pieces():
    r = Region((Interval(3.0, True, 1.0, False), Interval(0.0, False, 1.0, False)), RegionLabel.S2)
    assert len(r.intervals) == 1
    assert str(Region.empty_region(RegionLabel.S1)) == "empty"


def test_verdict_reference_instance():
    params = ShuffleParams.uniform(0.5, 100, 2)
    v = regions_and_verdict(params)
    assert v.s1.empty and v.s1_raw.empty
    assert not v.thm3a_holds and not v.thm3b_holds
    assert v.s2.empty
    assert not v.s2_raw.empty
    assert v.classification is Classification.UNCLASSIFIED
    assert regions_and_verdict(params, 3.0).classification is Classification.THEOREM1
    assert regions_and_verdict(params, 1.0).classification is Classification.THEOREM2
    assert regions_and_verdict(params, 0.001).classification is Classification.UNCLASSIFIED


def test_verdict_deterministic():
    params = ShuffleParams(0.3, 12, 3, (0.2, 0.3, 0.5))
    assert regions_and_verdict(params, 0.5) == regions_and_verdict(params, 0.5)


@settings(max_examples=40, deadline=None)
@given(e0=st.floats(0.01, 2.0), n=st.integers(1, 500), k=st.integers(2, 4), data=st.data())
def test_verdict_invariants(e0, n, k, data):
    w = data.draw(st.lists(st.floats(0.01, 1.0), min_size=k, max_size=k))
    pi = tuple(x / sum(w) for x in w)
    v = regions_and_verdict(ShuffleParams(e0, n, k, pi), scan_points=500)
    if v.thm3a_holds:
        assert not v.s1.empty
    if v.thm3b_holds:
        assert not v.s2.empty
    probes = [v.mu * t for t in (0.1, 0.5, 0.9)] + [iv.lo for iv in v.s2_raw.intervals]
    for a in v.per_input:
        # intersection is contained in every per-input region
        for x in probes + [iv.lo for iv in v.s1_raw.intervals]:
            if v.s1_raw.contains(x):
                assert a.s1.contains(x)
            if v.s2_raw.contains(x):
                assert a.s2.contains(x)
        lo, hi = math.exp(a.kappas.kappa4) if a.kappas.kappa4_finite else math.inf, a.kappas.kappa2
        assert (lo < hi) == (a.kappas.kappa4 < a.kappas.ln_kappa2)
    if v.s1_raw.empty:
        assert not v.thm3a_holds
