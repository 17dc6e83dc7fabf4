import math
import random

import pytest
from hypothesis import given, strategies as st

from shuffle_blanket import (
    BadInterval,
    Case,
    NonPositiveEpsilon,
    NonPositiveInput,
    ShuffleParams,
    compute_kappas,
    delta_bound,
    epsilon_for_delta,
    select_case,
)
from shuffle_blanket.acceptance import mp_ln_delta
from shuffle_blanket.bounds import ln_delta_expr
from shuffle_blanket.params import compute_kappa4

# 50-digit evaluations of the bound
LN_DELTA_01_10_05 = -12.347326855957350672  # Case 1
LN_DELTA_05_100_10 = -20.823956474313410200  # Case 2


def _sides(e0, eps):
    lhs = math.exp(-e0)
    rhs = (math.exp(eps) - 1) ** 2 / ((math.exp(eps) + 1) ** 2 * (math.exp(e0) - math.exp(-e0)) ** 2)
    return lhs, rhs


def test_case_examples():
    assert select_case(0.5, 1.0) is Case.CASE2
    lhs, rhs = _sides(0.5, 1.0)
    assert lhs == pytest.approx(0.60653, abs=1e-5) and rhs == pytest.approx(0.19661, abs=1e-5)
    assert select_case(0.1, 0.5) is Case.CASE1
    lhs, rhs = _sides(0.1, 0.5)
    assert lhs == pytest.approx(0.90484, abs=1e-5) and rhs == pytest.approx(1.49464, abs=1e-5)


def test_tie_goes_to_case1():
    k4 = compute_kappa4(0.1)
    assert k4 == pytest.approx(0.385842888139768589, rel=1e-14)
    assert select_case(0.1, k4) is Case.CASE1


def test_ties_at_computed_kappa4_are_case1():
    rng = random.Random(3)
    for _ in range(5000):
        e0 = rng.uniform(1e-6, 0.644)
        assert select_case(e0, compute_kappa4(e0)) is Case.CASE1


@pytest.mark.parametrize("e0, eps", [(0.0, 1.0), (0.5, 0.0), (-1.0, 1.0), (0.5, -2.0)])
def test_case_rejects_non_positive(e0, eps):
    with pytest.raises(NonPositiveInput):
        select_case(e0, eps)


def test_case_boundary_identity():
    rng = random.Random(11)
    for _ in range(10_000):
        e0 = rng.uniform(1e-6, 0.64)
        eps = rng.uniform(1e-6, 6.0)
        k4 = compute_kappa4(e0)
        if abs(eps - k4) <= 1e-12:
            continue
        assert (select_case(e0, eps) is Case.CASE1) == (eps >= k4)


@pytest.mark.parametrize("e0", [0.645, 0.7, 1.0, 3.0, 50.0])
def test_infinite_kappa4_means_case2(e0):
    for eps in [1e-6, 0.01, 0.5, 1.0, 5.0, 50.0, 700.0, 5000.0]:
        assert select_case(e0, eps) is Case.CASE2


def test_delta_spot_values():
    b = delta_bound(ShuffleParams.uniform(0.1, 10, 2), 0.5)
    assert b.case is Case.CASE1
    assert b.ln_delta == pytest.approx(LN_DELTA_01_10_05, rel=1e-13)
    assert b.delta_clamped == pytest.approx(4.330e-6, rel=5e-3)
    b = delta_bound(ShuffleParams.uniform(0.5, 100, 2), 1.0)
    assert b.case is Case.CASE2
    assert b.ln_delta == pytest.approx(LN_DELTA_05_100_10, rel=1e-13)
    assert b.delta_clamped == pytest.approx(9.03e-10, rel=5e-3)
    assert b.epsilon == 1.0


@pytest.mark.parametrize("eps", [0.0, -0.1, math.nan])
def test_delta_rejects_bad_epsilon(eps):
    with pytest.raises(NonPositiveEpsilon):
        delta_bound(ShuffleParams.uniform(0.5, 10, 2), eps)


def test_delta_matches_mp_on_random_points():
    rng = random.Random(5)
    for _ in range(200):
        e0 = rng.uniform(0.01, 3.0)
        n = rng.randint(1, 5000)
        eps = rng.uniform(0.01, 10.0)
        case, ref = mp_ln_delta(e0, n, eps)
        b = delta_bound(ShuffleParams.uniform(e0, n, 2), eps)
        # the case label can only differ right at the boundary
        if str(b.case) == case:
            assert b.ln_delta == pytest.approx(float(ref), rel=1e-11, abs=1e-11)


def test_underflow_keeps_log():
    b = delta_bound(ShuffleParams.uniform(0.5, 5000, 2), 1.0)
    assert b.ln_delta < -745
    assert b.delta_clamped == 0.0
    assert math.isfinite(b.ln_delta)


def test_clamped_at_one():
    b = delta_bound(ShuffleParams.uniform(2.0, 1, 2), 0.01)
    assert b.ln_delta > 0
    assert b.delta_clamped == 1.0


@given(e0=st.floats(1e-3, 5.0), n=st.integers(1, 10**5), eps=st.floats(1e-6, 800.0))
def test_ln_delta_finite(e0, n, eps):
    b = delta_bound(ShuffleParams.uniform(e0, n, 2), eps)
    assert math.isfinite(b.ln_delta)
    assert 0.0 <= b.delta_clamped <= 1.0
    assert b.delta_clamped == (1.0 if b.ln_delta >= 0 else math.exp(b.ln_delta))


def test_continuity_at_case_boundary():
    rng = random.Random(9)
    for _ in range(100):
        e0 = rng.uniform(1e-4, 0.64)
        params = ShuffleParams.uniform(e0, rng.choice((10, 100, 1000)), 2)
        k4 = compute_kappas(params).kappa4
        a = ln_delta_expr(params, k4, Case.CASE1)
        b = ln_delta_expr(params, k4, Case.CASE2)
        assert a == pytest.approx(b, rel=1e-10)


def test_epsilon_for_delta_inverts():
    params = ShuffleParams.uniform(0.1, 10, 2)
    eps = epsilon_for_delta(params, 4.330e-6, (0.4, 0.6))
    assert eps == pytest.approx(0.5, abs=0.01)
    assert delta_bound(params, eps).ln_delta == pytest.approx(math.log(4.330e-6), abs=1e-9)
    exact = delta_bound(params, 0.5).delta_clamped
    assert epsilon_for_delta(params, exact, (0.4, 0.6)) == pytest.approx(0.5, abs=1e-8)


def test_epsilon_for_delta_not_found():
    params = ShuffleParams.uniform(0.5, 100, 2)
    assert epsilon_for_delta(params, 1.0 - 1e-9, (0.5, 3.0)) is None


def test_epsilon_for_delta_bad_interval():
    params = ShuffleParams.uniform(0.1, 10, 2)
    with pytest.raises(BadInterval):
        epsilon_for_delta(params, 1e-6, (0.6, 0.4))
    with pytest.raises(BadInterval):
        epsilon_for_delta(params, 1e-6, (0.0, 0.4))
