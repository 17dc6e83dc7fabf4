"""Blanket (epsilon, delta) bound for shuffled k-RR, computed in log space."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .params import C, ParamError, ShuffleParams, log_2sinh, validate_params

# Rounding slack for the case comparison; at eps == kappa4 the two sides agree
# to ~5 ulp, and ties belong to Case 1.
TIE_RTOL = 2e-15

SCAN_POINTS = 1024
LN_TOL = 1e-9


class NonPositiveInput(ParamError):
    field = "epsilon"


class NonPositiveEpsilon(ParamError):
    field = "epsilon"


class BadInterval(ParamError):
    field = "search_interval"


class Case(enum.Enum):
    CASE1 = "Case1"
    CASE2 = "Case2"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class DeltaBound:
    case: Case
    ln_delta: float
    delta_clamped: float
    epsilon: float


def _case_sides(epsilon0: float, epsilon: float) -> tuple[float, float]:
    # (e^eps - 1)/(e^eps + 1) == tanh(eps/2); stays finite for any eps.
    lhs = math.exp(-epsilon0)
    rhs = (math.tanh(0.5 * epsilon) / (2.0 * math.sinh(epsilon0))) ** 2
    return lhs, rhs


def select_case(epsilon0: float, epsilon: float) -> Case:
    if not (epsilon0 > 0 and epsilon > 0):
        raise NonPositiveInput(
            f"epsilon0 and epsilon must be positive, got ({epsilon0!r}, {epsilon!r})"
        )
    lhs, rhs = _case_sides(epsilon0, epsilon)
    return Case.CASE1 if lhs <= rhs * (1.0 + TIE_RTOL) else Case.CASE2


def _log_exp_plus_one(x: float) -> float:
    return x + math.log1p(math.exp(-x)) if x > 0 else math.log1p(math.exp(x))


def _log_expm1(x: float) -> float:
    return x + math.log1p(-math.exp(-x)) if x > 30.0 else math.log(math.expm1(x))


def ln_delta_expr(params: ShuffleParams, epsilon: float, case: Case) -> float:
    """ln of the right-hand side of the bound using the given branch, regardless
    of which branch the case split would pick."""
    if not epsilon > 0:
        raise NonPositiveEpsilon(f"epsilon must be > 0, got {epsilon!r}")
    e0, n = params.epsilon0, params.n
    if case is Case.CASE1:
        exponent = math.exp(-e0)
    else:
        exponent = _case_sides(e0, epsilon)[1]
    return (
        2.0 * _log_exp_plus_one(epsilon)
        + 2.0 * log_2sinh(e0)
        - math.log(4.0 * n)
        - _log_expm1(epsilon)
        - C * n * exponent
    )


def delta_bound(params: ShuffleParams, epsilon: float) -> DeltaBound:
    """Smallest delta the blanket bound allows at ``epsilon``.

    ``delta_clamped`` is ``min(exp(ln_delta), 1)``; it underflows to 0.0 for
    ln_delta below about -745 while ``ln_delta`` stays exact.
    """
    validate_params(params)
    if not (isinstance(epsilon, (int, float)) and epsilon > 0 and math.isfinite(epsilon)):
        raise NonPositiveEpsilon(f"epsilon must be a finite positive real, got {epsilon!r}")
    case = select_case(params.epsilon0, epsilon)
    ln_delta = ln_delta_expr(params, epsilon, case)
    clamped = 1.0 if ln_delta >= 0.0 else math.exp(ln_delta)
    return DeltaBound(case=case, ln_delta=ln_delta, delta_clamped=clamped, epsilon=float(epsilon))


def epsilon_for_delta(
    params: ShuffleParams,
    delta_target: float,
    search_interval: tuple[float, float],
    tol: float = LN_TOL,
) -> float | None:
    """Find epsilon in ``search_interval`` with ln delta(epsilon) == ln delta_target.

    The bound is not monotone in epsilon, so the interval is scanned on a
    1024-point grid and the first sign change is refined by bisection.
    Returns None when the scan sees no crossing.
    """
    lo, hi = search_interval
    if not (0 < lo < hi and math.isfinite(hi)):
        raise BadInterval(f"need 0 < lo < hi, got ({lo!r}, {hi!r})")
    if not 0 < delta_target < 1:
        raise ParamError(f"delta_target must lie in (0, 1), got {delta_target!r}", "delta")
    validate_params(params)
    ln_target = math.log(delta_target)

    def f(eps: float) -> float:
        return delta_bound(params, eps).ln_delta - ln_target

    grid = np.linspace(lo, hi, SCAN_POINTS)
    prev_x = float(grid[0])
    prev_f = f(prev_x)
    if prev_f == 0.0:
        return prev_x
    for x in grid[1:]:
        x = float(x)
        fx = f(x)
        if fx == 0.0:
            return x
        if (prev_f < 0) != (fx < 0):
            return _bisect(f, prev_x, x, prev_f, tol)
        prev_x, prev_f = x, fx
    return None


def _bisect(f, a: float, b: float, fa: float, tol: float) -> float:
    for _ in range(200):
        mid = 0.5 * (a + b)
        fm = f(mid)
        if abs(fm) <= tol or mid in (a, b):
            return mid
        if (fm < 0) == (fa < 0):
            a, fa = mid, fm
        else:
            b = mid
    return 0.5 * (a + b)
