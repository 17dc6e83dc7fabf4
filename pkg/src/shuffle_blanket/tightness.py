"""Critical polynomial / critical equation roots and the tightness regions S1, S2.

Only root *existence* on the prescribed intervals is checked; roots are never
mapped back to epsilon values.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .params import C, KappaSet, ShuffleParams, all_kappas, validate_params

ENDPOINT_TOL = 1e-12
H_SCAN_POINTS = 10_000
H_BISECT_TOL = 1e-12

NOTES = (
    "mu is the minimum over all inputs x_i",
    "thm3a requires a critical-polynomial root for every input x_i",
    "thm3b requires a critical-equation root for every input x_i",
    "H roots found by grid scan; tangential (sign-preserving) roots can be missed",
)


# -- critical polynomial ---------------------------------------------------


@dataclass(frozen=True)
class CriticalPoly:
    """P(x) / (kappa1 kappa2) = (x + 1)^2 - q (kappa2 - x)(x - 1)."""

    q: float
    kappa2: float

    @classmethod
    def from_kappas(cls, ks: KappaSet) -> "CriticalPoly":
        ln_q = math.log(ks.kappa3) - ks.ln_kappa1 - math.log(ks.kappa2)
        return cls(q=math.exp(ln_q), kappa2=ks.kappa2)

    @property
    def a2(self) -> float:
        return 1.0 + self.q

    @property
    def a1(self) -> float:
        return 2.0 - self.q * (self.kappa2 + 1.0)

    @property
    def a0(self) -> float:
        return 1.0 + self.q * self.kappa2

    def __call__(self, x: float) -> float:
        return (x + 1.0) ** 2 - self.q * (self.kappa2 - x) * (x - 1.0)

    def roots(self) -> list[float]:
        a, b, c = self.a2, self.a1, self.a0
        disc = b * b - 4.0 * a * c
        if disc < 0:
            return []
        if disc == 0:
            return [-b / (2.0 * a)]
        big = -(b + math.copysign(math.sqrt(disc), b)) / (2.0 * a)
        small = c / (a * big)
        return sorted((big, small))


def poly_root_in(poly: CriticalPoly, lo: float, hi: float) -> list[float]:
    """Roots of ``poly`` in the half-open interval [lo, hi); empty if lo >= hi."""
    if not lo < hi:
        return []
    return [r for r in poly.roots() if lo - ENDPOINT_TOL <= r < hi - ENDPOINT_TOL]


# -- critical equation ------------------------------------------------------


@dataclass(frozen=True)
class CriticalEq:
    kappa5: float
    kappa2: float
    kappa3: float
    C: float = C

    @classmethod
    def from_kappas(cls, ks: KappaSet) -> "CriticalEq":
        return cls(kappa5=ks.kappa5, kappa2=ks.kappa2, kappa3=ks.kappa3)

    def __call__(self, x):
        return critical_eq_eval(self, x)


def critical_eq_eval(eq: CriticalEq, x):
    """H(x); accepts scalars or numpy arrays. kappa5 == 0 uses the limit (no
    exponential term)."""
    k2, k3, k5 = eq.kappa2, eq.kappa3, eq.kappa5
    quad = x * x * k3 * (k2 + 1.0) - x * k3 * (k2 - 1.0)
    if k5 == 0:
        return quad
    return 2.0 * k5 * k2 * np.exp(-eq.C * x * x / (4.0 * k5)) + quad


def h_root_in(
    eq: CriticalEq,
    mu: float,
    grid_points: int = H_SCAN_POINTS,
    tol: float = H_BISECT_TOL,
) -> list[float]:
    """Roots of H in the open interval (0, mu) located by scan + bisection."""
    if not mu > 0:
        return []
    xs = np.linspace(0.0, mu, grid_points + 2)[1:-1]
    hs = np.asarray(critical_eq_eval(eq, xs), dtype=float)
    neg = hs < 0
    exact = hs == 0.0
    crossing = (neg[:-1] != neg[1:]) & ~exact[:-1] & ~exact[1:]

    def h(x: float) -> float:
        return float(critical_eq_eval(eq, x))

    roots: list[float] = []
    for i in np.flatnonzero(exact | np.append(crossing, False)):
        if exact[i]:
            roots.append(float(xs[i]))
        else:
            roots.append(_bisect(h, float(xs[i]), float(xs[i + 1]), tol))
    return roots


def _bisect(f: Callable[[float], float], a: float, b: float, tol: float) -> float:
    """Bisect until the bracket is below ``tol`` and then on to float resolution;
    returns whichever endpoint has the smaller residual."""
    fa, fb = f(a), f(b)
    while True:
        mid = 0.5 * (a + b)
        if mid in (a, b):
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm < 0) == (fa < 0):
            a, fa = mid, fm
        else:
            b, fb = mid, fm
    return a if abs(fa) <= abs(fb) else b


# -- regions ------------------------------------------------------------------


@dataclass(frozen=True)
class Interval:
    lo: float
    lo_closed: bool
    hi: float
    hi_closed: bool

    @property
    def empty(self) -> bool:
        if self.lo < self.hi:
            return False
        return not (self.lo == self.hi and self.lo_closed and self.hi_closed)

    def contains(self, x: float) -> bool:
        above = x >= self.lo if self.lo_closed else x > self.lo
        below = x <= self.hi if self.hi_closed else x < self.hi
        return above and below

    def intersect(self, other: "Interval") -> "Interval":
        if self.lo > other.lo:
            lo, lo_closed = self.lo, self.lo_closed
        elif other.lo > self.lo:
            lo, lo_closed = other.lo, other.lo_closed
        else:
            lo, lo_closed = self.lo, self.lo_closed and other.lo_closed
        if self.hi < other.hi:
            hi, hi_closed = self.hi, self.hi_closed
        elif other.hi < self.hi:
            hi, hi_closed = other.hi, other.hi_closed
        else:
            hi, hi_closed = self.hi, self.hi_closed and other.hi_closed
        return Interval(lo, lo_closed, hi, hi_closed)

    def __str__(self) -> str:
        return f"{'[' if self.lo_closed else '('}{_fmt(self.lo)}, {_fmt(self.hi)}{']' if self.hi_closed else ')'}"


def _fmt(x: float) -> str:
    return "inf" if x == math.inf else repr(x)


class RegionLabel(enum.Enum):
    S1 = "S1"
    S2 = "S2"
    S1_PER_INPUT = "S1_per_input"
    S2_PER_INPUT = "S2_per_input"


@dataclass(frozen=True)
class Region:
    """A union of disjoint, sorted, nonempty intervals over epsilon."""

    intervals: tuple[Interval, ...]
    label: RegionLabel

    def __post_init__(self):
        kept = sorted((iv for iv in self.intervals if not iv.empty), key=lambda iv: (iv.lo, not iv.lo_closed))
        object.__setattr__(self, "intervals", tuple(kept))

    @classmethod
    def single(cls, iv: Interval, label: RegionLabel) -> "Region":
        return cls((iv,), label)

    @classmethod
    def empty_region(cls, label: RegionLabel) -> "Region":
        return cls((), label)

    @property
    def empty(self) -> bool:
        return not self.intervals

    def contains(self, x: float) -> bool:
        return any(iv.contains(x) for iv in self.intervals)

    def intersect(self, other: "Region", label: RegionLabel | None = None) -> "Region":
        parts = [a.intersect(b) for a in self.intervals for b in other.intervals]
        return Region(tuple(parts), label or self.label)

    def __str__(self) -> str:
        if self.empty:
            return "empty"
        return " U ".join(str(iv) for iv in self.intervals)


def s1_for(ks: KappaSet) -> Region:
    return Region.single(Interval(ks.kappa4, True, ks.ln_kappa2, False), RegionLabel.S1_PER_INPUT)


def s2_for(ks: KappaSet) -> Region:
    return Region.single(Interval(0.0, False, min(ks.kappa4, ks.ln_kappa2), False), RegionLabel.S2_PER_INPUT)


def intersect_all(regions: Iterable[Region], label: RegionLabel) -> Region:
    regions = list(regions)
    out = regions[0]
    for r in regions[1:]:
        out = out.intersect(r)
    return Region(out.intervals, label)


# -- verdict ------------------------------------------------------------------


class Classification(enum.Enum):
    THEOREM1 = "Theorem1Asymptotic"
    THEOREM2 = "Theorem2Asymptotic"
    UNCLASSIFIED = "Unclassified"

    def __str__(self) -> str:
        return self.value


def classify(epsilon: float, ks: KappaSet) -> Classification:
    ln_k2 = ks.ln_kappa2
    if epsilon > max(ks.kappa4, ln_k2):
        return Classification.THEOREM1
    if ln_k2 < epsilon < ks.kappa4:
        return Classification.THEOREM2
    return Classification.UNCLASSIFIED


@dataclass(frozen=True)
class InputAnalysis:
    kappas: KappaSet
    s1: Region
    s2: Region
    poly_roots: tuple[float, ...]
    h_roots: tuple[float, ...]


@dataclass(frozen=True)
class TheoremVerdict:
    classification: Classification
    thm3a_holds: bool
    thm3b_holds: bool
    s1: Region  # certified S1: empty unless thm3a holds
    s2: Region  # certified S2: empty unless thm3b holds
    mu: float
    s1_raw: Region
    s2_raw: Region
    per_input: tuple[InputAnalysis, ...]
    epsilon: float | None = None
    target: int = 0
    notes: tuple[str, ...] = field(default=NOTES)


def regions_and_verdict(
    params: ShuffleParams,
    epsilon: float | None = None,
    target: int = 0,
    scan_points: int = H_SCAN_POINTS,
) -> TheoremVerdict:
    """Evaluate the hypotheses of the tightness theorems for every input value.

    ``target`` selects whose kappa2 is used for the asymptotic classification
    of ``epsilon``.
    """
    validate_params(params)
    kappas = all_kappas(params)
    kappa4 = kappas[0].kappa4
    mu = min(min(math.tanh(kappa4 / 2.0), math.tanh(ks.ln_kappa2 / 2.0)) for ks in kappas)

    per_input = []
    for ks in kappas:
        poly = CriticalPoly.from_kappas(ks)
        lo = math.exp(kappa4) if math.isfinite(kappa4) else math.inf
        poly_roots = poly_root_in(poly, lo, ks.kappa2)
        h_roots = h_root_in(CriticalEq.from_kappas(ks), mu, scan_points)
        per_input.append(InputAnalysis(ks, s1_for(ks), s2_for(ks), tuple(poly_roots), tuple(h_roots)))

    s1_raw = intersect_all((a.s1 for a in per_input), RegionLabel.S1)
    s2_raw = intersect_all((a.s2 for a in per_input), RegionLabel.S2)

    thm3a = all(kappa4 < a.kappas.ln_kappa2 and a.poly_roots for a in per_input)
    thm3a = thm3a and not s1_raw.empty
    thm3b = all(a.h_roots for a in per_input) and not s2_raw.empty

    classification = Classification.UNCLASSIFIED
    if epsilon is not None:
        classification = classify(epsilon, kappas[target])

    return TheoremVerdict(
        classification=classification,
        thm3a_holds=bool(thm3a),
        thm3b_holds=bool(thm3b),
        s1=s1_raw if thm3a else Region.empty_region(RegionLabel.S1),
        s2=s2_raw if thm3b else Region.empty_region(RegionLabel.S2),
        mu=mu,
        s1_raw=s1_raw,
        s2_raw=s2_raw,
        per_input=tuple(per_input),
        epsilon=epsilon,
        target=target,
    )


def classify_many(params: ShuffleParams, epsilons: Sequence[float], target: int = 0) -> list[Classification]:
    ks = all_kappas(params)[target]
    return [classify(e, ks) for e in epsilons]
