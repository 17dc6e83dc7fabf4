"""Acceptance criteria, shared by ``shuffle-blanket check`` and the test suite.

Each criterion returns a :class:`CheckResult` with the measured quantity next
to the threshold it is held to. Independent oracles (50-digit mpmath,
bisection root finding, enumeration) live here and never call the code paths
they check.
"""
from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .bounds import Case, delta_bound, ln_delta_expr, select_case
from .oracle import KrrMatrix, empirical_dist, histogram_dist, sample_shuffled, tight_adp, tight_dp_curve, total_variation
from .params import ShuffleParams, TargetPair, compute_kappas
from .tightness import Classification, CriticalEq, CriticalPoly, critical_eq_eval, h_root_in, poly_root_in

SEED = 20240601
MC_SEED = 12345


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    measured: str
    expected: str
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} [{self.number}] {self.name}: measured {self.measured}; "
                f"expected {self.expected} ({self.seconds:.2f}s)")


# -- independent high-precision oracle ---------------------------------------------


def mp_kappas(epsilon0: float, n: int, k: int, p: float, dps: int = 50) -> dict[str, object]:
    """Constants re-evaluated at ``dps`` digits straight from their definitions."""
    from mpmath import atanh, exp, log, mp, mpf, sinh

    with mp.workdps(dps):
        e0, p = mpf(epsilon0), mpf(p)
        c = 1 - exp(-2)
        kappa1_ln = log((exp(e0) - exp(-e0)) ** 2 * exp(c * n * exp(-e0)) / 4)
        kappa2 = 1 + (exp(e0) - 1) / (n + (exp(e0) - 1) * p * (n - 1))
        kappa3 = (n + (exp(e0) - 1) * (n * p + 1 - p)) / (exp(e0) + k - 1)
        arg = 2 * sinh(e0) / exp(e0 / 2)
        kappa4 = 2 * atanh(arg) if arg < 1 else None
        kappa5 = sinh(e0) ** 2 / n
        return {"ln_kappa1": kappa1_ln, "kappa2": kappa2, "kappa3": kappa3, "kappa4": kappa4, "kappa5": kappa5}


def mp_ln_delta(epsilon0: float, n: int, epsilon: float, dps: int = 50):
    from mpmath import exp, log, mp, mpf

    with mp.workdps(dps):
        e0, eps = mpf(epsilon0), mpf(epsilon)
        c = 1 - exp(-2)
        lhs = exp(-e0)
        rhs = (exp(eps) - 1) ** 2 / ((exp(eps) + 1) ** 2 * (exp(e0) - exp(-e0)) ** 2)
        case1 = lhs <= rhs
        expo = lhs if case1 else rhs
        val = (log((exp(eps) + 1) ** 2 * (exp(e0) - exp(-e0)) ** 2 / (4 * n * (exp(eps) - 1)))
               - c * n * expo)
        return ("Case1" if case1 else "Case2"), val


def _rel(a: float, b) -> float:
    b = float(b)
    return abs(a - b) / max(abs(b), 1e-300)


# -- criteria -------------------------------------------------------------------------


def criterion_1() -> CheckResult:
    rng = random.Random(SEED)
    worst = 0.0
    t0 = time.perf_counter()
    for _ in range(100):
        e0 = rng.uniform(1e-6, 2.0)
        n = rng.randint(1, 10_000)
        k = rng.randint(2, 10)
        w = [rng.random() for _ in range(k)]
        pi = tuple(v / sum(w) for v in w)
        target = rng.randrange(k)
        ks = compute_kappas(ShuffleParams(e0, n, k, pi), target)
        ref = mp_kappas(e0, n, k, pi[target])
        errs = [_rel(ks.ln_kappa1, ref["ln_kappa1"]), _rel(ks.kappa2, ref["kappa2"]),
                _rel(ks.kappa3, ref["kappa3"]), _rel(ks.kappa5, ref["kappa5"])]
        if ref["kappa4"] is None:
            errs.append(0.0 if math.isinf(ks.kappa4) else math.inf)
        else:
            errs.append(_rel(ks.kappa4, ref["kappa4"]))
        worst = max(worst, *errs)
    dt = time.perf_counter() - t0
    return CheckResult(1, "kappa oracle agreement (100 random tuples, 50 digits)",
                       worst <= 1e-10 and dt < 10.0,
                       f"max rel err {worst:.3e}, {dt:.2f}s", "<= 1e-10, < 10s", dt)


def criterion_2() -> CheckResult:
    from mpmath import atanh, exp, mp, mpf, sinh

    rng = random.Random(SEED + 2)
    disagree = skipped = 0
    t0 = time.perf_counter()
    with mp.workdps(30):
        for i in range(10_000):
            e0 = rng.uniform(1e-9, 0.64)
            k4 = float(2 * atanh(2 * sinh(mpf(e0)) / exp(mpf(e0) / 2)))
            # two thirds of the draws crowd the boundary
            if i % 3 == 0:
                eps = rng.uniform(1e-9, 3 * k4 + 1)
            else:
                width = 1e-6 if i % 3 == 1 else 1e-10
                eps = k4 * (1 + rng.uniform(-width, width))
            if abs(eps - k4) <= 1e-12:
                skipped += 1
                continue
            if (select_case(e0, eps) is Case.CASE1) != (eps >= k4):
                disagree += 1
    dt = time.perf_counter() - t0
    return CheckResult(2, "case boundary equals eps >= kappa4 (10^4 draws)", disagree == 0 and dt < 5.0,
                       f"{disagree} disagreements ({skipped} in 1e-12 band skipped), {dt:.2f}s",
                       "0 disagreements, < 5s", dt)


def criterion_3() -> CheckResult:
    rng = random.Random(SEED + 3)
    worst = 0.0
    t0 = time.perf_counter()
    for _ in range(100):
        e0 = rng.uniform(1e-6, 0.64)
        n = rng.choice((10, 100, 1000))
        params = ShuffleParams.uniform(e0, n, 2)
        k4 = compute_kappas(params).kappa4
        a = ln_delta_expr(params, k4, Case.CASE1)
        b = ln_delta_expr(params, k4, Case.CASE2)
        worst = max(worst, abs(a - b) / max(abs(a), abs(b)))
    dt = time.perf_counter() - t0
    return CheckResult(3, "delta continuous at eps = kappa4", worst <= 1e-10,
                       f"max rel gap {worst:.3e}", "<= 1e-10", dt)


def criterion_4() -> CheckResult:
    t0 = time.perf_counter()
    cases = [((0.1, 10, 0.5), Case.CASE1, 4.330e-6), ((0.5, 100, 1.0), Case.CASE2, 9.03e-10)]
    ok, parts = True, []
    for (e0, n, eps), case, expected in cases:
        b = delta_bound(ShuffleParams.uniform(e0, n, 2), eps)
        rel = abs(b.delta_clamped - expected) / expected
        ok &= b.case is case and rel <= 0.005
        parts.append(f"{b.case} delta={b.delta_clamped:.5e} (rel {rel:.2%})")
    dt = time.perf_counter() - t0
    return CheckResult(4, "spot values of the bound", ok, "; ".join(parts),
                       "Case1 4.330e-06 +-0.5%; Case2 9.03e-10 +-0.5%", dt)


def criterion_5() -> CheckResult:
    t0 = time.perf_counter()
    e0 = math.log(3.0)
    p = ShuffleParams.uniform(e0, 1, 2)
    pair = TargetPair(0, 1)
    a = tight_adp(p, (), pair, 0.0)
    b = tight_adp(p, (), pair, math.log(3.0))
    d = histogram_dist((0, 0), KrrMatrix(2, e0))
    want = {(2, 0): 9 / 16, (1, 1): 6 / 16, (0, 2): 1 / 16}
    dist_err = max(abs(d[h] - v) for h, v in want.items())
    extra = set(d.probs) - set(want)
    ok = abs(a - 0.5) <= 1e-12 and abs(b) <= 1e-12 and dist_err <= 1e-12 and not extra
    dt = time.perf_counter() - t0
    return CheckResult(5, "oracle exactness (n=1, n=2, eps0=ln 3)", ok,
                       f"adp(0)={a!r}, adp(ln3)={b!r}, hist err={dist_err:.1e}",
                       "0.5, 0, (9/16, 6/16, 1/16) to 1e-12", dt)


def soundness_grid() -> list[dict]:
    """Exact tight delta vs the bound over the desk-scale grid."""
    rows = []
    eps_grid = (0.2, 0.5, 1.0)
    for e0 in (0.1, 0.3, 0.5):
        for n in (5, 10, 20):
            for k in (2, 3):
                params = ShuffleParams.uniform(e0, n, k)
                bounds = [delta_bound(params, e) for e in eps_grid]
                for label, x in (("all-x0", 0), ("all-x1", 1)):
                    exact = tight_dp_curve(params, (x,) * (n - 1), eps_grid)
                    for eps, b, t in zip(eps_grid, bounds, exact):
                        rows.append(dict(eps0=e0, n=n, k=k, others=label, epsilon=eps, tight_dp=t,
                                         bound=b.delta_clamped, ln_delta=b.ln_delta,
                                         ratio=t / math.exp(b.ln_delta)))
    return rows


def criterion_6() -> CheckResult:
    t0 = time.perf_counter()
    rows = soundness_grid()
    bad = [r for r in rows if r["tight_dp"] > r["bound"]]
    dt = time.perf_counter() - t0
    worst = max(r["ratio"] for r in rows)
    detail = f"{len(bad)} violations of {len(rows)}, max exact/bound ratio {worst:.3e}, {dt:.2f}s"
    if bad:
        detail += "; first: " + repr(bad[0])
    return CheckResult(6, "bound soundness vs exact oracle", not bad and dt < 60.0, detail,
                       "0 violations, < 60s", dt)


def criterion_7() -> CheckResult:
    t0 = time.perf_counter()
    krr = KrrMatrix(2, 0.5)
    data = (0,) * 10
    s1 = sample_shuffled(data, krr, 1_000_000, MC_SEED)
    s2 = sample_shuffled(data, krr, 1_000_000, MC_SEED)
    tv = total_variation(empirical_dist(s1), histogram_dist(data, krr).probs)
    same = s1.tobytes() == s2.tobytes()
    dt = time.perf_counter() - t0
    return CheckResult(7, "Monte Carlo matches exact law (m=1e6)", tv <= 0.01 and same,
                       f"TV={tv:.3e}, rerun identical={same}", "TV <= 0.01, identical rerun", dt)


def bisection_roots(f: Callable[[float], float], lo: float, hi: float, points: int = 4001) -> list[float]:
    """Plain scan-and-bisect root finder, kept separate from the library's."""
    xs = np.linspace(lo, hi, points)
    fs = np.asarray(f(xs), dtype=float)
    sign_change = np.flatnonzero((fs[:-1] < 0) != (fs[1:] < 0))
    out = [float(x) for x in xs[:-1][fs[:-1] == 0]]
    for i in sign_change:
        if fs[i] == 0:
            continue
        a, b = float(xs[i]), float(xs[i + 1])
        fa = fs[i]
        for _ in range(200):
            m = 0.5 * (a + b)
            if m in (a, b):
                break
            if (f(m) < 0) == (fa < 0):
                a = m
            else:
                b = m
        out.append(0.5 * (a + b))
    out.sort()
    return out


def planted_poly(r1: float, r2: float) -> CriticalPoly | None:
    """Normalized critical polynomial whose roots are r1, r2, when one exists."""
    s, p = r1 + r2, r1 * r2
    d = p - s
    if not -1 < d < 3:
        return None
    q = (3 - d) / (d + 1)
    kappa2 = (p * (1 + q) - 1) / q
    if kappa2 <= max(r1, r2):
        return None
    return CriticalPoly(q=q, kappa2=kappa2)


def criterion_8() -> CheckResult:
    rng = random.Random(SEED + 8)
    t0 = time.perf_counter()
    worst = 0.0
    mismatched = made = 0
    while made < 1000:
        r1 = rng.uniform(1.0 + 1e-3, 4.0)
        r2 = rng.uniform(1.0 + 1e-3, 4.0)
        if abs(r1 - r2) < 1e-2:
            continue
        poly = planted_poly(r1, r2)
        if poly is None:
            continue
        made += 1
        lo = min(r1, r2) - rng.uniform(0.0, 0.5)
        hi = max(r1, r2) + rng.uniform(1e-3, 0.5)
        got = poly_root_in(poly, lo, hi)
        ref = bisection_roots(poly, lo, hi)
        if len(got) != len(ref) or len(got) != 2:
            mismatched += 1
            continue
        worst = max(worst, *(abs(a - b) for a, b in zip(got, sorted(ref))))

    # H residuals on equations built to have roots, plus real instances
    h_worst, h_found = 0.0, 0
    for _ in range(200):
        eq = CriticalEq(kappa5=rng.uniform(1e-4, 1e-2), kappa2=rng.uniform(1.5, 5.0), kappa3=rng.uniform(0.5, 5.0))
        roots = h_root_in(eq, 1.0)
        h0 = float(critical_eq_eval(eq, 0.0))
        for r in roots:
            h_found += 1
            h_worst = max(h_worst, abs(float(critical_eq_eval(eq, r))) / h0)
    dt = time.perf_counter() - t0
    ok = mismatched == 0 and worst <= 1e-9 and h_found > 0 and h_worst <= 1e-9
    return CheckResult(8, "root finders cross-check", ok,
                       f"poly: {mismatched} count mismatches, max diff {worst:.2e}; "
                       f"H: {h_found} roots, max |H(r)|/H(0) {h_worst:.2e}",
                       "poly diff <= 1e-9; |H(r)| <= 1e-9 H(0)", dt)


def criterion_9() -> CheckResult:
    from .cli import regions_report

    t0 = time.perf_counter()
    params = ShuffleParams.uniform(0.5, 100, 2)
    report = {(s, k): v for s, k, v in regions_report(params, [1.0, 3.0], 0, 10_000)}
    got = {
        "S1": report[("intersection", "S1")],
        "thm3a": report[("theorem3", "thm3a")],
        "thm3b": report[("theorem3", "thm3b")],
        "eps=1.0": report[("classification", "epsilon=1.0")],
        "eps=3.0": report[("classification", "epsilon=3.0")],
    }
    want = {"S1": "empty", "thm3a": "false", "thm3b": "false",
            "eps=1.0": Classification.THEOREM2.value, "eps=3.0": Classification.THEOREM1.value}
    # hand comparison of the constants behind the verdicts
    ks = compute_kappas(params)
    hand = ks.kappa4 > ks.ln_kappa2 and ks.ln_kappa2 < 1.0 < ks.kappa4 and 3.0 > ks.kappa4
    dt = time.perf_counter() - t0
    return CheckResult(9, "region logic (eps0=0.5, n=100, k=2)", got == want and hand,
                       ", ".join(f"{k}={v}" for k, v in got.items()),
                       ", ".join(f"{k}={v}" for k, v in want.items()), dt)


CRITERIA = (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9)


def run_all() -> list[CheckResult]:
    return [c() for c in CRITERIA]
