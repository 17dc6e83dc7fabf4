"""Instance parameters for a shuffled k-RR mechanism and the derived constants.

The constants kappa1..kappa5 parameterize the blanket bound and the tightness
conditions. kappa1 grows like exp(C * n * e^-eps0) and overflows a double
already for n around 1000, so it is only ever exposed through its logarithm.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

C = 1.0 - math.exp(-2.0)

PI_SUM_TOL = 1e-9


class ParamError(ValueError):
    """Base class for invalid-input errors. ``field`` names the offending input."""

    field = ""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        if field is not None:
            self.field = field


class NonPositiveEpsilon0(ParamError):
    field = "epsilon0"


class BadAlphabet(ParamError):
    field = "k"


class BadDistribution(ParamError):
    field = "pi"


class BadSize(ParamError):
    field = "n"


class BadTarget(ParamError):
    field = "target"


@dataclass(frozen=True)
class ShuffleParams:
    """An instance (epsilon0, n, k, pi); validated on construction."""

    epsilon0: float
    n: int
    k: int
    pi: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if not self.pi and isinstance(self.k, int) and self.k >= 2:
            object.__setattr__(self, "pi", uniform(self.k))
        else:
            object.__setattr__(self, "pi", tuple(float(p) for p in self.pi))
        validate_params(self)

    @classmethod
    def uniform(cls, epsilon0: float, n: int, k: int) -> "ShuffleParams":
        return cls(epsilon0, n, k, uniform(k))


def uniform(k: int) -> tuple[float, ...]:
    return tuple(1.0 / k for _ in range(k))


def validate_params(params: ShuffleParams) -> None:
    """Raise the matching :class:`ParamError` subclass if any invariant fails."""
    e0 = params.epsilon0
    if not (isinstance(e0, (int, float)) and math.isfinite(e0) and e0 > 0):
        raise NonPositiveEpsilon0(f"epsilon0 must be a finite positive real, got {e0!r}")
    if isinstance(params.n, bool) or not isinstance(params.n, int) or params.n < 1:
        raise BadSize(f"n must be an integer >= 1, got {params.n!r}")
    if isinstance(params.k, bool) or not isinstance(params.k, int) or params.k < 2:
        raise BadAlphabet(f"k must be an integer >= 2, got {params.k!r}")
    pi = params.pi
    if len(pi) != params.k:
        raise BadDistribution(f"pi must have k={params.k} entries, got {len(pi)}")
    if any(not math.isfinite(p) or p < 0 for p in pi):
        raise BadDistribution(f"pi entries must be finite and non-negative: {pi!r}")
    total = math.fsum(pi)
    if abs(total - 1.0) > PI_SUM_TOL:
        raise BadDistribution(f"pi must sum to 1 (got {total!r})")


@dataclass(frozen=True)
class TargetPair:
    """The two values the fixed user may report, x0 != x1."""

    x0: int
    x1: int

    def check(self, k: int) -> None:
        if self.x0 == self.x1:
            raise BadTarget(f"target pair needs x0 != x1, got ({self.x0}, {self.x1})", "pair")
        for x in (self.x0, self.x1):
            if not 0 <= x < k:
                raise BadTarget(f"target element {x} outside alphabet 0..{k - 1}", "pair")


@dataclass(frozen=True)
class KappaSet:
    ln_kappa1: float
    kappa2: float
    kappa3: float
    kappa4: float  # math.inf when the artanh argument is >= 1
    kappa5: float
    target: int

    @property
    def ln_kappa2(self) -> float:
        return math.log(self.kappa2)

    @property
    def kappa4_finite(self) -> bool:
        return math.isfinite(self.kappa4)


def log_2sinh(x: float) -> float:
    """ln(e^x - e^-x) for x > 0 without overflow or cancellation."""
    if x > 20.0:
        return x + math.log1p(-math.exp(-2.0 * x))
    return math.log(2.0 * math.sinh(x))


def kappa4_argument(epsilon0: float) -> float:
    """2 sinh(eps0) / e^(eps0/2)."""
    if epsilon0 > 20.0:
        return math.exp(0.5 * epsilon0)
    return 2.0 * math.sinh(epsilon0) * math.exp(-0.5 * epsilon0)


def compute_kappa4(epsilon0: float) -> float:
    """2 artanh(2 sinh(eps0) / e^(eps0/2)), or inf outside the artanh domain."""
    arg = kappa4_argument(epsilon0)
    if arg >= 1.0:
        return math.inf
    return 2.0 * math.atanh(arg)


def compute_kappas(params: ShuffleParams, target: int = 0) -> KappaSet:
    validate_params(params)
    if isinstance(target, bool) or not isinstance(target, int) or not 0 <= target < params.k:
        raise BadTarget(f"target must be in 0..{params.k - 1}, got {target!r}")
    e0, n, k = params.epsilon0, params.n, params.k
    p = params.pi[target]
    # 1 / (e^eps0 - 1), finite for every eps0 > 0
    inv_em1 = math.exp(-e0) / -math.expm1(-e0)

    ln_kappa1 = 2.0 * log_2sinh(e0) + C * n * math.exp(-e0) - math.log(4.0)
    kappa2 = 1.0 + 1.0 / (n * inv_em1 + p * (n - 1))
    kappa3 = (n * inv_em1 + n * p + 1.0 - p) / (1.0 + k * inv_em1)
    try:
        kappa5 = math.sinh(e0) ** 2 / n
    except OverflowError:  # eps0 beyond ~355
        kappa5 = math.inf
    return KappaSet(
        ln_kappa1=ln_kappa1,
        kappa2=kappa2,
        kappa3=kappa3,
        kappa4=compute_kappa4(e0),
        kappa5=kappa5,
        target=target,
    )


def all_kappas(params: ShuffleParams) -> list[KappaSet]:
    """KappaSet for every input value, ordered by index."""
    return [compute_kappas(params, x) for x in range(params.k)]


def parse_pi(spec: str | Sequence[float], k: int) -> tuple[float, ...]:
    """Accept ``"uniform"``, a comma list, or a sequence of floats."""
    if isinstance(spec, str):
        s = spec.strip()
        if s.lower() == "uniform":
            return uniform(k)
        try:
            return tuple(float(v) for v in s.split(",") if v.strip())
        except ValueError as exc:
            raise BadDistribution(f"cannot parse pi {spec!r}") from exc
    return tuple(float(v) for v in spec)
