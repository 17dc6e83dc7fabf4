"""Exact small-instance shuffle model and a seeded Monte Carlo sampler.

A uniformly shuffled message vector carries exactly the information in its
histogram, so every exact computation here runs on count vectors.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .params import ParamError, ShuffleParams, TargetPair, validate_params

MAX_N = 25
MAX_K = 5
SUM_TOL = 1e-9

RNG_ALGORITHM = "numpy.random.Philox(4x64-10)"
CHUNK_SIZE = 1 << 16

Histogram = tuple  # k non-negative ints summing to n


class TooLarge(ParamError):
    field = "n"


class MismatchedSupport(ParamError):
    field = "distribution"


class BadDataset(ParamError):
    field = "others"


@dataclass(frozen=True)
class KrrMatrix:
    """k-ary randomized response with local privacy level epsilon0."""

    k: int
    epsilon0: float

    @property
    def p_same(self) -> float:
        return 1.0 / (1.0 + (self.k - 1) * math.exp(-self.epsilon0))

    @property
    def p_diff(self) -> float:
        return 1.0 / (math.exp(self.epsilon0) + self.k - 1)

    def row(self, x: int) -> list[float]:
        r = [self.p_diff] * self.k
        r[x] = self.p_same
        return r

    def matrix(self) -> np.ndarray:
        return np.array([self.row(x) for x in range(self.k)])


@dataclass(frozen=True)
class HistogramDist:
    n: int
    k: int
    probs: Mapping[Histogram, float]

    def __post_init__(self):
        total = math.fsum(self.probs.values())
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"histogram probabilities sum to {total!r}, not 1")

    def __getitem__(self, h: Histogram) -> float:
        return self.probs.get(tuple(h), 0.0)

    def support(self) -> list[Histogram]:
        return sorted(self.probs)


def _check_dataset(dataset: Sequence[int], k: int) -> tuple[int, ...]:
    entries = tuple(int(x) for x in dataset)
    if not entries:
        raise BadDataset("dataset must contain at least one entry", "dataset")
    for x in entries:
        if not 0 <= x < k:
            raise BadDataset(f"dataset entry {x} outside alphabet 0..{k - 1}", "dataset")
    return entries


def _guard(n: int, k: int) -> None:
    if n > MAX_N or k > MAX_K:
        raise TooLarge(f"exact oracle limited to n <= {MAX_N}, k <= {MAX_K} (got n={n}, k={k})")


def histogram_dist(dataset: Sequence[int], krr: KrrMatrix) -> HistogramDist:
    """Exact law of the shuffled output for ``dataset``.

    Users are folded in one at a time, each spreading the mass of every
    partial count vector over its k possible reports.
    """
    k = krr.k
    entries = _check_dataset(dataset, k)
    _guard(len(entries), k)
    dist: dict[Histogram, float] = {(0,) * k: 1.0}
    for x in entries:
        row = krr.row(x)
        nxt: dict[Histogram, float] = {}
        for h, p in dist.items():
            for y in range(k):
                h2 = h[:y] + (h[y] + 1,) + h[y + 1:]
                nxt[h2] = nxt.get(h2, 0.0) + p * row[y]
        dist = nxt
    return HistogramDist(len(entries), k, dist)


def hockey_stick_delta(p0: HistogramDist, p1: HistogramDist, epsilon: float) -> float:
    """sum_h max(P0(h) - e^eps P1(h), 0): the tight delta for P0 vs P1."""
    if (p0.n, p0.k) != (p1.n, p1.k):
        raise MismatchedSupport(f"distributions over different spaces: {(p0.n, p0.k)} vs {(p1.n, p1.k)}")
    if epsilon < 0:
        raise ParamError(f"epsilon must be >= 0, got {epsilon!r}", "epsilon")
    scale = math.exp(epsilon)
    total = math.fsum(max(p - scale * p1[h], 0.0) for h, p in p0.probs.items())
    return min(max(total, 0.0), 1.0)


def neighbouring_dists(
    params: ShuffleParams, others: Sequence[int], pair: TargetPair
) -> tuple[HistogramDist, HistogramDist]:
    validate_params(params)
    pair.check(params.k)
    others = tuple(others)
    if len(others) != params.n - 1:
        raise BadDataset(f"others must have n-1={params.n - 1} entries, got {len(others)}")
    krr = KrrMatrix(params.k, params.epsilon0)
    return (
        histogram_dist(others + (pair.x0,), krr),
        histogram_dist(others + (pair.x1,), krr),
    )


def tight_adp(params: ShuffleParams, others: Sequence[int], pair: TargetPair, epsilon: float) -> float:
    """Exact tight delta between D(x0) and D(x1) with the other entries fixed."""
    d0, d1 = neighbouring_dists(params, others, pair)
    return hockey_stick_delta(d0, d1, epsilon)


def ordered_pairs(k: int) -> list[TargetPair]:
    return [TargetPair(a, b) for a, b in itertools.permutations(range(k), 2)]


def tight_dp(params: ShuffleParams, others: Sequence[int], epsilon: float) -> float:
    """Maximum of :func:`tight_adp` over all ordered input pairs."""
    return max(tight_dp_curve(params, others, [epsilon]))


def tight_dp_curve(params: ShuffleParams, others: Sequence[int], epsilons: Iterable[float]) -> list[float]:
    """:func:`tight_dp` at several epsilons, building each distribution once."""
    validate_params(params)
    others = tuple(others)
    if len(others) != params.n - 1:
        raise BadDataset(f"others must have n-1={params.n - 1} entries, got {len(others)}")
    krr = KrrMatrix(params.k, params.epsilon0)
    dists = [histogram_dist(others + (x,), krr) for x in range(params.k)]
    out = []
    for eps in epsilons:
        out.append(max(hockey_stick_delta(dists[p.x0], dists[p.x1], eps) for p in ordered_pairs(params.k)))
    return out


# -- Monte Carlo ----------------------------------------------------------------


def _sample_chunk(entries: np.ndarray, krr: KrrMatrix, m: int, seed: int) -> np.ndarray:
    rng = np.random.Generator(np.random.Philox(seed))
    k, n = krr.k, len(entries)
    keep = rng.random((m, n)) < krr.p_same
    other = rng.integers(0, k - 1, size=(m, n))
    # shift so that `other` never equals the true entry
    other = other + (other >= entries)
    reports = np.where(keep, entries, other)
    offsets = reports + k * np.arange(m)[:, None]
    return np.bincount(offsets.ravel(), minlength=m * k).reshape(m, k)


def sample_shuffled(dataset: Sequence[int], krr: KrrMatrix, m: int, seed: int) -> np.ndarray:
    """Draw ``m`` shuffled outputs, returned as an (m, k) array of histograms.

    Chunk ``c`` of ``CHUNK_SIZE`` draws uses the generator seeded with
    ``seed + c``, so the result does not depend on how chunks are scheduled.
    """
    if m < 1:
        raise ParamError(f"sample count must be >= 1, got {m!r}", "samples")
    entries = np.asarray(_check_dataset(dataset, krr.k), dtype=np.int64)
    chunks = []
    for c, start in enumerate(range(0, m, CHUNK_SIZE)):
        size = min(CHUNK_SIZE, m - start)
        chunks.append(_sample_chunk(entries, krr, size, (seed + c) % (1 << 64)))
    return np.concatenate(chunks, axis=0)


def empirical_dist(samples: np.ndarray) -> dict[Histogram, float]:
    rows, counts = np.unique(samples, axis=0, return_counts=True)
    m = samples.shape[0]
    return {tuple(int(v) for v in r): c / m for r, c in zip(rows, counts)}


def total_variation(p: Mapping[Histogram, float], q: Mapping[Histogram, float]) -> float:
    keys = set(p) | set(q)
    return 0.5 * math.fsum(abs(p.get(h, 0.0) - q.get(h, 0.0)) for h in keys)
