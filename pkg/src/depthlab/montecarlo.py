"""Seeded random generation and independent sampling routes for node depths.

Three routes produce depth samples: building an actual tree, drawing from the
two-stage position/record representation, and counting quickselect
recursions.  They agree in distribution, which the test suite exploits for
cross-validation against the exact law.

Reproducibility contract: a stream is identified by (seed, stream_id) and
always replays the same draws.  Streams are not shared between threads; a
parallel run assigns one stream per worker and reduces in stream order, so
aggregates do not depend on scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .distributions import Pmf
from .trees import Permutation, build_bst, find_select, node_depth

__all__ = [
    "RngStream",
    "EmpiricalPmf",
    "random_permutation",
    "sample_depth_bst",
    "sample_depth_representation",
    "sample_find_recursions",
    "sample_random_key_depth",
    "empirical_pmf",
    "collect_samples",
]

@dataclass
class RngStream:
    """Deterministic random stream keyed by (seed, stream_id)."""

    seed: int
    stream_id: int = 0
    _gen: np.random.Generator | None = field(default=None, repr=False, compare=False)

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            seq = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
            self._gen = np.random.Generator(np.random.PCG64(seq))
        return self._gen


def random_permutation(n: int, rng: RngStream) -> Permutation:
    """Uniform random permutation of 1..n (Fisher-Yates with unbiased bounded ints)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    values = rng.generator.permutation(n) + 1
    return Permutation(tuple(int(v) for v in values))


def sample_depth_bst(n: int, l: int, rng: RngStream) -> int:
    """Route A: insert a random permutation into a tree and read off the depth."""
    _check_nl(n, l)
    return node_depth(build_bst(random_permutation(n, rng)), l)


@lru_cache(maxsize=2048)
def _hypergeom_cdf(N: int, M: int, draws: int) -> tuple[int, np.ndarray]:
    """Support start and cdf of the hypergeometric count of white balls.

    Masses come from the ratio recurrence normalized at the end, which is
    exact up to rounding; sampling inverts this cdf directly, no rejection.
    """
    k_lo = max(0, draws - (N - M))
    k_hi = min(draws, M)
    ks = np.arange(k_lo, k_hi)
    # Log-space recurrence anchored at the mode: the ratio of the modal mass
    # to the edge mass overflows binary64 once the support is a few hundred
    # points wide.  Denominator factors stay >= 1 on the admissible support.
    log_ratios = np.log((M - ks) * (draws - ks)) - np.log(
        (ks + 1.0) * (N - M - draws + ks + 1.0)
    )
    log_rel = np.concatenate(([0.0], np.cumsum(log_ratios)))
    rel = np.exp(log_rel - log_rel.max())
    cdf = np.cumsum(rel / rel.sum())
    cdf.flags.writeable = False
    return k_lo, cdf


def _draw_hypergeom(N: int, M: int, draws: int, gen: np.random.Generator) -> int:
    if M == 0 or draws == 0:
        return 0
    k_lo, cdf = _hypergeom_cdf(N, M, draws)
    u = gen.random()
    return k_lo + int(np.searchsorted(cdf, u, side="left"))


def _bernoulli_harmonic_sum(m: int, gen: np.random.Generator) -> int:
    """Draw of sum_{i=1..m} Bernoulli(1/i)."""
    if m <= 0:
        return 0
    u = gen.random(m)
    return int((u * np.arange(1, m + 1) < 1.0).sum())


def sample_depth_representation(n: int, l: int, rng: RngStream) -> int:
    """Route B: position uniform, split hypergeometric, two Bernoulli sums."""
    _check_nl(n, l)
    gen = rng.generator
    position = int(gen.integers(1, n + 1))
    g = _draw_hypergeom(n - 1, l - 1, position - 1, gen)
    return _bernoulli_harmonic_sum(g, gen) + _bernoulli_harmonic_sum(
        position - 1 - g, gen
    )


def sample_find_recursions(n: int, l: int, rng: RngStream) -> int:
    """Route C: recursion count of quickselect at rank l on a random permutation."""
    _check_nl(n, l)
    return find_select(random_permutation(n, rng), l).recursions


def sample_random_key_depth(n: int, rng: RngStream) -> int:
    """Depth of a uniformly random key, the key drawn independently of the tree.

    Uses the representation route internally so the cost per sample is O(n)
    rather than the O(n log n) tree build; the routes agree in distribution
    and the agreement is itself under test.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    gen = rng.generator
    key = int(gen.integers(1, n + 1))
    position = int(gen.integers(1, n + 1))
    g = _draw_hypergeom(n - 1, key - 1, position - 1, gen)
    return _bernoulli_harmonic_sum(g, gen) + _bernoulli_harmonic_sum(
        position - 1 - g, gen
    )


@dataclass(frozen=True)
class EmpiricalPmf:
    """Depth counts from a batch of samples."""

    counts: tuple[int, ...]
    offset: int
    sample_size: int

    @classmethod
    def from_samples(cls, samples: Sequence[int]) -> "EmpiricalPmf":
        if len(samples) == 0:
            raise ValueError("no samples")
        arr = np.asarray(samples, dtype=np.int64)
        if np.any(arr < 0):
            raise ValueError("samples must be nonnegative")
        lo = int(arr.min())
        counts = np.bincount(arr - lo)
        return cls(counts=tuple(int(c) for c in counts), offset=lo, sample_size=len(arr))

    def to_pmf(self) -> Pmf:
        masses = np.asarray(self.counts, dtype=np.float64) / self.sample_size
        return Pmf.from_masses(self.offset, masses)


def empirical_pmf(samples: Sequence[int]) -> Pmf:
    """Normalized counts of integer samples; the tail is exactly zero."""
    return EmpiricalPmf.from_samples(samples).to_pmf()


def collect_samples(
    route: str,
    n: int,
    l: int | None,
    count: int,
    seed: int,
    streams: int = 1,
) -> list[int]:
    """Draw depth samples on the named route, partitioned over streams.

    The per-stream quotas and the stream order are fixed, so the output is
    identical no matter how the streams are actually scheduled.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if streams < 1:
        raise ValueError(f"streams must be >= 1, got {streams}")
    out: list[int] = []
    base, extra = divmod(count, streams)
    for sid in range(streams):
        quota = base + (1 if sid < extra else 0)
        if quota == 0:
            continue
        rng = RngStream(seed=seed, stream_id=sid)
        if route == "bst":
            out.extend(sample_depth_bst(n, l, rng) for _ in range(quota))
        elif route == "representation":
            out.extend(sample_depth_representation(n, l, rng) for _ in range(quota))
        elif route == "find":
            out.extend(sample_find_recursions(n, l, rng) for _ in range(quota))
        elif route == "key":
            out.extend(sample_random_key_depth(n, rng) for _ in range(quota))
        else:
            raise ValueError(f"unknown route {route!r}")
    return out


def _check_nl(n: int, l: int) -> None:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 1 <= l <= n:
        raise ValueError(f"l must be in 1..{n}, got {l}")
