"""Exact law of the depth of the node holding key l in a random BST of size n.

The depth splits into the number of right moves and left moves on the search
path; conditionally on the pair (i, j) of smaller/larger predecessor counts
these are independent record counts.  The exact pmf is
therefore a mixture, over an explicit joint grid for (i, j), of convolutions
of record-count laws.  The mixture is evaluated as two matrix products so the
cost is O(l (n-l) s + l s^2) with s the record-pmf support width, which keeps
n around 3 * 10^4 tractable.

Closed-form mean and variance, the explicit Poisson approximation bound, the
mixed Poisson Wasserstein distance and two auxiliary inequalities are exposed
as report operations, plus a brute-force enumeration oracle for small n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations as _all_permutations

import numpy as np
from scipy.special import gammaln

from .distributions import (
    BoundReport,
    Distance,
    HarmonicTable,
    Pmf,
    poisson_pmf,
    shared_harmonic_table,
    total_variation,
    wasserstein,
)
from .mixing import limit_mixing_measure, mixed_poisson_pmf

__all__ = [
    "CapExceededError",
    "PredecessorJoint",
    "MoveJoint",
    "DEFAULT_N_CAP",
    "BRUTE_FORCE_CAP",
    "predecessor_joint",
    "exact_depth_pmf",
    "move_joint_pmf",
    "depth_mean",
    "depth_variance",
    "poisson_bound_report",
    "mixpo_distance",
    "mixing_variance_report",
    "hypergeometric_log_bound_report",
    "brute_force_depth_pmf",
]

# Exact computation is capped by the memory/time of the joint grid sweep; the
# grid for (n, l) holds l * (n - l + 1) cells, ~2 GiB of transient traffic at
# the cap for central keys.
DEFAULT_N_CAP = 32768

# The enumeration oracle visits all n! permutations.
BRUTE_FORCE_CAP = 9

_JD_BLOCK_ROWS = 256


class CapExceededError(Exception):
    """Raised when a computation would exceed its configured size cap."""

    def __init__(self, what: str, n: int, cap: int):
        super().__init__(f"{what}: n={n} exceeds the cap {cap}")
        self.n = n
        self.cap = cap


def _validate_nl(n: int, l: int) -> None:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 1 <= l <= n:
        raise ValueError(f"l must be in 1..{n}, got {l}")


@dataclass(frozen=True)
class PredecessorJoint:
    """Joint law of (smaller, larger) predecessor counts of key l.

    weights[i][j] = P(i earlier-inserted keys below l and j above l), for
    0 <= i <= l-1 and 0 <= j <= n-l.  Rows sum to 1/l and columns to
    1/(n-l+1): each count is marginally uniform.
    """

    n: int
    l: int
    weights: np.ndarray

    def __post_init__(self) -> None:
        self.weights.flags.writeable = False


@dataclass(frozen=True)
class MoveJoint:
    """Joint pmf of (right moves, left moves) on the path to key l.

    grid[r][s] = P(r right moves, s left moves); the grid sums to
    1 - truncated_tail.
    """

    n: int
    l: int
    grid: np.ndarray
    truncated_tail: float

    def __post_init__(self) -> None:
        self.grid.flags.writeable = False

    def right_marginal(self) -> Pmf:
        return Pmf.from_masses(0, self.grid.sum(axis=1), self.truncated_tail)

    def left_marginal(self) -> Pmf:
        return Pmf.from_masses(0, self.grid.sum(axis=0), self.truncated_tail)

    def depth_pmf(self) -> Pmf:
        r, s = self.grid.shape
        diag = np.add.outer(np.arange(r), np.arange(s)).ravel()
        masses = np.bincount(diag, weights=self.grid.ravel())
        return Pmf.from_masses(0, masses, self.truncated_tail)


@lru_cache(maxsize=8)
def _ln_table(n: int) -> np.ndarray:
    t = np.zeros(n + 1)
    t[1:] = np.log(np.arange(1, n + 1, dtype=np.float64))
    t.flags.writeable = False
    return t


def _jd_log_starts(n: int, l: int, i: np.ndarray) -> np.ndarray:
    # log of column j=0: (1/n) * C(n-1-i, l-1-i) / C(n-1, l-1).
    return (
        -math.log(n)
        + gammaln(n - i)
        - gammaln(l - i)
        - gammaln(n)
        + gammaln(l)
    )


def _jd_block(n: int, l: int, i0: int, i1: int) -> np.ndarray:
    """Rows i0..i1-1 of the joint predecessor grid.

    Each row starts from a log-gamma value at j=0 and extends across j by the
    cumulative sum of log ratios; rows are then renormalized to their exact
    marginal mass 1/l, which removes the cumulative-sum drift.  Log space is
    required because row starts underflow binary64 for central keys once
    n is in the thousands.
    """
    rows = np.arange(i0, i1, dtype=np.float64)
    start = _jd_log_starts(n, l, rows)
    width = n - l
    if width == 0:
        return np.exp(start)[:, None]
    lt = _ln_table(n)
    i_idx = np.arange(i0, i1)[:, None]
    j_idx = np.arange(width)[None, :]
    log_ratio = (
        lt[i_idx + j_idx + 1]
        + lt[n - l - j_idx]
        - lt[j_idx + 1]
        - lt[n - 1 - i_idx - j_idx]
    )
    logw = np.empty((i1 - i0, width + 1))
    logw[:, 0] = start
    np.cumsum(log_ratio, axis=1, out=logw[:, 1:])
    logw[:, 1:] += start[:, None]
    w = np.exp(logw)
    w *= (1.0 / l) / w.sum(axis=1, keepdims=True)
    return w


def predecessor_joint(n: int, l: int) -> PredecessorJoint:
    """Materialize the full joint grid; memory is l * (n - l + 1) doubles."""
    _validate_nl(n, l)
    blocks = [
        _jd_block(n, l, i0, min(i0 + _JD_BLOCK_ROWS, l))
        for i0 in range(0, l, _JD_BLOCK_ROWS)
    ]
    return PredecessorJoint(n=n, l=l, weights=np.vstack(blocks))


def _record_support_bound(m: int) -> int:
    """Support cutoff wide enough that the discarded record-law tail is < 1e-18."""
    if m <= 1:
        return 2
    h = math.log(m) + 1.0
    return int(math.ceil(h + 8.0 * math.sqrt(h) + 16.0))


@lru_cache(maxsize=4)
def _record_matrix_pow2(m_pow2: int) -> tuple[np.ndarray, np.ndarray]:
    """Rows 0..m of record-count masses on 0..K, plus per-row dropped tails."""
    k_cap = _record_support_bound(m_pow2)
    rows = np.zeros((m_pow2 + 1, k_cap + 1))
    tails = np.zeros(m_pow2 + 1)
    rows[0, 0] = 1.0
    for m in range(1, m_pow2 + 1):
        p = 1.0 / m
        prev = rows[m - 1]
        rows[m, 0] = prev[0] * (1.0 - p)
        rows[m, 1:] = prev[1:] * (1.0 - p) + prev[:-1] * p
        tails[m] = tails[m - 1] + prev[-1] * p
    rows.flags.writeable = False
    tails.flags.writeable = False
    return rows, tails


def _record_matrix(m_max: int) -> tuple[np.ndarray, np.ndarray]:
    size = 1
    while size < max(m_max, 1):
        size *= 2
    rows, tails = _record_matrix_pow2(size)
    return rows[: m_max + 1], tails[: m_max + 1]


def _move_grid(n: int, l: int, n_cap: int) -> tuple[np.ndarray, float]:
    """Joint (right moves, left moves) grid via two blocked matrix products.

    G = R_small^T (JD @ R_large): accumulating blockwise keeps only
    O(block * (n - l)) of the joint grid alive at a time.  The reduction
    order over blocks is fixed, so results are reproducible.
    """
    _validate_nl(n, l)
    if n > n_cap:
        raise CapExceededError("exact depth computation", n, n_cap)
    rec, _ = _record_matrix(max(l - 1, n - l))
    r_small = rec[:l]
    r_large = rec[: n - l + 1]
    k = rec.shape[1]
    grid = np.zeros((k, k))
    for i0 in range(0, l, _JD_BLOCK_ROWS):
        i1 = min(i0 + _JD_BLOCK_ROWS, l)
        w = _jd_block(n, l, i0, i1)
        grid += r_small[i0:i1].T @ (w @ r_large)
    tail = max(0.0, 1.0 - float(grid.sum()))
    return grid, tail


def exact_depth_pmf(n: int, l: int, n_cap: int = DEFAULT_N_CAP) -> Pmf:
    """Exact pmf of the depth of the node holding key l."""
    grid, tail = _move_grid(n, l, n_cap)
    k = grid.shape[0]
    diag = np.add.outer(np.arange(k), np.arange(k)).ravel()
    masses = np.bincount(diag, weights=grid.ravel())
    return Pmf.from_masses(0, masses, tail)


def move_joint_pmf(n: int, l: int, n_cap: int = DEFAULT_N_CAP) -> MoveJoint:
    """Joint pmf of right and left move counts on the path to key l."""
    grid, tail = _move_grid(n, l, n_cap)
    return MoveJoint(n=n, l=l, grid=grid, truncated_tail=tail)


def depth_mean(n: int, l: int, h: HarmonicTable | None = None) -> float:
    """Closed-form expected depth H_l + H_{n+1-l} - 2."""
    _validate_nl(n, l)
    if h is None:
        h = shared_harmonic_table(n)
    return float(h.H[l] + h.H[n + 1 - l] - 2.0)


def depth_variance(n: int, l: int, h: HarmonicTable | None = None) -> float:
    """Closed-form depth variance in terms of harmonic numbers."""
    _validate_nl(n, l)
    if h is None:
        h = shared_harmonic_table(n)
    a = 2.0 * (n + 1) / (l * (n + 1 - l))
    return float(
        a * h.H[n]
        + (1.0 - a) * (h.H[l] + h.H[n + 1 - l])
        - h.H2[l]
        - h.H2[n + 1 - l]
        + 2.0 / (l * (n + 1 - l))
        + 2.0
    )


def _log_comb(n, k):
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


# Explicit constant in the total-variation Poisson approximation bound.
POISSON_BOUND_CONSTANT = 28.0 + math.pi**2


def poisson_bound_report(n: int, l: int, n_cap: int = DEFAULT_N_CAP) -> BoundReport:
    """Check d_TV(exact law, Poisson with the same mean) <= (28 + pi^2)/log n."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    _validate_nl(n, l)
    lhs = total_variation(exact_depth_pmf(n, l, n_cap), poisson_pmf(depth_mean(n, l)))
    return BoundReport.check(float(lhs), POISSON_BOUND_CONSTANT / math.log(n))


def rank_to_key(n: int, t: float) -> int:
    """Key index round(n * t), half away from zero, clamped to 1..n-1."""
    return min(max(int(math.floor(n * t + 0.5)), 1), n - 1)


def mixpo_distance(
    n: int, t: float, n_cap: int = DEFAULT_N_CAP
) -> tuple[Distance, float]:
    """Wasserstein distance from the exact law at l = round(n t) to the
    mixed Poisson law with the reflected-exponential mixing measure.

    Returns the distance and the distance scaled by sqrt(log n); the theory
    promises the scaled value stays bounded, with no explicit constant, so
    callers should assert boundedness or trends only.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if not 0.0 < t < 1.0:
        raise ValueError(f"t must lie strictly inside (0, 1), got {t}")
    l = rank_to_key(n, t)
    d = wasserstein(
        exact_depth_pmf(n, l, n_cap),
        mixed_poisson_pmf(limit_mixing_measure(n, t)),
    )
    return d, float(d) * math.sqrt(math.log(n))


def mixing_variance_report(n: int, l: int) -> BoundReport:
    """Check that the variance of the harmonic mixing measure is at most 28.

    Computed straight off the joint grid: weights at locations H_i + H_j.
    """
    _validate_nl(n, l)
    h = shared_harmonic_table(n)
    locations = np.add.outer(h.H[:l], h.H[: n - l + 1])
    var_terms: list[float] = []
    mean_terms: list[float] = []
    for i0 in range(0, l, _JD_BLOCK_ROWS):
        i1 = min(i0 + _JD_BLOCK_ROWS, l)
        w = _jd_block(n, l, i0, i1)
        loc = locations[i0:i1]
        mean_terms.append(float((w * loc).sum()))
        var_terms.append(float((w * loc * loc).sum()))
    mean = math.fsum(mean_terms)
    second = math.fsum(var_terms)
    return BoundReport.check(second - mean * mean, 28.0)


def hypergeometric_log_bound_report(N: int, M: int, n: int) -> BoundReport:
    """Check E|log(X / EX)| 1{X > 0} for X hypergeometric against its bound.

    X counts the white balls among n draws without replacement from N balls
    of which M are white; EX = nM/N.  The right side is
    4 N log N / (n M) + 2 sqrt(N / (n M)).
    """
    if not 0 <= M <= N or not 0 <= n <= N:
        raise ValueError(f"need 0 <= M,n <= N, got N={N}, M={M}, n={n}")
    if n * M < 1:
        raise ValueError("degenerate case n*M = 0")
    ex = n * M / N
    k_lo = max(0, n - (N - M))
    k_hi = min(n, M)
    ks = np.arange(k_lo, k_hi + 1)
    pmf = np.exp(
        _log_comb(M, ks) + _log_comb(N - M, n - ks) - _log_comb(N, n)
    )
    positive = ks >= 1
    lhs = math.fsum(
        (pmf[positive] * np.abs(np.log(ks[positive] / ex))).tolist()
    )
    rhs = 4.0 * N * math.log(N) / (n * M) + 2.0 * math.sqrt(N / (n * M))
    return BoundReport.check(lhs, rhs)


@lru_cache(maxsize=16)
def _brute_depth_counts(n: int) -> tuple[tuple[int, ...], ...]:
    """counts[l-1][d] = number of permutations of 1..n whose tree puts l at depth d."""
    counts = [[0] * n for _ in range(n)]
    keys = range(1, n + 1)
    left = [0] * (n + 1)
    right = [0] * (n + 1)
    for perm in _all_permutations(keys):
        root = perm[0]
        for v in perm[1:]:
            node = root
            d = 0
            while True:
                d += 1
                if v < node:
                    nxt = left[node]
                    if nxt == 0:
                        left[node] = v
                        break
                else:
                    nxt = right[node]
                    if nxt == 0:
                        right[node] = v
                        break
                node = nxt
            counts[v - 1][d] += 1
        counts[root - 1][0] += 1
        for v in keys:
            left[v] = 0
            right[v] = 0
    return tuple(tuple(row) for row in counts)


def brute_force_depth_pmf(n: int, l: int) -> Pmf:
    """Depth pmf of key l from enumerating every permutation and building its tree.

    Integer counts over n! permutations, so the only rounding is the final
    division; the enumeration is shared across all l for a given n.
    """
    _validate_nl(n, l)
    if n > BRUTE_FORCE_CAP:
        raise CapExceededError("brute-force enumeration", n, BRUTE_FORCE_CAP)
    counts = _brute_depth_counts(n)[l - 1]
    fact = math.factorial(n)
    masses = np.array([c / fact for c in counts])
    return Pmf.from_masses(0, masses)
