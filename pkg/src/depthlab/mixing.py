"""Mixing measures and mixed Poisson evaluation.

Two kinds of mixing measure appear in this project: finite discrete measures
on [0, inf), and the reflected-exponential family (c - 2X)^+ with X
exponential of mean 1, which is the limiting measure for the depth of central
keys.  ``mixed_poisson_pmf`` integrates the Poisson kernel against either.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np
from scipy import stats
from scipy.special import gammaln

from .distributions import (
    DEFAULT_TAIL_TOL,
    HarmonicTable,
    Pmf,
    _validate_tol,
    shared_harmonic_table,
)

__all__ = [
    "DiscreteMeasure",
    "ReflectedExponential",
    "MixingMeasure",
    "EULER_GAMMA",
    "limit_mixing_measure",
    "harmonic_mixing_measure",
    "mixed_poisson_pmf",
    "measure_mean",
    "measure_variance",
    "measure_wasserstein",
]

# Euler's constant, hard-coded to full binary64 precision.
EULER_GAMMA = 0.5772156649015328606


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finite discrete probability measure on [0, inf).

    Locations are sorted and coalesced at construction; weights are
    nonnegative and sum to one within 1e-12.
    """

    locations: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        loc = np.asarray(self.locations, dtype=np.float64)
        w = np.asarray(self.weights, dtype=np.float64)
        if loc.shape != w.shape or loc.ndim != 1 or loc.size == 0:
            raise ValueError("locations and weights must be matching 1-D arrays")
        if np.any(loc < 0.0):
            raise ValueError("locations must be >= 0")
        if np.any(w < 0.0):
            raise ValueError("weights must be >= 0")
        if abs(math.fsum(w.tolist()) - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1 within 1e-12")
        loc.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "locations", loc)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_atoms(cls, atoms: list[tuple[float, float]]) -> "DiscreteMeasure":
        """Build from (location, weight) pairs, sorting and merging duplicates."""
        loc = np.asarray([a[0] for a in atoms], dtype=np.float64)
        w = np.asarray([a[1] for a in atoms], dtype=np.float64)
        uniq, inverse = np.unique(loc, return_inverse=True)
        merged = np.zeros(len(uniq))
        np.add.at(merged, inverse, w)
        return cls(uniq, merged)

    @classmethod
    def point(cls, location: float) -> "DiscreteMeasure":
        return cls(np.array([float(location)]), np.array([1.0]))

    def to_json_dict(self) -> dict:
        return {
            "variant": "discrete",
            "atoms": [[float(l), float(w)] for l, w in zip(self.locations, self.weights)],
        }


@dataclass(frozen=True)
class ReflectedExponential:
    """Law of (c - 2X)^+ with X exponential of mean 1.

    An atom of mass e^(-c/2) sits at 0 and the density on (0, c) is
    (1/2) e^(-(c - t)/2).  For c <= 0 the measure degenerates to the point
    mass at 0.
    """

    c: float

    @property
    def degenerate(self) -> bool:
        return self.c <= 0.0

    @property
    def atom_at_zero(self) -> float:
        return 1.0 if self.degenerate else math.exp(-self.c / 2.0)

    def density(self, t: float) -> float:
        if self.degenerate or not 0.0 < t < self.c:
            return 0.0
        return 0.5 * math.exp(-(self.c - t) / 2.0)

    def to_json_dict(self) -> dict:
        return {"variant": "exp-reflected", "c": float(self.c)}


MixingMeasure = Union[DiscreteMeasure, ReflectedExponential]


def limit_mixing_measure(n: int, t: float) -> ReflectedExponential:
    """Reflected-exponential mixing measure for size n and relative key rank t.

    The shift is c = 2 log n + 2 gamma + log(t (1 - t)); for c <= 0 the
    measure is the point mass at 0.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0.0 < t < 1.0:
        raise ValueError(f"t must lie strictly inside (0, 1), got {t}")
    c = 2.0 * math.log(n) + 2.0 * EULER_GAMMA + math.log(t * (1.0 - t))
    return ReflectedExponential(c=c)


def harmonic_mixing_measure(n: int, l: int, jd, h: HarmonicTable | None = None) -> DiscreteMeasure:
    """Discrete measure putting the weight of grid cell (i, j) at H_i + H_j.

    ``jd`` is the joint law of the (smaller, larger) predecessor counts for
    key l (see exact_depth.predecessor_joint); equal locations are coalesced.
    """
    if jd.n != n or jd.l != l:
        raise ValueError(
            f"joint grid was built for (n={jd.n}, l={jd.l}), not (n={n}, l={l})"
        )
    if h is None:
        h = shared_harmonic_table(n)
    locations = np.add.outer(h.H[:l], h.H[: n - l + 1]).ravel()
    weights = np.asarray(jd.weights, dtype=np.float64).ravel()
    uniq, inverse = np.unique(locations, return_inverse=True)
    merged = np.zeros(len(uniq))
    np.add.at(merged, inverse, weights)
    return DiscreteMeasure(uniq, merged)


def measure_mean(measure: MixingMeasure) -> float:
    if isinstance(measure, DiscreteMeasure):
        return math.fsum((measure.locations * measure.weights).tolist())
    if measure.degenerate:
        return 0.0
    c = measure.c
    return c - 2.0 + 2.0 * math.exp(-c / 2.0)


def measure_variance(measure: MixingMeasure) -> float:
    if isinstance(measure, DiscreteMeasure):
        m = measure_mean(measure)
        second = math.fsum(
            (measure.locations * measure.locations * measure.weights).tolist()
        )
        return second - m * m
    if measure.degenerate:
        return 0.0
    c = measure.c
    return 4.0 - 4.0 * c * math.exp(-c / 2.0) - 4.0 * math.exp(-c)


@lru_cache(maxsize=1)
def _gl_nodes() -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(16)
    return x, w


def _poisson_kernel(lam: np.ndarray, k_max: int) -> np.ndarray:
    """Matrix P[a, k] = e^(-lam_a) lam_a^k / k! for k = 0..k_max."""
    lam = np.asarray(lam, dtype=np.float64)
    ks = np.arange(k_max + 1)
    log_lam = np.log(np.where(lam > 0.0, lam, 1.0))
    logp = ks[None, :] * log_lam[:, None] - lam[:, None] - gammaln(ks + 1)[None, :]
    out = np.exp(logp)
    zero = lam == 0.0
    if np.any(zero):
        out[zero, :] = 0.0
        out[zero, 0] = 1.0
    return out


def _gl_panel(c: float, a: float, b: float, k_max: int) -> np.ndarray:
    """16-point Gauss-Legendre estimate of the mixed Poisson masses over (a, b)."""
    x, w = _gl_nodes()
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    lam = mid + half * x
    kern = _poisson_kernel(lam, k_max)
    dens = 0.5 * np.exp(-(c - lam) / 2.0)
    return half * ((w * dens) @ kern)


def _adaptive_gl(c: float, a: float, b: float, k_max: int, tol: float, depth: int = 0) -> np.ndarray:
    whole = _gl_panel(c, a, b, k_max)
    mid = 0.5 * (a + b)
    split = _gl_panel(c, a, mid, k_max) + _gl_panel(c, mid, b, k_max)
    err = float(np.max(np.abs(split - whole)))
    if err < tol or depth >= 40:
        return split
    return _adaptive_gl(c, a, mid, k_max, tol / 2.0, depth + 1) + _adaptive_gl(
        c, mid, b, k_max, tol / 2.0, depth + 1
    )


def mixed_poisson_pmf(measure: MixingMeasure, tol: float = DEFAULT_TAIL_TOL) -> Pmf:
    """Pmf of the mixed Poisson law with the given mixing measure.

    For a discrete measure this is an exact finite mixture of truncated
    Poisson pmfs.  For the reflected-exponential measure the density part is
    integrated with adaptive Gauss-Legendre panels, bisected until each mass
    point is stable below tol/10; the atom at 0 contributes e^(-c/2) to the
    mass at 0.  The support is cut where the tail certified by the dominating
    Poisson(rate upper bound) drops below tol.
    """
    _validate_tol(tol)
    if isinstance(measure, DiscreteMeasure):
        lam_max = float(measure.locations[-1])
        if lam_max == 0.0:
            return Pmf.delta(0)
        k_max = int(stats.poisson.isf(tol, lam_max))
        while stats.poisson.sf(k_max, lam_max) >= tol:
            k_max += 1
        kern = _poisson_kernel(measure.locations, k_max)
        masses = measure.weights @ kern
        tail = float(
            np.dot(measure.weights, stats.poisson.sf(k_max, measure.locations))
        )
        return Pmf.from_masses(0, masses, tail)

    if measure.degenerate:
        return Pmf.delta(0)
    c = measure.c
    k_max = int(stats.poisson.isf(tol, c))
    while stats.poisson.sf(k_max, c) >= tol:
        k_max += 1
    masses = _adaptive_gl(c, 0.0, c, k_max, tol / 10.0)
    masses[0] += measure.atom_at_zero
    total = math.fsum(masses.tolist())
    tail = max(0.0, 1.0 - total)
    return Pmf.from_masses(0, masses, tail)


def measure_wasserstein(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """L1 Wasserstein distance between finite discrete measures.

    Uses the quantile coupling: both atom lists are already sorted, so the
    distance is the integral of |inverse cdf difference| over the common
    weight partition.  Exact for finite measures.
    """
    terms: list[float] = []
    ia = ib = 0
    ra = float(mu.weights[0])
    rb = float(nu.weights[0])
    while True:
        step = min(ra, rb)
        terms.append(step * abs(float(mu.locations[ia]) - float(nu.locations[ib])))
        ra -= step
        rb -= step
        if ra <= 1e-17:
            ia += 1
            if ia >= len(mu.weights):
                break
            ra = float(mu.weights[ia])
        if rb <= 1e-17:
            ib += 1
            if ib >= len(nu.weights):
                break
            rb = float(nu.weights[ib])
    return math.fsum(terms)
