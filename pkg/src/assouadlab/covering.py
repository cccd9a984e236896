"""Dyadic covering counts N_d(D(z,R) cap E, m) and brute-force cover bounds.

The root square Q(z,R) is axes-parallel, centered at z, of side 2R, so it
contains the open disc D(z,R). Level-m subdivision has 4^m cells of side
2R * 2^-m. A sample point inside the disc occupies exactly one cell, the one
given by its floored index (lower-left convention); this pins boundary
assignment deterministically and changes counts by at most the constant the
covering definitions absorb anyway.

Cell indices are computed from q = (coord - origin) / (2R). Because every
cell side is 2R times a power of two, q * 2^m is an exact IEEE product, so
level-m indices equal level-m' indices shifted down by m'-m bit-exactly.
The batched estimator kernel relies on that identity; its equality with the
reference implementation here is asserted by tests.

All counting functions are pure; callers may evaluate different (z, R, m)
triples concurrently and results are independent of evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ParameterError, ScaleUnderflowError, SizeLimitError
from .pointset import PointSet

__all__ = [
    "DyadicFrame",
    "ScaleWindow",
    "CoverBounds",
    "count_dyadic",
    "count_bruteforce",
    "admissible_pairs",
    "max_level",
    "min_level",
    "dump_counts_csv",
    "BRUTEFORCE_GUARD",
]

BRUTEFORCE_GUARD = 2**12

# relative guard band so cover bounds stay honest under IEEE distance rounding
_REL_PAD = 1e-12


def _points_of(E) -> np.ndarray:
    return E.points if isinstance(E, PointSet) else np.asarray(E, dtype=np.complex128)


def _check_scales(R: float, m: int) -> None:
    if not (R > 0.0) or not math.isfinite(R):
        raise ParameterError("R must be a positive finite real")
    if m < 0:
        raise ParameterError("level m must be >= 0")
    # cell side 2R * 2^-m below eps*R carries no double-precision information
    if 2.0 ** (1 - m) < np.finfo(np.float64).eps:
        raise ScaleUnderflowError(
            f"level m={m} gives cell side below machine epsilon times R"
        )


def _check_center(E, z: complex) -> None:
    if isinstance(E, PointSet):
        if np.abs(E.points - z).min() > E.resolution:
            raise ParameterError(
                f"center {z!r} is not within resolution {E.resolution} of the sample"
            )


def cell_indices(points: np.ndarray, z: complex, R: float, m: int):
    """Floored level-m cell indices of the points lying in the open disc.

    Returns (ix, iy) int64 arrays for points with |p - z| < R, clipped into
    [0, 2^m - 1] against boundary rounding.
    """
    x = points.real
    y = points.imag
    dx = x - z.real
    dy = y - z.imag
    inside = dx * dx + dy * dy < R * R
    ox = z.real - R
    oy = z.imag - R
    two_r = 2.0 * R
    two_m = float(2**m)
    qx = (x[inside] - ox) / two_r
    qy = (y[inside] - oy) / two_r
    hi = np.int64(2**m - 1)
    ix = np.clip(np.floor(qx * two_m).astype(np.int64), 0, hi)
    iy = np.clip(np.floor(qy * two_m).astype(np.int64), 0, hi)
    return ix, iy


def count_dyadic(E, z: complex, R: float, m: int) -> int:
    """Number of level-m dyadic cells of Q(z,R) meeting D(z,R) cap E."""
    z = complex(z)
    _check_scales(R, m)
    _check_center(E, z)
    pts = _points_of(E)
    ix, iy = cell_indices(pts, z, R, m)
    if ix.size == 0:
        return 0
    return int(np.unique((ix << np.int64(m)) | iy).size)


@dataclass(frozen=True)
class DyadicFrame:
    """A root square with its level-m occupancy: the witness object behind N_d."""

    z: complex
    R: float
    m: int
    occupied: frozenset

    @classmethod
    def build(cls, E, z: complex, R: float, m: int) -> "DyadicFrame":
        z = complex(z)
        _check_scales(R, m)
        _check_center(E, z)
        ix, iy = cell_indices(_points_of(E), z, R, m)
        return cls(z, float(R), int(m), frozenset(zip(ix.tolist(), iy.tolist())))

    @property
    def count(self) -> int:
        return len(self.occupied)

    def cell_intersects_disc(self, i: int, j: int) -> bool:
        """Clamp-test: does the closed cell (i, j) meet the open disc D(z,R)?"""
        side = 2.0 * self.R / (2**self.m)
        x0 = (self.z.real - self.R) + i * side
        y0 = (self.z.imag - self.R) + j * side
        cx = min(max(self.z.real, x0), x0 + side)
        cy = min(max(self.z.imag, y0), y0 + side)
        return math.hypot(cx - self.z.real, cy - self.z.imag) < self.R


class CoverBounds(NamedTuple):
    """Bracketing of a covering number; exact only when the bounds agree."""

    lower: int
    upper: int

    @property
    def exact(self) -> bool:
        return self.lower == self.upper


def count_bruteforce(E, z: complex, R: float, r: float) -> CoverBounds:
    """Bracket N(D(z,R) cap E, r), covering by sets of diameter at most r.

    Upper bound: greedy diameter-constrained clustering in lexicographic point
    order. Lower bound: greedy maximal r-separated subset. Thresholds carry a
    one-part-in-1e12 guard band (clusters are built at r*(1-1e-12), separation
    demands > r*(1+1e-12)) so both bounds are honest for the true covering
    number despite IEEE rounding of pairwise distances.
    """
    z = complex(z)
    if not (0.0 < r <= 2.0 * R):
        raise ParameterError("need 0 < r <= 2R")
    pts = _points_of(E)
    d = np.abs(pts - z)
    pts = pts[d < R]
    if pts.size > BRUTEFORCE_GUARD:
        raise SizeLimitError(
            f"{pts.size} points in the disc exceeds the brute-force guard "
            f"{BRUTEFORCE_GUARD}; use count_dyadic at a matching level instead"
        )
    if pts.size == 0:
        return CoverBounds(0, 0)
    order = np.lexsort((pts.imag, pts.real))
    pts = pts[order]
    n = pts.size

    r_up = r * (1.0 + _REL_PAD)
    r_dn = r * (1.0 - _REL_PAD)

    # maximal r-separated subset (every kept pair strictly further than r)
    kept: list[complex] = []
    for p in pts:
        if not kept or np.abs(np.asarray(kept) - p).min() > r_up:
            kept.append(p)
    lower = len(kept)

    # greedy cover by sets of diameter <= r
    covered = np.zeros(n, dtype=bool)
    upper = 0
    for i in range(n):
        if covered[i]:
            continue
        members = [pts[i]]
        covered[i] = True
        cand = np.flatnonzero(~covered & (np.abs(pts - pts[i]) <= r_dn))
        for j in cand:
            if np.abs(np.asarray(members) - pts[j]).max() <= r_dn:
                members.append(pts[j])
                covered[j] = True
        upper += 1
    return CoverBounds(lower, upper)


def max_level(R: float, floor_side: float, m_max: int) -> int:
    """Largest m <= m_max with cell side 2R * 2^-m >= floor_side (0 if none)."""
    if floor_side <= 0.0:
        return m_max
    est = int(math.floor(math.log2(2.0 * R / floor_side)))
    m = max(min(est, m_max), 0)
    while m < m_max and 2.0 * R * 2.0 ** -(m + 1) >= floor_side:
        m += 1
    while m > 0 and 2.0 * R * 2.0**-m < floor_side:
        m -= 1
    return m


def min_level(R: float, theta: float) -> int:
    """Smallest m >= 1 with cell side 2R * 2^-m <= R^(1/theta)."""
    cap = R ** (1.0 / theta)
    est = int(math.ceil(math.log2(2.0 * R / cap)))
    m = max(est, 1)
    while 2.0 * R * 2.0**-m > cap:
        m += 1
    while m > 1 and 2.0 * R * 2.0 ** -(m - 1) <= cap:
        m -= 1
    return m


@dataclass(frozen=True)
class ScaleWindow:
    """Admissible (R, m) pairs for a spectrum exponent theta.

    A pair qualifies when the cell side s = 2R * 2^-m satisfies
    delta_eff <= s <= R^(1/theta) with m <= m_max; since theta < 1 and
    R < 1 the chain 0 < s <= R^(1/theta) < R < 1 then holds automatically.
    May be empty.
    """

    theta: float
    pairs: tuple


def admissible_pairs(theta: float, R_grid, m_max: int, delta_eff: float) -> ScaleWindow:
    """Enumerate all admissible (R, m) for the given theta over an R grid."""
    if not (0.0 < theta < 1.0):
        raise ParameterError("theta must lie in (0, 1)")
    for R in R_grid:
        if not (0.0 < R < 1.0):
            raise ParameterError("every R must lie in (0, 1)")
    pairs = []
    for R in R_grid:
        lo = min_level(R, theta)
        hi = max_level(R, delta_eff, m_max)
        for m in range(lo, hi + 1):
            pairs.append((float(R), m))
    return ScaleWindow(float(theta), tuple(pairs))


def dump_counts_csv(records, path) -> None:
    """Write (z, R, m, count) tuples as CSV with columns zx,zy,R,m,count."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("zx,zy,R,m,count\n")
        for z, R, m, count in records:
            z = complex(z)
            fh.write(
                f"{float(z.real)!r},{float(z.imag)!r},{float(R)!r},"
                f"{int(m)},{int(count)}\n"
            )
