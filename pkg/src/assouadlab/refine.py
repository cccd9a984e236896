"""Adaptive major/minor dyadic refinement for holomorphic maps.

A square is split while a certified upper bound on the diameter of its image
exceeds the target; the bound is sup-derivative times diameter, which is
computable exactly for the explicit primitives and plays the same one-sided
role as a Sobolev-embedding diameter estimate would: a true-minor square may
be conservatively labeled major, never the reverse. Levels are root-relative
(the root square is level 0, side halves per level), so a cell of side
2^-j * R sits at level j+1 of the root Q(0, R) of side 2R.

The schedule couples the image-side targets r'_j = 2^(-j*alpha/beta) * R' to
source-side dyadic scales r_j = 2^-j * R with R = (2R')^(1/d) and
beta = p*alpha/(p - 2 + alpha); beta decreases to alpha as p grows. When a
spectrum constraint theta is active, j starts at the smallest j0 with
r'_j0 <= (R')^(1/theta).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .cmaps import MapExpr, Square, derivative_bound
from .errors import LevelBudgetError, ParameterError
from .pointset import PointSet

__all__ = [
    "RefineSchedule",
    "RefineResult",
    "classify",
    "refine",
    "cover_cells",
    "image_cover_count",
]


@dataclass(frozen=True)
class RefineSchedule:
    r_prime: float  # image-side coarse radius R'
    d: int
    alpha: float
    p: float
    theta: Optional[float] = None

    def __post_init__(self):
        if not self.r_prime > 0:
            raise ParameterError("R' must be positive")
        if int(self.d) != self.d or self.d < 1:
            raise ParameterError("degree d must be an integer >= 1")
        if not (0.0 < self.alpha <= 2.0):
            raise ParameterError("alpha must lie in (0, 2]")
        if not self.p > 2.0:
            raise ParameterError("p must exceed 2")
        if self.theta is not None and not (0.0 < self.theta < 1.0):
            raise ParameterError("theta must lie in (0, 1)")
        object.__setattr__(self, "d", int(self.d))

    @property
    def beta(self) -> float:
        return self.p * self.alpha / (self.p - 2.0 + self.alpha)

    @property
    def R(self) -> float:
        return (2.0 * self.r_prime) ** (1.0 / self.d)

    def target(self, j: int) -> float:
        """Image-side diameter target r'_j."""
        return 2.0 ** (-j * self.alpha / self.beta) * self.r_prime

    def r(self, j: int) -> float:
        """Source-side dyadic scale r_j."""
        return 2.0**-j * self.R

    @property
    def j0(self) -> int:
        """Smallest j >= 1 with r'_j <= (R')^(1/theta); 1 when unconstrained."""
        if self.theta is None:
            return 1
        cap = self.r_prime ** (1.0 / self.theta)
        j = max(int(math.ceil((1.0 - 1.0 / self.theta) * math.log2(self.r_prime)
                              * self.beta / self.alpha)), 1)
        while self.target(j) > cap:
            j += 1
        while j > 1 and self.target(j - 1) <= cap:
            j -= 1
        return j

    @property
    def root(self) -> Square:
        return Square(-self.R, -self.R, 2.0 * self.R)


def _subsquare(root: Square, level: int, ix: int, iy: int) -> Square:
    side = root.side * 2.0**-level
    return Square(root.x0 + ix * side, root.y0 + iy * side, side)


def classify(h: MapExpr, Q: Square, target: float) -> str:
    """'minor' iff the certified image diameter bound is within target."""
    if not target > 0:
        raise ParameterError("target must be positive")
    return "minor" if derivative_bound(h, Q) * Q.diam <= target else "major"


@dataclass(frozen=True)
class RefineResult:
    """Outcome of a refinement run; minors tile the refined region exactly."""

    root: Square
    target: float
    minors: tuple  # (level, ix, iy)
    major_counts: dict  # level -> M(level)
    total_minors: int
    growth_fit: Optional[float]
    covered_area: Fraction = Fraction(1)  # refined region as fraction of root

    def minor_side(self, level: int) -> float:
        return self.root.side * 2.0**-level

    def majors_tail(self, level: int) -> int:
        """Sum of M(l) over l >= level."""
        return sum(m for l, m in self.major_counts.items() if l >= level)

    def area_identity(self) -> bool:
        """Exact dyadic tiling check: minor areas sum to the refined area."""
        if not self.minors:
            return self.covered_area == 0
        total = sum(Fraction(1, 4**lvl) for lvl, _, _ in self.minors)
        return total == self.covered_area

    def to_json(self, include_minors: bool = False) -> str:
        d = {
            "root": [self.root.x0, self.root.y0, self.root.side],
            "target": self.target,
            "total_minors": self.total_minors,
            "major_counts": {str(k): v for k, v in sorted(self.major_counts.items())},
            "growth_fit": self.growth_fit,
        }
        if include_minors:
            d["minors"] = [list(m) for m in self.minors]
        return json.dumps(d, sort_keys=True)

    def minors_csv(self) -> str:
        lines = ["level,ix,iy"]
        lines += [f"{l},{ix},{iy}" for l, ix, iy in self.minors]
        return "\n".join(lines) + "\n"


def refine(
    h: MapExpr,
    root: Square,
    target: float,
    max_level: int = 40,
    start_level: int = 0,
    start_cells=None,
) -> RefineResult:
    """Breadth-first worklist: split majors into 4 children, emit minors.

    Terminates because the derivative bound is finite on the bounded root and
    diameters halve each level; fails loudly (listing survivors) if majors
    remain at max_level. Per-level processing in index order keeps M(level)
    accounting exact and runs deterministic. Area accounting is exact in
    dyadic arithmetic at every level.

    By default the worklist starts at the root square. Passing start_level
    plus start_cells (an iterable of (ix, iy) at that level) refines only that
    tiling, which is how the source-side counting argument runs it: level-j
    cells covering the set, subdivided fully below.
    """
    if not h.is_holomorphic:
        raise ParameterError("refine applies to holomorphic expressions only")
    if not target > 0:
        raise ParameterError("target must be positive")
    if max_level < 1:
        raise ParameterError("max_level must be >= 1")
    if start_cells is None:
        level = 0
        pending = [(0, 0)]
    else:
        level = int(start_level)
        if level < 0 or level > max_level:
            raise ParameterError("start_level must lie in [0, max_level]")
        n_side = 2**level
        pending = sorted(set((int(ix), int(iy)) for ix, iy in start_cells))
        for ix, iy in pending:
            if not (0 <= ix < n_side and 0 <= iy < n_side):
                raise ParameterError(f"start cell {(ix, iy)} outside level {level}")
    covered = Fraction(len(pending), 4**level)
    minors = []
    major_counts = {}
    emitted_area = Fraction(0)
    while pending:
        pending_area = Fraction(len(pending), 4**level)
        assert emitted_area + pending_area == covered
        majors = []
        for ix, iy in pending:
            sq = _subsquare(root, level, ix, iy)
            if derivative_bound(h, sq) * sq.diam <= target:
                minors.append((level, ix, iy))
                emitted_area += Fraction(1, 4**level)
            else:
                majors.append((ix, iy))
        if majors:
            major_counts[level] = len(majors)
            if level >= max_level:
                raise LevelBudgetError(
                    max_level,
                    [(level, ix, iy) for ix, iy in majors],
                )
            pending = [
                (2 * ix + dx, 2 * iy + dy)
                for ix, iy in majors
                for dx in (0, 1)
                for dy in (0, 1)
            ]
            pending.sort()
            level += 1
        else:
            pending = []
    minors.sort()

    fit = None
    if len(major_counts) >= 2:
        levels = sorted(major_counts)
        tails = []
        for l in levels:
            t = sum(major_counts[k] for k in levels if k >= l)
            tails.append(t)
        xs = np.array(levels, dtype=float)
        ys = np.log2(np.array(tails, dtype=float))
        fit = float(np.polyfit(xs, ys, 1)[0])

    return RefineResult(
        root=root,
        target=float(target),
        minors=tuple(minors),
        major_counts=major_counts,
        total_minors=len(minors),
        growth_fit=fit,
        covered_area=covered,
    )


def cover_cells(points: np.ndarray, root: Square, level: int) -> set:
    """Level-`level` cells of the root needed to cover the given points.

    Floored-index assignment, matching the dyadic counting convention; points
    outside the root are ignored.
    """
    n_cells = 2**level
    qx = (np.asarray(points).real - root.x0) / root.side
    qy = (np.asarray(points).imag - root.y0) / root.side
    ix = np.floor(qx * float(n_cells)).astype(np.int64)
    iy = np.floor(qy * float(n_cells)).astype(np.int64)
    ok = (ix >= 0) & (ix < n_cells) & (iy >= 0) & (iy < n_cells)
    return set(zip(ix[ok].tolist(), iy[ok].tolist()))


def image_cover_count(
    h: MapExpr,
    E: PointSet,
    w: complex,
    r_prime: float,
    j: int,
    schedule: RefineSchedule,
    max_level: int = 40,
) -> int:
    """Upper bound for N(D(w,R') cap h(E), r'_j) via refinement.

    Runs the refinement on the root Q(0, R) with target r'_j and counts the
    minors that meet E under the floored-index assignment (each sample point
    belongs to exactly one cell per level). Covers the case with 0 in the
    closure of D(w,R') cap E by centering the root at the origin.
    """
    w = complex(w)
    if abs(w) > r_prime * (1.0 + 1e-12):
        raise ParameterError(
            "image_cover_count handles the origin-in-closure case: need |w| <= R'"
        )
    img = h.evaluate(E.points)
    if np.abs(img - w).min() > r_prime:
        raise ParameterError("w must lie near h(E) (within R')")
    if j < 1:
        raise ParameterError("j must be >= 1")
    target = schedule.target(j)
    root = schedule.root
    result = refine(h, root, target, max_level=max_level)

    # floored-index assignment of sample points, exact across levels because
    # q * 2^level is an exact product
    qx = (E.points.real - root.x0) / root.side
    qy = (E.points.imag - root.y0) / root.side
    levels = sorted({lvl for lvl, _, _ in result.minors})
    by_level = {lvl: set() for lvl in levels}
    for lvl, ix, iy in result.minors:
        by_level[lvl].add((ix, iy))
    count = 0
    for lvl in levels:
        n_cells = 2**lvl
        ix = np.floor(qx * float(n_cells)).astype(np.int64)
        iy = np.floor(qy * float(n_cells)).astype(np.int64)
        ok = (ix >= 0) & (ix < n_cells) & (iy >= 0) & (iy < n_cells)
        hits = set(zip(ix[ok].tolist(), iy[ok].tolist())) & by_level[lvl]
        count += len(hits)
    return count
