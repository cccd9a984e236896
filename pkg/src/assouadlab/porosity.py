"""Empty-disc porosity estimation and the dimension cross-check.

Operational definition (the standard one behind the porous-iff-dim<2
characterization in the plane): E is lambda-porous when every disc D(z,r)
with z in E and r in the probed range contains a sub-disc of radius
lambda*r disjoint from E. The estimate searches, per probed disc, a lattice
of candidate hole centers y and scores min(nearest-sample-dist(y), r-|y-z|);
hole radii are 1-Lipschitz in y, so one 4x refinement around the best lattice
cell bounds the search error by a refined lattice step. The verdict keeps an
inconclusive band of exactly that width below lambda_min: not-porous is only
declared when even the search-error allowance cannot reach the threshold.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from .dimension import DimEstimate
from .errors import ParameterError, PreconditionError, ResolutionError
from .pointset import PointSet, farthest_point_sample, is_normalized

__all__ = [
    "PorosityParams",
    "PorosityProbe",
    "PorosityReport",
    "estimate_porosity",
    "check_luukkainen",
]


@dataclass(frozen=True)
class PorosityParams:
    center_budget: int = 256
    r_grid: Optional[tuple] = None  # None: dyadic grid clipped to valid range
    lattice_n: int = 32
    lambda_min: float = 0.05
    c_res: float = 16.0

    def __post_init__(self):
        if self.center_budget < 1 or self.lattice_n < 4:
            raise ParameterError("center_budget >= 1 and lattice_n >= 4 required")
        if not (0.0 < self.lambda_min < 1.0):
            raise ParameterError("lambda_min must lie in (0, 1)")
        if self.c_res <= 0:
            raise ParameterError("c_res must be positive")

    @property
    def search_error(self) -> float:
        """Relative hole-radius underestimate of the refined lattice search."""
        return 2.0 / (4.0 * self.lattice_n)


@dataclass(frozen=True)
class PorosityProbe:
    z: complex
    r: float
    hole_center: complex
    hole_radius: float

    @property
    def rel(self) -> float:
        return self.hole_radius / self.r

    def to_dict(self):
        return {
            "zx": self.z.real,
            "zy": self.z.imag,
            "r": self.r,
            "hole_x": self.hole_center.real,
            "hole_y": self.hole_center.imag,
            "hole_radius": self.hole_radius,
        }


@dataclass(frozen=True)
class PorosityReport:
    lambda_hat: float
    verdict: str  # 'porous' | 'not-porous' | 'inconclusive'
    lambda_min: float
    r_grid: tuple
    worst: PorosityProbe
    probes: tuple

    def to_json(self, include_witnesses: bool = False) -> str:
        d = {
            "lambda_hat": self.lambda_hat,
            "verdict": self.verdict,
            "lambda_min": self.lambda_min,
            "r_grid": list(self.r_grid),
            "worst": self.worst.to_dict(),
        }
        if include_witnesses:
            d["witnesses"] = [p.to_dict() for p in self.probes]
        return json.dumps(d, sort_keys=True)


def _resolve_r_grid(E: PointSet, params: PorosityParams) -> tuple:
    floor = params.c_res * E.resolution
    if params.r_grid is not None:
        grid = tuple(sorted((float(r) for r in params.r_grid), reverse=True))
        kept = tuple(r for r in grid if r >= floor)
        if not kept:
            raise ResolutionError(
                f"every requested r is below c_res*delta = {floor:.3e}"
            )
        return kept
    grid = tuple(2.0**-k for k in range(2, 10))
    kept = tuple(r for r in grid if r >= floor)
    if not kept:
        raise ResolutionError(
            f"default r-grid lies entirely below c_res*delta = {floor:.3e}; "
            "pass an explicit r_grid"
        )
    return kept


def estimate_porosity(
    E: PointSet, params: Optional[PorosityParams] = None
) -> PorosityReport:
    """Probe empty discs over (center, radius) pairs; lambda_hat is the min
    over probes of the best relative hole found."""
    params = params or PorosityParams()
    if not is_normalized(E):
        raise PreconditionError("estimate_porosity requires a normalized point set")
    r_grid = _resolve_r_grid(E, params)
    pts = E.points
    centers = pts[farthest_point_sample(pts, params.center_budget)]
    tree = cKDTree(np.column_stack((pts.real, pts.imag)))

    n = params.lattice_n
    u = -1.0 + (np.arange(n) + 0.5) * (2.0 / n)
    ux, uy = np.meshgrid(u, u, indexing="ij")
    unit = (ux + 1j * uy).reshape(-1)
    unit = unit[np.abs(unit) < 1.0]

    step_u = 2.0 / n  # coarse lattice step in disc units
    local = np.arange(-4, 5) * (step_u / 4.0)
    lx, ly = np.meshgrid(local, local, indexing="ij")
    local_offsets = (lx + 1j * ly).reshape(-1)

    def hole_values(cands: np.ndarray, z: complex, r: float) -> np.ndarray:
        d_in = r - np.abs(cands - z)
        rho, _ = tree.query(np.column_stack((cands.real, cands.imag)))
        return np.minimum(rho, d_in)

    probes = []
    for z in centers:
        z = complex(z)
        for r in r_grid:
            cands = z + r * unit
            vals = hole_values(cands, z, r)
            best = int(np.argmax(vals))
            y0 = cands[best]
            # one refinement pass around the best coarse cell
            loc = y0 + r * local_offsets
            loc = loc[np.abs(loc - z) < r]
            lvals = hole_values(loc, z, r)
            lbest = int(np.argmax(lvals))
            if lvals[lbest] >= vals[best]:
                y, hole = complex(loc[lbest]), float(lvals[lbest])
            else:
                y, hole = complex(y0), float(vals[best])
            probes.append(PorosityProbe(z, float(r), y, max(hole, 0.0)))

    worst = min(probes, key=lambda p: p.rel)
    lam = worst.rel
    if lam >= params.lambda_min:
        verdict = "porous"
    elif lam + params.search_error < params.lambda_min:
        verdict = "not-porous"
    else:
        verdict = "inconclusive"
    return PorosityReport(
        lambda_hat=lam,
        verdict=verdict,
        lambda_min=params.lambda_min,
        r_grid=r_grid,
        worst=worst,
        probes=tuple(probes),
    )


def check_luukkainen(
    E: PointSet, dim: DimEstimate, por: PorosityReport, margin: float = 0.15
) -> str:
    """Cross-check the porous-iff-dimension-below-2 characterization.

    Returns CONSISTENT when the two estimates agree through the margin,
    INCONCLUSIVE when the porosity verdict is, and FLAG otherwise (both sides
    are estimates, so disagreement is flagged, never fatal).
    """
    if not (0.0 < margin < 2.0):
        raise ParameterError("margin must lie in (0, 2)")
    if por.verdict == "inconclusive":
        return "INCONCLUSIVE"
    below = dim.value < 2.0 - margin
    if por.verdict == "porous" and below:
        return "CONSISTENT"
    if por.verdict == "not-porous" and not below:
        return "CONSISTENT"
    return "FLAG"
