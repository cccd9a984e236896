"""Explicit planar maps: holomorphic primitives and quasiconformal stretches.

A MapExpr is a composition list applied left to right. Holomorphic
primitives: pow(d), poly(c0,c1,...), recip, neglog (principal branch, plane
slit along the non-positive reals), affine(a,b). The quasiconformal primitive
is the radial stretch z -> z|z|^(1/K - 1), the model planar K-qc map; a
stretch followed by a power gives concrete K-quasiregular test maps in the
holomorphic-after-quasiconformal factorization shape.

Singularity handling: before each stage, every current point must stay at
least epsilon away from that primitive's singular set (0 for recip; the slit
for neglog). Default epsilon is 1e-9 times the input set diameter, small
enough to keep meaningful points and large enough to dodge catastrophic
cancellation.

The resolution attached to an image set is a documented heuristic (minimum
image gap over formerly-adjacent sample pairs), not a rigorous bound; the
true image resolution would need local derivative bounds.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateDifferentialError, ParameterError, SingularityError
from .pointset import PointSet, diameter

__all__ = [
    "Square",
    "Power",
    "Polynomial",
    "Reciprocal",
    "NegLog",
    "Stretch",
    "Affine",
    "MapExpr",
    "parse_map",
    "format_map",
    "apply_map",
    "derivative_bound",
    "estimate_dilatation",
    "DilatationReport",
]


@dataclass(frozen=True)
class Square:
    """Axes-parallel square [x0, x0+side] x [y0, y0+side]."""

    x0: float
    y0: float
    side: float

    def __post_init__(self):
        if not self.side > 0:
            raise ParameterError("square side must be positive")

    @property
    def center(self) -> complex:
        return complex(self.x0 + self.side / 2.0, self.y0 + self.side / 2.0)

    @property
    def diam(self) -> float:
        return self.side * math.sqrt(2.0)

    def corners(self):
        x1 = self.x0 + self.side
        y1 = self.y0 + self.side
        return (
            complex(self.x0, self.y0),
            complex(x1, self.y0),
            complex(self.x0, y1),
            complex(x1, y1),
        )

    def max_abs(self) -> float:
        """max |z| over the square; attained at a corner by convexity."""
        return max(abs(c) for c in self.corners())

    def min_abs(self) -> float:
        """min |z| over the square (0 if the square contains the origin)."""
        cx = min(max(0.0, self.x0), self.x0 + self.side)
        cy = min(max(0.0, self.y0), self.y0 + self.side)
        return math.hypot(cx, cy)


# ---------------------------------------------------------------------------
# primitives

@dataclass(frozen=True)
class Power:
    d: int

    holomorphic = True

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ParameterError("power degree d must be an integer >= 1")
        object.__setattr__(self, "d", int(self.d))

    def evaluate(self, z):
        return z**self.d

    def singular_distance(self, z):
        return None

    def local_degree(self) -> int:
        return self.d

    def fmt(self) -> str:
        return f"pow({self.d})"


@dataclass(frozen=True)
class Polynomial:
    coeffs: tuple  # c0, c1, ... real

    holomorphic = True

    def __post_init__(self):
        cs = tuple(float(c) for c in self.coeffs)
        if len(cs) < 1:
            raise ParameterError("polynomial needs at least one coefficient")
        object.__setattr__(self, "coeffs", cs)

    def evaluate(self, z):
        acc = np.zeros_like(np.asarray(z, dtype=np.complex128))
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc

    def singular_distance(self, z):
        return None

    def local_degree(self) -> int:
        deg = 0
        for k, c in enumerate(self.coeffs):
            if c != 0.0:
                deg = k
        return max(deg, 1)

    def fmt(self) -> str:
        return "poly(" + ",".join(repr(c) for c in self.coeffs) + ")"


@dataclass(frozen=True)
class Reciprocal:
    holomorphic = True

    def evaluate(self, z):
        return 1.0 / z

    def singular_distance(self, z):
        return np.abs(z)

    def local_degree(self) -> int:
        return 1

    def fmt(self) -> str:
        return "recip"


@dataclass(frozen=True)
class NegLog:
    holomorphic = True

    def evaluate(self, z):
        return -np.log(z)

    def singular_distance(self, z):
        # distance to the slit {t <= 0} on the real axis
        z = np.asarray(z, dtype=np.complex128)
        return np.where(z.real > 0.0, np.abs(z), np.abs(z.imag))

    def local_degree(self) -> int:
        return 1

    def fmt(self) -> str:
        return "neglog"


@dataclass(frozen=True)
class Stretch:
    k: float

    holomorphic = False

    def __post_init__(self):
        if not self.k >= 1.0:
            raise ParameterError("stretch K must be >= 1")
        object.__setattr__(self, "k", float(self.k))

    def evaluate(self, z):
        if self.k == 1.0:
            return np.asarray(z, dtype=np.complex128).copy()
        z = np.asarray(z, dtype=np.complex128)
        r = np.abs(z)
        out = np.zeros_like(z)
        nz = r > 0.0
        out[nz] = z[nz] * r[nz] ** (1.0 / self.k - 1.0)
        return out

    def singular_distance(self, z):
        return None

    def fmt(self) -> str:
        return f"stretch({self.k!r})"


@dataclass(frozen=True)
class Affine:
    a: complex
    b: complex

    holomorphic = True

    def __post_init__(self):
        a = complex(self.a)
        if a == 0:
            raise ParameterError("affine coefficient a must be nonzero")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", complex(self.b))

    def evaluate(self, z):
        return self.a * z + self.b

    def singular_distance(self, z):
        return None

    def local_degree(self) -> int:
        return 1

    def fmt(self) -> str:
        return (
            f"affine({self.a.real!r},{self.a.imag!r},"
            f"{self.b.real!r},{self.b.imag!r})"
        )


@dataclass(frozen=True)
class MapExpr:
    """Composition of primitives, applied left to right."""

    steps: tuple

    def __post_init__(self):
        if not self.steps:
            raise ParameterError("map expression must contain at least one primitive")
        object.__setattr__(self, "steps", tuple(self.steps))

    @property
    def declared_k(self) -> float:
        k = 1.0
        for s in self.steps:
            if isinstance(s, Stretch):
                k *= s.k
        return k

    @property
    def is_holomorphic(self) -> bool:
        return all(s.holomorphic for s in self.steps)

    @property
    def holomorphic_part_degree(self) -> int:
        degs = [s.local_degree() for s in self.steps if s.holomorphic]
        return max(degs) if degs else 1

    def evaluate(self, z):
        out = np.asarray(z, dtype=np.complex128)
        for s in self.steps:
            out = s.evaluate(out)
        return out

    def __or__(self, other: "MapExpr") -> "MapExpr":
        return MapExpr(self.steps + other.steps)

    def __str__(self):
        return format_map(self)


# ---------------------------------------------------------------------------
# textual grammar: pow(d) | poly(c0,c1,...) | recip | neglog | stretch(K)
#                  | affine(a_re,a_im,b_re,b_im), composed left to right by '|'

_CALL_RE = re.compile(r"^([a-z]+)\((.*)\)$")


def parse_map(text: str) -> MapExpr:
    """Parse the map grammar; parse(format_map(e)) == e bit-exactly."""
    steps = []
    for raw in text.split("|"):
        tok = raw.strip()
        if not tok:
            raise ParameterError(f"empty map stage in {text!r}")
        if tok == "recip":
            steps.append(Reciprocal())
            continue
        if tok == "neglog":
            steps.append(NegLog())
            continue
        m = _CALL_RE.match(tok)
        if not m:
            raise ParameterError(f"bad map primitive {tok!r}")
        name, argtext = m.group(1), m.group(2)
        try:
            args = [float(a) for a in argtext.split(",")] if argtext.strip() else []
        except ValueError:
            raise ParameterError(f"bad numeric argument in {tok!r}")
        if name == "pow" and len(args) == 1 and args[0] == int(args[0]):
            steps.append(Power(int(args[0])))
        elif name == "poly" and len(args) >= 1:
            steps.append(Polynomial(tuple(args)))
        elif name == "stretch" and len(args) == 1:
            steps.append(Stretch(args[0]))
        elif name == "affine" and len(args) == 4:
            steps.append(Affine(complex(args[0], args[1]), complex(args[2], args[3])))
        else:
            raise ParameterError(f"bad map primitive {tok!r}")
    return MapExpr(tuple(steps))


def format_map(expr: MapExpr) -> str:
    return "|".join(s.fmt() for s in expr.steps)


# ---------------------------------------------------------------------------
# application to point sets

def apply_map(expr: MapExpr, E: PointSet, exclusion: Optional[float] = None) -> PointSet:
    """Apply the composition to a point set, stage by stage.

    Raises SingularityError when a point of the current stage comes within the
    exclusion distance of that primitive's singular set. Exact duplicate image
    points (critical-point collisions) are dropped, keeping first occurrence.
    """
    if exclusion is None:
        d = diameter(E.points)
        exclusion = 1e-9 * (d if d > 0 else 1.0)
    cur = E.points.copy()
    for prim in expr.steps:
        dist = prim.singular_distance(cur)
        if dist is not None:
            bad = int(np.argmin(dist))
            if dist[bad] < exclusion:
                raise SingularityError(
                    prim.fmt(), complex(cur[bad]), float(dist[bad]), exclusion
                )
        cur = prim.evaluate(cur)

    # image resolution heuristic: min image gap over formerly-adjacent pairs
    src = E.points
    if len(E) > 1:
        from scipy.spatial import cKDTree

        tree = cKDTree(np.column_stack((src.real, src.imag)))
        _, nn = tree.query(np.column_stack((src.real, src.imag)), k=2)
        gaps = np.abs(cur - cur[nn[:, 1]])
        gaps = gaps[gaps > 0.0]
        delta = float(gaps.min()) if gaps.size else E.resolution
    else:
        delta = E.resolution

    _, keep_idx = np.unique(cur, return_index=True)
    keep_idx.sort()
    img = cur[keep_idx]
    d_img = diameter(img) if img.size > 1 else None
    if d_img is not None and delta > d_img:
        delta = d_img
    label = f"{format_map(expr)}({E.label})" if E.label else format_map(expr)
    return PointSet(img, delta, label=label + " [delta heuristic]")


# ---------------------------------------------------------------------------
# derivative bounds for holomorphic expressions

def _sup_deriv_and_enclosure(prim, m_low: float, m_high: float, center, radius):
    """sup |h'| over {m_low <= |z| <= m_high} (contained in the current
    enclosure) and a disc (center, radius) enclosing the image."""
    if isinstance(prim, Power):
        d = prim.d
        sup = d * m_high ** (d - 1)
        return sup, (0j, m_high**d)
    if isinstance(prim, Polynomial):
        sup = 0.0
        img = 0.0
        for k, c in enumerate(prim.coeffs):
            if k >= 1:
                sup += abs(c) * k * m_high ** (k - 1)
            img += abs(c) * m_high**k
        return sup, (0j, img)
    if isinstance(prim, Affine):
        return abs(prim.a), (prim.a * center + prim.b, abs(prim.a) * radius)
    if isinstance(prim, Reciprocal):
        if m_low <= 0.0:
            raise SingularityError("recip", complex(center), m_low, 0.0)
        return 1.0 / m_low**2, (0j, 1.0 / m_low)
    if isinstance(prim, NegLog):
        if m_low <= 0.0:
            raise SingularityError("neglog", complex(center), m_low, 0.0)
        img = max(abs(math.log(m_low)), abs(math.log(m_high))) + math.pi
        return 1.0 / m_low, (0j, img)
    raise ParameterError(
        f"derivative_bound requires holomorphic primitives, got {prim.fmt()}"
    )


def derivative_bound(expr: MapExpr, Q: Square) -> float:
    """Upper bound for sup over Q of |h'| of a holomorphic composition.

    Exact closed forms on the initial square: d * (max corner |z|)^(d-1) for
    pow(d), sum of |c_k| * k * (max corner |z|)^(k-1) for polynomials. Later
    stages work on conservative disc enclosures of the image, so composition
    bounds are sound but not tight.
    """
    if not expr.is_holomorphic:
        raise ParameterError(
            "derivative_bound is defined for holomorphic expressions only"
        )
    m_high = Q.max_abs()
    m_low = Q.min_abs()
    center = Q.center
    radius = Q.diam / 2.0
    bound = 1.0
    for prim in expr.steps:
        sup, (c_img, r_img) = _sup_deriv_and_enclosure(
            prim, m_low, m_high, center, radius
        )
        bound *= sup
        center, radius = c_img, r_img
        m_high = abs(center) + radius
        m_low = max(abs(center) - radius, 0.0)
    return bound


# ---------------------------------------------------------------------------
# numerical dilatation

@dataclass(frozen=True)
class DilatationReport:
    """Measured dilatation over a probe grid: K_hat >= 1 always, and for a
    declared composition K_hat <= declared_K * (1 + fd tolerance)."""

    k_hat: float
    max_beltrami: float
    region: Square
    grid_n: int
    step: float

    def to_dict(self):
        return {
            "k_hat": self.k_hat,
            "max_beltrami": self.max_beltrami,
            "region": [self.region.x0, self.region.y0, self.region.side],
            "grid_n": self.grid_n,
            "step": self.step,
        }


def estimate_dilatation(
    expr: MapExpr, region: Square, grid_n: int = 16, step: Optional[float] = None
) -> DilatationReport:
    """Finite-difference dilatation estimate over grid_n^2 probes.

    f_z = (d_x f - i d_y f)/2 and f_zbar = (d_x f + i d_y f)/2 by central
    differences; K_hat is the max of (|f_z|+|f_zbar|)/(|f_z|-|f_zbar|).
    """
    if grid_n < 8:
        raise ParameterError("grid_n must be >= 8")
    if step is None:
        step = 1e-5 * region.side
    if not (step > 0):
        raise ParameterError("step must be positive")
    xs = region.x0 + (np.arange(grid_n) + 0.5) * (region.side / grid_n)
    ys = region.y0 + (np.arange(grid_n) + 0.5) * (region.side / grid_n)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    z = (gx + 1j * gy).reshape(-1)

    # each stage must keep all probe evaluations 10*step clear of singularities
    for offs in (step, -step, 1j * step, -1j * step, 0.0):
        cur = z + offs
        for prim in expr.steps:
            dist = prim.singular_distance(cur)
            if dist is not None:
                bad = int(np.argmin(dist))
                if dist[bad] < 10.0 * step:
                    raise SingularityError(
                        prim.fmt(), complex(cur[bad]), float(dist[bad]), 10.0 * step
                    )
            cur = prim.evaluate(cur)

    fxp = expr.evaluate(z + step)
    fxm = expr.evaluate(z - step)
    fyp = expr.evaluate(z + 1j * step)
    fym = expr.evaluate(z - 1j * step)
    fx = (fxp - fxm) / (2.0 * step)
    fy = (fyp - fym) / (2.0 * step)
    fz = (fx - 1j * fy) / 2.0
    fzb = (fx + 1j * fy) / 2.0
    afz = np.abs(fz)
    afzb = np.abs(fzb)
    bad = afz <= afzb
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise DegenerateDifferentialError(complex(z[i]), complex(fz[i]), complex(fzb[i]))
    k_hat = float(((afz + afzb) / (afz - afzb)).max())
    beltrami = float((afzb / afz).max())
    return DilatationReport(k_hat, beltrami, region, grid_n, step)
