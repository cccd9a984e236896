"""Finite samples of compact planar sets.

A compact set is represented by a finite delta-sample: every point of the
intended set is within ``resolution`` of some sample point. Everything
downstream truncates its scale analysis a fixed factor above ``resolution``,
because below that scale the sample carries no information about the set.
How faithful a delta-sample is to the underlying compact set at the scales
probed is a property of the generator, not something derived here; the
built-in families set ``resolution`` to the smallest consecutive gap (for
sequences) or the construction cell size (for grids and Cantor sets).

Sequence families include their limit point 0 explicitly: dropping it would
change the closure of the set, and compactness is exactly what the
counterexample suite is about.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, PointFileError

__all__ = [
    "PointSet",
    "SetSpec",
    "Similarity",
    "generate",
    "normalize",
    "diameter",
    "load",
    "save",
    "parse_setspec",
    "farthest_point_sample",
]


def _as_complex(points) -> np.ndarray:
    arr = np.asarray(points, dtype=np.complex128)
    if arr.ndim != 1:
        arr = arr.reshape(-1)
    return arr


class PointSet:
    """Immutable, duplicate-free, ordered planar point sample.

    Coordinates are IEEE doubles interpreted as complex numbers. Duplicates
    are rejected by exact coordinate equality (determinism over tolerance).
    """

    __slots__ = ("_points", "resolution", "label")

    def __init__(self, points, resolution: float, label: str = ""):
        arr = _as_complex(points)
        if arr.size == 0:
            raise ParameterError("point set must be non-empty")
        if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
            raise ParameterError("point coordinates must be finite")
        if np.unique(arr).size != arr.size:
            raise ParameterError("point set contains exact duplicates")
        resolution = float(resolution)
        if not (resolution > 0.0) or not math.isfinite(resolution):
            raise ParameterError("resolution must be a positive finite real")
        if arr.size > 1:
            d = diameter(arr)
            if resolution > d:
                raise ParameterError(
                    f"resolution {resolution} exceeds set diameter {d}"
                )
        arr.setflags(write=False)
        self._points = arr
        self.resolution = resolution
        self.label = str(label)

    @property
    def points(self) -> np.ndarray:
        return self._points

    @property
    def xy(self) -> np.ndarray:
        """(n, 2) float view of the coordinates."""
        return np.column_stack((self._points.real, self._points.imag))

    def __len__(self):
        return self._points.size

    def __repr__(self):
        return (
            f"PointSet(n={len(self)}, resolution={self.resolution!r}, "
            f"label={self.label!r})"
        )

    def same_points(self, other: "PointSet") -> bool:
        return (
            len(self) == len(other)
            and bool(np.array_equal(self._points, other._points))
            and self.resolution == other.resolution
        )


@dataclass(frozen=True)
class SetSpec:
    """Declarative description of a built-in point family.

    kinds: sequence_power(p), geometric(q), cantor(ratio, depth), grid(n),
    spiral(p, t_max, step), explicit(path).
    """

    kind: str
    params: tuple

    def __post_init__(self):
        k, p = self.kind, self.params
        if k == "sequence_power":
            if len(p) != 1 or not p[0] > 0:
                raise ParameterError("sequence_power requires p > 0")
        elif k == "geometric":
            if len(p) != 1 or not (0.0 < p[0] < 1.0):
                raise ParameterError("geometric requires 0 < q < 1")
        elif k == "cantor":
            if len(p) != 2 or not (0.0 < p[0] < 0.5) or not p[1] >= 1:
                raise ParameterError("cantor requires 0 < ratio < 1/2 and depth >= 1")
        elif k == "grid":
            if len(p) != 1 or not p[0] >= 1:
                raise ParameterError("grid requires n >= 1")
        elif k == "spiral":
            if len(p) != 3 or not p[0] > 0 or not p[1] > 1 or not p[2] > 0:
                raise ParameterError("spiral requires p > 0, t_max > 1, step > 0")
        elif k == "explicit":
            if len(p) != 1:
                raise ParameterError("explicit requires a path")
        else:
            raise ParameterError(f"unknown set kind {k!r}")


def _min_gap(values: np.ndarray) -> float:
    """Smallest gap between consecutive entries of a 1d real array."""
    gaps = np.abs(np.diff(values))
    return float(gaps.min())


def generate(spec: SetSpec, count: int) -> PointSet:
    """Generate the first ``count`` elements of a built-in family.

    Sequence families return ``count`` terms plus the limit point 0 (for
    sequence_power). For grids and Cantor sets ``count`` caps the natural
    enumeration (lexicographic for grids, ascending for Cantor endpoints)
    and the resolution is the construction cell size. Deterministic:
    identical spec and count give bit-identical output.
    """
    count = int(count)
    if count < 1:
        raise ParameterError("count must be >= 1")
    k, p = spec.kind, spec.params

    if k == "sequence_power":
        (power,) = p
        n = np.arange(1, count + 1, dtype=np.float64)
        terms = n ** (-float(power))
        pts = np.concatenate([terms, [0.0]])
        if np.unique(pts).size != pts.size:
            raise ParameterError(
                f"sequence_power(p={power}) underflows to duplicates at count={count}"
            )
        delta = _min_gap(pts) if count > 1 else float(pts[0])
        return PointSet(pts, delta, label=f"seq_power(p={power},N={count})")

    if k == "geometric":
        (q,) = p
        n = np.arange(1, count + 1, dtype=np.float64)
        pts = float(q) ** n
        if pts[-1] == 0.0 or np.unique(pts).size != pts.size:
            raise ParameterError(
                f"geometric(q={q}) underflows to duplicates at count={count}"
            )
        delta = _min_gap(pts) if count > 1 else float(pts[0])
        return PointSet(pts, delta, label=f"geometric(q={q},N={count})")

    if k == "cantor":
        ratio, depth = float(p[0]), int(p[1])
        intervals = [(0.0, 1.0)]
        for _ in range(depth):
            nxt = []
            for a, b in intervals:
                w = (b - a) * ratio
                nxt.append((a, a + w))
                nxt.append((b - w, b))
            intervals = nxt
        pts = sorted({e for ab in intervals for e in ab})
        pts = np.array(pts[: min(count, len(pts))], dtype=np.float64)
        delta = ratio**depth
        return PointSet(
            pts, delta, label=f"cantor(ratio={ratio},depth={depth},N={len(pts)})"
        )

    if k == "grid":
        (n,) = (int(p[0]),)
        if n == 1:
            return PointSet([0.0 + 0.0j], 1.0, label="grid(n=1)")
        h = 1.0 / (n - 1)
        xs, ys = np.meshgrid(np.arange(n) * h, np.arange(n) * h, indexing="ij")
        pts = (xs + 1j * ys).reshape(-1)[: min(count, n * n)]
        return PointSet(pts, h, label=f"grid(n={n},N={pts.size})")

    if k == "spiral":
        power, t_max, step = float(p[0]), float(p[1]), float(p[2])
        ts = np.arange(1.0, t_max + step / 2, step)[:count]
        pts = ts ** (-power) * np.exp(1j * ts)
        if np.unique(pts).size != pts.size:
            raise ParameterError("spiral parameters produce duplicate points")
        delta = float(np.abs(np.diff(pts)).min()) if pts.size > 1 else float(abs(pts[0]))
        return PointSet(
            pts, delta, label=f"spiral(p={power},tmax={t_max},step={step},N={pts.size})"
        )

    if k == "explicit":
        (path,) = p
        ps = load(path)
        if count < len(ps):
            return PointSet(ps.points[:count], ps.resolution, label=ps.label)
        return ps

    raise ParameterError(f"unknown set kind {k!r}")


def diameter(points) -> float:
    """Max pairwise distance of a planar point set.

    Exact (up to IEEE rounding of the final distance) via convex hull for
    sets in general position; degenerate/collinear sets fall back to the
    extreme-projection pair, which is exact for truly collinear input.
    """
    arr = _as_complex(points)
    if arr.size == 1:
        return 0.0
    xy = np.column_stack((arr.real, arr.imag))
    if arr.size <= 1024:
        cand = xy
    else:
        try:
            from scipy.spatial import ConvexHull

            cand = xy[ConvexHull(xy).vertices]
        except Exception:
            # collinear or otherwise degenerate: extremes along the principal
            # direction plus axis extremes
            c = xy - xy.mean(axis=0)
            d = c[np.argmax(np.einsum("ij,ij->i", c, c))]
            norm = math.hypot(*d)
            proj = c @ (d / norm) if norm > 0 else c[:, 0]
            idx = {
                int(np.argmin(proj)),
                int(np.argmax(proj)),
                int(np.argmin(xy[:, 0])),
                int(np.argmax(xy[:, 0])),
                int(np.argmin(xy[:, 1])),
                int(np.argmax(xy[:, 1])),
            }
            cand = xy[sorted(idx)]
    diff = cand[:, None, :] - cand[None, :, :]
    return float(np.sqrt((diff**2).sum(axis=-1)).max())


@dataclass(frozen=True)
class Similarity:
    """w = scale * (z - shift); inverse z = w / scale + shift."""

    scale: float
    shift: complex

    def apply(self, z):
        return self.scale * (np.asarray(z, dtype=np.complex128) - self.shift)

    def invert(self, w):
        return np.asarray(w, dtype=np.complex128) / self.scale + self.shift

    @property
    def is_identity(self) -> bool:
        return self.scale == 1.0 and self.shift == 0.0


_NORM_TOL = 1e-9


def is_normalized(E: PointSet) -> bool:
    """True if diameter is 1/2 and the bounding box is centered at 0 (1e-9 rel)."""
    if len(E) == 1:
        return True
    d = diameter(E.points)
    x, y = E.points.real, E.points.imag
    cx = (x.min() + x.max()) / 2.0
    cy = (y.min() + y.max()) / 2.0
    return abs(d - 0.5) <= _NORM_TOL * 0.5 and math.hypot(cx, cy) <= _NORM_TOL


def normalize(E: PointSet) -> tuple[PointSet, Similarity]:
    """Center the bounding box at the origin and scale the diameter to 1/2.

    With diameter exactly 1/2 every R < 1 is an admissible coarse scale for
    the spectrum window. Returns the applied similarity so witnesses can be
    mapped back. Single-point sets and already-normalized sets (within 1e-9)
    return the identity similarity, which makes normalize idempotent.

    Points whose separation falls below one ulp of the translation collapse
    to the same double in the normalized frame (extreme-dynamic-range sets
    like long geometric sequences); exact duplicates are dropped keeping
    first occurrence, which leaves the sampling-fineness guarantee intact.
    """
    if len(E) == 1 or is_normalized(E):
        return E, Similarity(1.0, 0.0 + 0.0j)
    d = diameter(E.points)
    x, y = E.points.real, E.points.imag
    shift = complex((x.min() + x.max()) / 2.0, (y.min() + y.max()) / 2.0)
    scale = 0.5 / d
    sim = Similarity(scale, shift)
    moved = sim.apply(E.points)
    _, keep = np.unique(moved, return_index=True)
    keep.sort()
    out = PointSet(moved[keep], E.resolution * scale, label=E.label)
    return out, sim


def save(E: PointSet, path) -> None:
    """Write the point file format: '# resolution=...', then 'x,y' per line.

    All reals use shortest round-trip decimal formatting, so load(save(E))
    reproduces E bit-exactly.
    """
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# resolution={float(E.resolution)!r}\n")
        if E.label:
            fh.write(f"# label={E.label}\n")
        for z in E.points:
            fh.write(f"{float(z.real)!r},{float(z.imag)!r}\n")


def load(path) -> PointSet:
    """Parse the point file format written by :func:`save`."""
    points = []
    resolution = None
    label = ""
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("resolution="):
                    try:
                        resolution = float(body.split("=", 1)[1])
                    except ValueError:
                        raise PointFileError("malformed resolution header", lineno)
                elif body.startswith("label="):
                    label = body.split("=", 1)[1]
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise PointFileError(f"expected 'x,y', got {line!r}", lineno)
            try:
                xv, yv = float(parts[0]), float(parts[1])
            except ValueError:
                raise PointFileError(f"non-numeric coordinate in {line!r}", lineno)
            if not (math.isfinite(xv) and math.isfinite(yv)):
                raise PointFileError(f"non-finite coordinate in {line!r}", lineno)
            points.append(complex(xv, yv))
    if not points:
        raise PointFileError("empty point set")
    if resolution is None:
        # no header: fall back to the smallest nonzero consecutive gap
        arr = np.array(points)
        gaps = np.abs(np.diff(arr))
        gaps = gaps[gaps > 0]
        resolution = float(gaps.min()) if gaps.size else 1.0
    try:
        return PointSet(points, resolution, label=label)
    except ParameterError as exc:
        raise PointFileError(str(exc))


_SETSPEC_USAGE = (
    "set spec grammar: seq:<p> | geom:<q> | cantor:<ratio>:<depth> | "
    "grid:<n> | spiral:<p>:<tmax>:<step> | file:<path>"
)


def parse_setspec(text: str) -> SetSpec:
    """Parse the CLI mini-grammar for set specs."""
    parts = text.split(":")
    head = parts[0]
    try:
        if head == "seq" and len(parts) == 2:
            return SetSpec("sequence_power", (float(parts[1]),))
        if head == "geom" and len(parts) == 2:
            return SetSpec("geometric", (float(parts[1]),))
        if head == "cantor" and len(parts) == 3:
            return SetSpec("cantor", (float(parts[1]), int(parts[2])))
        if head == "grid" and len(parts) == 2:
            return SetSpec("grid", (int(parts[1]),))
        if head == "spiral" and len(parts) == 4:
            return SetSpec(
                "spiral", (float(parts[1]), float(parts[2]), float(parts[3]))
            )
        if head == "file":
            return SetSpec("explicit", (text.split(":", 1)[1],))
    except ValueError as exc:
        raise ParameterError(f"bad set spec {text!r}: {exc}; {_SETSPEC_USAGE}")
    raise ParameterError(f"bad set spec {text!r}; {_SETSPEC_USAGE}")


def natural_size(spec: SetSpec) -> int | None:
    """Family size when it is intrinsically finite (grid, cantor), else None."""
    if spec.kind == "grid":
        n = int(spec.params[0])
        return n * n
    if spec.kind == "cantor":
        return 2 ** (int(spec.params[1]) + 1)
    return None


def farthest_point_sample(points: np.ndarray, k: int) -> np.ndarray:
    """Indices of a deterministic farthest-point subsample of size k.

    Seeded at the lexicographically smallest point (x, then y); each step adds
    the point farthest from the chosen set, ties broken by input order.
    Covers extremes, where Assouad behavior concentrates.
    """
    n = points.size
    if k >= n:
        return np.arange(n)
    order = np.lexsort((points.imag, points.real))
    chosen = np.empty(k, dtype=np.int64)
    chosen[0] = order[0]
    mind = np.abs(points - points[chosen[0]])
    for i in range(1, k):
        nxt = int(np.argmax(mind))
        chosen[i] = nxt
        np.minimum(mind, np.abs(points - points[nxt]), out=mind)
    return chosen
