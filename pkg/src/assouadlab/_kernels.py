"""Batched dyadic occupancy counting (numba).

For one radius R and many centers, counts occupied level-m cells for every
m in 1..m_hi in a single pass per center: points in the disc are Morton-coded
at the finest level, sorted, and the level at which consecutive codes first
diverge is histogrammed; suffix sums of that histogram give the distinct-cell
count at every coarser level at once.

Index arithmetic matches covering.cell_indices bit-exactly: q = (x - ox)/(2R)
rounds once, q * 2^m is an exact product, and truncation toward zero followed
by clamping into [0, 2^m - 1] equals floor-then-clamp for the q < 0 rounding
fringe. Tests assert kernel == reference on random instances.

Each center writes only its own output row, so the parallel schedule cannot
affect results.
"""

import warnings

import numpy as np

# TBB version probing is noise here; numba falls back to another threading
# layer. The warning fires lazily when the first parallel kernel launches.
warnings.filterwarnings(
    "ignore", message="The TBB threading layer requires TBB version"
)

from numba import njit, prange

__all__ = ["count_levels_batch", "set_threads"]

_U = np.uint64


@njit(cache=True, inline="always")
def _part1by1(v):
    # spread the low 32 bits of v to the even bit positions
    v &= _U(0xFFFFFFFF)
    v = (v | (v << _U(16))) & _U(0x0000FFFF0000FFFF)
    v = (v | (v << _U(8))) & _U(0x00FF00FF00FF00FF)
    v = (v | (v << _U(4))) & _U(0x0F0F0F0F0F0F0F0F)
    v = (v | (v << _U(2))) & _U(0x3333333333333333)
    v = (v | (v << _U(1))) & _U(0x5555555555555555)
    return v


@njit(cache=True, parallel=True)
def _count_levels(xs, ys, cx, cy, R, m_hi, out):
    # xs ascending, ys aligned; out is (n_centers, m_hi) int64, zero-filled
    R2 = R * R
    two_r = 2.0 * R
    two_m = np.float64(2.0) ** m_hi
    hi_idx = np.int64(2**m_hi - 1)
    for c in prange(cx.shape[0]):
        zx = cx[c]
        zy = cy[c]
        ox = zx - R
        oy = zy - R
        lo = np.searchsorted(xs, zx - R, side="left")
        hi = np.searchsorted(xs, zx + R, side="right")
        if hi <= lo:
            continue
        codes = np.empty(hi - lo, np.uint64)
        cnt = 0
        for i in range(lo, hi):
            dx = xs[i] - zx
            dy = ys[i] - zy
            if dx * dx + dy * dy < R2:
                qx = (xs[i] - ox) / two_r
                qy = (ys[i] - oy) / two_r
                ix = np.int64(qx * two_m)
                iy = np.int64(qy * two_m)
                if ix < 0:
                    ix = 0
                elif ix > hi_idx:
                    ix = hi_idx
                if iy < 0:
                    iy = 0
                elif iy > hi_idx:
                    iy = hi_idx
                codes[cnt] = _part1by1(_U(ix)) | (_part1by1(_U(iy)) << _U(1))
                cnt += 1
        if cnt == 0:
            continue
        sub = codes[:cnt]
        sub.sort()
        # hist[L]: adjacent sorted pairs whose codes first differ at depth
        # offset L, i.e. xor bit length in (2(L-1), 2L]
        hist = np.zeros(m_hi + 1, np.int64)
        for i in range(1, cnt):
            x = sub[i] ^ sub[i - 1]
            if x != _U(0):
                bl = 0
                if x >> _U(32) != _U(0):
                    bl += 32
                    x >>= _U(32)
                if x >> _U(16) != _U(0):
                    bl += 16
                    x >>= _U(16)
                if x >> _U(8) != _U(0):
                    bl += 8
                    x >>= _U(8)
                if x >> _U(4) != _U(0):
                    bl += 4
                    x >>= _U(4)
                if x >> _U(2) != _U(0):
                    bl += 2
                    x >>= _U(2)
                if x >> _U(1) != _U(0):
                    bl += 1
                bl += 1
                hist[(bl + 1) // 2] += 1
        # distinct cells at level m = 1 + #{pairs with L >= m_hi - m + 1}
        acc = np.int64(0)
        for t in range(m_hi, 0, -1):
            acc += hist[t]
            out[c, m_hi - t] = 1 + acc


def count_levels_batch(points: np.ndarray, centers: np.ndarray, R: float, m_hi: int):
    """Counts[c, m-1] = occupied level-m cells of Q(centers[c], R), m = 1..m_hi."""
    order = np.argsort(points.real, kind="stable")
    xs = np.ascontiguousarray(points.real[order])
    ys = np.ascontiguousarray(points.imag[order])
    out = np.zeros((centers.size, m_hi), dtype=np.int64)
    _count_levels(
        xs,
        ys,
        np.ascontiguousarray(centers.real),
        np.ascontiguousarray(centers.imag),
        float(R),
        int(m_hi),
        out,
    )
    return out


def set_threads(n) -> None:
    """Cap the kernel's worker threads (numba threading layer)."""
    if n is None:
        return
    import numba

    numba.set_num_threads(max(1, int(n)))
