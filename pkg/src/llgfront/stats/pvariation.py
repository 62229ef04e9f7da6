"""p-variation of a sampled path and its KS match to the Levy (1/2-stable) law.

For an alpha-stable Levy motion, the p-variation over a segment at
``p = 2 alpha`` is in the domain of attraction of the totally skewed
1/2-stable law, so scanning ``p`` for the best KS fit to that law
estimates alpha.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import erfc

from ..errors import InsufficientData, InsufficientResolution
from .types import PVariationResult

DEFAULT_P_GRID = np.round(np.arange(2.0, 4.0 + 1e-9, 0.1), 10)
SCALE_RANGE = (1e-6, 1e6)
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def levy_half_cdf(x, scale: float = 1.0):
    """CDF ``erfc(sqrt(c / 2x))`` of the Levy law with scale ``c``."""
    if not scale > 0:
        raise ValueError(f"scale must be positive, got {scale}")
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise ValueError("levy_half_cdf is defined for x > 0 only")
    out = erfc(np.sqrt(scale / (2.0 * x)))
    return out if out.ndim else float(out)


def p_variation(series, p: float, n: int, dt: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Running p-variation on the partition of mesh ``1/n``.

    ``series`` is sampled at spacing ``dt``; ``1/n`` must be a whole multiple
    of it.  Returns the partition times ``k/n`` and the cumulative sums.
    """
    if not p > 0:
        raise ValueError("p must be positive")
    series = np.asarray(series, dtype=float)
    ratio = 1.0 / (n * dt)
    stride = int(round(ratio))
    if ratio < 1.0 - 1e-9:
        raise InsufficientResolution(f"stored spacing {dt} is coarser than the mesh 1/{n}")
    if abs(ratio - stride) > 1e-6 * ratio:
        raise InsufficientResolution(f"mesh 1/{n} is not a multiple of the spacing {dt}")
    sub = series[::stride]
    V = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(sub)) ** p)])
    return np.arange(sub.size) / n, V


def ks_distance(sorted_values: np.ndarray, scale: float) -> float:
    """Sup-norm distance between the empirical CDF and ``levy_half_cdf``."""
    n = sorted_values.size
    F = erfc(np.sqrt(scale / (2.0 * sorted_values)))
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))


def _best_scale(sorted_values: np.ndarray, lo: float, hi: float, tol: float = 1e-7):
    """Minimise the KS distance over ``log c`` in ``[lo, hi]``.

    A coarse scan finds the basin, golden-section refines it.
    """
    grid = np.linspace(lo, hi, 57)
    d = np.array([ks_distance(sorted_values, math.exp(g)) for g in grid])
    k = int(np.argmin(d))
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = ks_distance(sorted_values, math.exp(x1)), ks_distance(sorted_values, math.exp(x2))
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = ks_distance(sorted_values, math.exp(x1))
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = ks_distance(sorted_values, math.exp(x2))
    best = min((d[k], grid[k]), (f1, x1), (f2, x2))
    return best[0], math.exp(best[1])


def segment_variations(series, p: float, n_segments: int, segment_len: int) -> np.ndarray:
    """p-variation total of each of ``n_segments`` consecutive blocks."""
    series = np.asarray(series, dtype=float)
    blocks = series[: n_segments * segment_len].reshape(n_segments, segment_len)
    return np.sum(np.abs(np.diff(blocks, axis=1)) ** p, axis=1)


def pvariation_ks_test(series, p_grid=DEFAULT_P_GRID, n_segments: int = 625,
                       segment_len: int = 320) -> PVariationResult:
    """Scan ``p`` and return the best KS match to the Levy law; ``alpha = p*/2``.

    The scale search runs over ``[1e-6, 1e6]`` times the median segment total
    so that the result does not depend on the units of the series.
    """
    series = np.asarray(series, dtype=float)
    if n_segments < 2 or segment_len < 2:
        raise InsufficientData("need at least two segments of two points")
    if series.size < n_segments * segment_len:
        raise InsufficientData(
            f"series has {series.size} points, need {n_segments} x {segment_len}")
    p_grid = np.asarray(p_grid, dtype=float)
    lo, hi = math.log(SCALE_RANGE[0]), math.log(SCALE_RANGE[1])
    ks = np.empty(p_grid.size)
    scales = np.empty(p_grid.size)
    for j, p in enumerate(p_grid):
        v = np.sort(segment_variations(series, p, n_segments, segment_len))
        if not v[0] > 0:
            raise InsufficientData("a segment has zero p-variation (constant series?)")
        ref = float(np.median(v))
        d, c = _best_scale(v / ref, lo, hi)
        ks[j], scales[j] = d, c * ref
    j = int(np.argmin(ks))
    return PVariationResult(p_grid=p_grid, ks_distance=ks, best_scale=scales,
                            p_star=float(p_grid[j]), alpha=float(p_grid[j] / 2.0),
                            n_segments=n_segments, segment_len=segment_len)
