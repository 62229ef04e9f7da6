"""Scaling of low-order absolute moments of an ensemble of paths.

For an alpha-stable motion ``E|X(t)|^q ~ t^(q/alpha)`` for ``q < alpha``, so
the log-log slope ``gamma(q)`` gives ``alpha = q / gamma(q)``.  Above alpha
the sample moments are dominated by the largest jump and ``gamma`` saturates.
"""

from __future__ import annotations

import numpy as np

from ..errors import InsufficientData, InsufficientEnsemble
from .types import StableEstimate

MIN_TRAJECTORIES = 100
DEFAULT_Q_GRID = (0.25, 0.5, 0.75)


def ensemble_from_segments(series, n_segments: int, segment_len: int) -> np.ndarray:
    """Cut one long path into ``n_segments`` paths re-started at zero."""
    series = np.asarray(series, dtype=float)
    if series.size < n_segments * segment_len:
        raise InsufficientData(f"series has {series.size} points, need {n_segments} x {segment_len}")
    blocks = series[: n_segments * segment_len].reshape(n_segments, segment_len)
    return blocks - blocks[:, :1]


def moment_scaling_test(ensemble, times=None, q_grid=DEFAULT_Q_GRID, window=None) -> StableEstimate:
    """Estimate alpha from ``M_q(t) = mean |x_i(t) - x_i(0)|^q``.

    ``ensemble`` has shape (trajectories, samples); ``times`` defaults to the
    sample index.  ``window = (t_lo, t_hi)`` restricts the regression; by
    default every positive time is used.
    """
    X = np.asarray(ensemble, dtype=float)
    if X.ndim != 2:
        raise ValueError("ensemble must be a 2-d array (trajectories, samples)")
    if X.shape[0] < MIN_TRAJECTORIES:
        raise InsufficientEnsemble(f"{X.shape[0]} trajectories, need at least {MIN_TRAJECTORIES}")
    t = np.arange(X.shape[1], dtype=float) if times is None else np.asarray(times, dtype=float)
    lo, hi = (t[1], t[-1]) if window is None else window
    sel = (t > t[0]) & (t >= lo) & (t <= hi)
    if np.count_nonzero(sel) < 2:
        raise InsufficientData("moment window holds fewer than two time points")
    q_grid = np.asarray(sorted(q_grid), dtype=float)
    if np.any(q_grid <= 0) or np.any(q_grid > 1.0):
        raise ValueError("moment orders must lie in (0, 1]")
    D = np.abs(X[:, sel] - X[:, :1])
    lt = np.log(t[sel] - t[0])
    gammas = np.empty(q_grid.size)
    for j, q in enumerate(q_grid):
        M = np.mean(D**q, axis=0)
        if np.any(M <= 0):
            raise InsufficientData("zero moment in the window (degenerate paths)")
        gammas[j] = np.polyfit(lt, np.log(M), 1)[0]
    alphas = q_grid / gammas
    # keep only orders below the estimate; iterate since the estimate moves
    use = np.ones(q_grid.size, dtype=bool)
    for _ in range(q_grid.size):
        est = float(np.mean(alphas[use]))
        nxt = q_grid < est
        if not nxt.any():
            nxt = q_grid == q_grid[0]
        if np.array_equal(nxt, use):
            break
        use = nxt
    est = float(np.mean(alphas[use]))
    # linear growth of gamma with q means no saturation (q below alpha throughout)
    slope_ratio = gammas / q_grid
    diag = {
        "q_grid": q_grid.tolist(),
        "gamma": gammas.tolist(),
        "alpha_per_q": alphas.tolist(),
        "orders_used": q_grid[use].tolist(),
        "gamma_over_q_spread": float(np.ptp(slope_ratio)),
        "window": [float(lo), float(hi)],
        "n_trajectories": int(X.shape[0]),
    }
    spread = float(np.std(alphas[use])) if use.sum() > 1 else float("nan")
    return StableEstimate(alpha=est, method="moment_scaling", stderr=spread, diagnostics=diag)
