"""Width-excursion events of a collective-coordinate trajectory."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MERGE_GAP = 10


@dataclass(frozen=True)
class WidthEvent:
    start: float
    end: float
    peak_w: float
    delta_phi: float
    start_index: int
    end_index: int


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Inclusive index ranges of the True runs of ``mask``."""
    m = np.concatenate([[False], mask, [False]]).astype(np.int8)
    edges = np.flatnonzero(np.diff(m))
    return [(int(a), int(b) - 1) for a, b in zip(edges[::2], edges[1::2])]


def detect_events(t, w, phi, w_threshold: float, merge_gap: int = MERGE_GAP
                  ) -> tuple[list[WidthEvent], np.ndarray]:
    """Excursions of ``w`` above ``w_threshold``.

    Runs separated by fewer than ``merge_gap`` samples are merged.  The second
    return value holds the waiting times between successive event starts.
    """
    t = np.asarray(t, dtype=float)
    w = np.asarray(w, dtype=float)
    phi = np.asarray(phi, dtype=float)
    merged: list[list[int]] = []
    for a, b in _runs(w > w_threshold):
        if merged and a - merged[-1][1] - 1 < merge_gap:
            merged[-1][1] = b
        else:
            merged.append([a, b])
    events = [WidthEvent(start=float(t[a]), end=float(t[b]), peak_w=float(w[a:b + 1].max()),
                         delta_phi=float(phi[b] - phi[a]), start_index=a, end_index=b)
              for a, b in merged]
    starts = np.array([e.start for e in events])
    return events, np.diff(starts)


def detect_trajectory_events(traj, w_threshold: float, merge_gap: int = MERGE_GAP):
    """:func:`detect_events` on a :class:`CCTrajectory`."""
    return detect_events(traj.t, traj.w, traj.phi, w_threshold, merge_gap)


def jump_coincidence(t, phi, events: list[WidthEvent], quantile: float = 0.999) -> float:
    """Fraction of the increments ``|dphi|`` above ``quantile`` that fall
    inside (or touch) some event interval."""
    t = np.asarray(t, dtype=float)
    d = np.abs(np.diff(np.asarray(phi, dtype=float)))
    if d.size == 0:
        return float("nan")
    big = np.flatnonzero(d > np.quantile(d, quantile))
    if big.size == 0:
        return float("nan")
    if not events:
        return 0.0
    lo = np.array([e.start_index for e in events])
    hi = np.array([e.end_index for e in events])
    # increment k spans samples k..k+1
    j = np.searchsorted(lo, big + 1, side="right") - 1
    hit = (j >= 0) & (big <= hi[np.maximum(j, 0)])
    return float(np.mean(hit))
